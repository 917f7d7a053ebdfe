#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "entq/bounds.hpp"
#include "entq/error.hpp"
#include "entq/moments.hpp"
#include "entq/simulator.hpp"
#include "entq/verify.hpp"

using namespace entq;

namespace {

ShotRecord shot(long long id, Axis a, long long n1, long long n2, Region r = Region::All) {
  return ShotRecord{id, a, r, n1, n2};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("entq_test_moments_" + name);
}

struct SampleStats {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
};

// Plain two-pass statistics with the fourth-moment standard error of the variance.
SampleStats stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  SampleStats s;
  for (double x : v) s.mean += x;
  s.mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = x - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  s.var = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  s.se_mean = std::sqrt(m2 / n);
  s.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return s;
}

double covariance_se(const std::vector<double>& a, const std::vector<double>& b) {
  const auto sa = stats(a);
  const auto sb = stats(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - sa.mean) * (b[i] - sb.mean);
  return stats(prod).se_mean;
}

// Exact split of a symmetric-state measurement: given k atoms found in state 1
// among N, each atom independently lands in A with probability p. The counts in
// A are then hypergeometric given the binomial size of A.
std::vector<ShotRecord> split_exactly(const std::vector<ShotRecord>& whole, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ShotRecord> out;
  for (const auto& s : whole) {
    long long ones_left = s.n1;
    long long left = s.n1 + s.n2;
    long long a1 = 0;
    long long a2 = 0;
    while (left > 0) {
      const bool is_one = u(rng) * static_cast<double>(left) < static_cast<double>(ones_left);
      if (is_one) --ones_left;
      --left;
      if (u(rng) < p) (is_one ? a1 : a2) += 1;
    }
    out.push_back({s.shot_id, s.setting, Region::A, a1, a2});
    out.push_back({s.shot_id, s.setting, Region::B, s.n1 - a1, s.n2 - a2});
  }
  return out;
}

}  // namespace

TEST_CASE("hand example: z shots (3,1),(2,2),(1,3)") {
  const std::vector<ShotRecord> shots{shot(0, Axis::Z, 3, 1), shot(1, Axis::Z, 2, 2), shot(2, Axis::Z, 1, 3)};
  const auto m = estimate_moments(shots);
  CHECK(m.mean_of(Axis::Z) == 0.0);
  CHECK(m.variance(Axis::Z) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.n_particles == 4.0);
  // Only z was measured.
  CHECK(m.unmeasured(0, 0));
  CHECK(m.unmeasured(1, 1));
  CHECK(m.unmeasured(0, 2));
  CHECK_FALSE(m.unmeasured(2, 2));
  CHECK_THROWS_AS(m.variance(Axis::X), UnmeasuredMoment);
  CHECK_THROWS_AS(m.mean_of(Axis::Y), UnmeasuredMoment);
}

TEST_CASE("identical shots give zero variance") {
  std::vector<ShotRecord> shots;
  for (int i = 0; i < 5; ++i) shots.push_back(shot(i, Axis::Z, 7, 3));
  const auto m = estimate_moments(shots);
  CHECK(m.variance(Axis::Z) == 0.0);
  CHECK(m.mean_of(Axis::Z) == 2.0);
}

TEST_CASE("estimator preconditions") {
  CHECK_THROWS_AS(estimate_moments(std::vector<ShotRecord>{}), InvalidInput);
  const std::vector<ShotRecord> one{shot(0, Axis::Z, 1, 1), shot(1, Axis::X, 1, 1), shot(2, Axis::X, 2, 0)};
  CHECK_THROWS_AS(estimate_moments(one), InvalidInput);
  const std::vector<ShotRecord> neg{shot(0, Axis::Z, -1, 1), shot(1, Axis::Z, 1, 1)};
  CHECK_THROWS_AS(estimate_moments(neg), InvalidInput);
  const std::vector<ShotRecord> regions{shot(0, Axis::Z, 1, 1, Region::A), shot(1, Axis::Z, 1, 1, Region::A)};
  CHECK_THROWS_AS(estimate_moments(regions), InvalidInput);
}

TEST_CASE("Gaussian shots with Var(J_z) = 32 estimate within 3 standard errors") {
  MomentData truth;
  truth.n_particles = 476.0;
  truth.mean = Eigen::Vector3d(233.24, 0.0, 0.0);
  truth.covariance.diagonal() << 5.0, 5000.0, 32.0;
  const auto shots = sample_shots(truth, SettingsPlan{{Axis::Z}}, 10000, 2024);
  std::vector<double> z;
  for (const auto& s : shots) z.push_back(s.spin());
  const auto st = stats(z);
  const auto m = estimate_moments(shots);
  CHECK(m.variance(Axis::Z) == doctest::Approx(st.var).epsilon(1e-12));
  CHECK(std::abs(m.variance(Axis::Z) - 32.0) < 3.0 * st.se_var);
}

TEST_CASE("bipartite: perfect anticorrelation gives correlation -1") {
  std::vector<ShotRecord> shots;
  const int za[] = {3, -1, 4, 0, -2, 5};
  for (int i = 0; i < 6; ++i) {
    shots.push_back(shot(i, Axis::Z, 10 + za[i], 10 - za[i], Region::A));
    shots.push_back(shot(i, Axis::Z, 10 - za[i], 10 + za[i], Region::B));
  }
  const auto m = estimate_bipartite_moments(shots);
  const Index az = component(Region::A, Axis::Z);
  const Index bz = component(Region::B, Axis::Z);
  const double va = m.covariance(az, az);
  const double vb = m.covariance(bz, bz);
  CHECK(m.covariance(az, bz) == doctest::Approx(-std::sqrt(va * vb)).epsilon(1e-14));
  CHECK(m.unmeasured(component(Region::A, Axis::Y), bz));
  CHECK(m.unmeasured(az, component(Region::B, Axis::X)));
}

TEST_CASE("bipartite: unpaired or mismatched shots are integrity errors") {
  const std::vector<ShotRecord> unpaired{shot(0, Axis::Z, 1, 1, Region::A), shot(0, Axis::Z, 1, 1, Region::B),
                                         shot(1, Axis::Z, 1, 1, Region::A)};
  CHECK_THROWS_AS(estimate_bipartite_moments(unpaired), InvalidInput);
  const std::vector<ShotRecord> mixed{shot(0, Axis::Z, 1, 1, Region::A), shot(0, Axis::Y, 1, 1, Region::B),
                                      shot(1, Axis::Z, 1, 1, Region::A), shot(1, Axis::Y, 1, 1, Region::B)};
  CHECK_THROWS_AS(estimate_bipartite_moments(mixed), InvalidInput);
}

TEST_CASE("bipartite: independent streams have cross covariance near 0") {
  BipartiteMomentData truth;
  truth.n_A = 200;
  truth.n_B = 200;
  truth.mean_A = Eigen::Vector3d(90, 0, 0);
  truth.mean_B = Eigen::Vector3d(90, 0, 0);
  truth.covariance.diagonal() << 40, 30, 20, 40, 30, 20;
  const auto shots = sample_shots(truth, SettingsPlan{{Axis::Y, Axis::Z}}, 10000, 77);
  const auto m = estimate_bipartite_moments(shots);
  for (Axis a : {Axis::Y, Axis::Z}) {
    std::vector<double> va;
    std::vector<double> vb;
    for (std::size_t i = 0; i + 1 < shots.size(); i += 2) {
      if (shots[i].setting != a) continue;
      va.push_back(shots[i].spin());
      vb.push_back(shots[i + 1].spin());
    }
    const double se = covariance_se(va, vb);
    CHECK(std::abs(m.covariance(component(Region::A, a), component(Region::B, a))) < 3.0 * se);
  }
}

TEST_CASE("bipartite: exact split sampling matches the moment propagation") {
  const int n = 100;
  const auto state = verify::squeezed_state(n, 0.05);
  const auto predicted = split_moments(exact_moments(state), n, SplitConfig{0.5});
  const auto whole = sample_shots(state, SettingsPlan{{Axis::Y, Axis::Z}}, 10000, 31);
  const auto shots = split_exactly(whole, 0.5, 32);
  const auto m = estimate_bipartite_moments(shots);
  for (Axis a : {Axis::Y, Axis::Z}) {
    std::vector<double> va;
    std::vector<double> vb;
    for (std::size_t i = 0; i < shots.size(); i += 2) {
      if (shots[i].setting != a) continue;
      va.push_back(shots[i].spin());
      vb.push_back(shots[i + 1].spin());
    }
    const Index ia = component(Region::A, a);
    const Index ib = component(Region::B, a);
    const auto sa = stats(va);
    const auto sb = stats(vb);
    CAPTURE(axis_label(a));
    CHECK(std::abs(m.covariance(ia, ia) - predicted.covariance(ia, ia)) < 3.0 * sa.se_var);
    CHECK(std::abs(m.covariance(ib, ib) - predicted.covariance(ib, ib)) < 3.0 * sb.se_var);
    CHECK(std::abs(m.covariance(ia, ib) - predicted.covariance(ia, ib)) < 3.0 * covariance_se(va, vb));
    CHECK(std::abs(m.mean_A(static_cast<Index>(a)) - predicted.mean_A(static_cast<Index>(a))) < 3.0 * sa.se_mean + 1e-12);
  }
  CHECK(m.n_A == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("estimators are permutation invariant") {
  const auto state = verify::squeezed_state(30, 0.1);
  auto shots = sample_shots(state, SettingsPlan{}, 500, 5);
  const auto before = estimate_moments(shots);
  std::mt19937 rng(9);
  std::shuffle(shots.begin(), shots.end(), rng);
  const auto after = estimate_moments(shots);
  CHECK((before.mean - after.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((before.covariance - after.covariance).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(before.n_particles == doctest::Approx(after.n_particles));
}

TEST_CASE("standard error of the estimates falls as 1/sqrt(shots)") {
  const auto state = css_x(100);
  const auto exact = exact_moments(state);
  const int seeds = 24;
  std::vector<double> log_shots;
  std::vector<double> log_rms_mean;
  std::vector<double> log_rms_var;
  for (int shots_per_axis : {100, 1000, 10000}) {
    double se_mean = 0.0;
    double se_var = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
      const auto m = estimate_moments(sample_shots(state, SettingsPlan{{Axis::Z}}, shots_per_axis, 1000 + seed));
      se_mean += std::pow(m.mean_of(Axis::Z) - exact.mean(2), 2);
      se_var += std::pow(m.variance(Axis::Z) - exact.covariance(2, 2), 2);
    }
    log_shots.push_back(std::log10(shots_per_axis));
    log_rms_mean.push_back(0.5 * std::log10(se_mean / seeds));
    log_rms_var.push_back(0.5 * std::log10(se_var / seeds));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double mx = (log_shots[0] + log_shots[1] + log_shots[2]) / 3.0;
    const double my = (y[0] + y[1] + y[2]) / 3.0;
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < 3; ++i) {
      num += (log_shots[i] - mx) * (y[i] - my);
      den += (log_shots[i] - mx) * (log_shots[i] - mx);
    }
    return num / den;
  };
  CHECK(slope(log_rms_mean) == doctest::Approx(-0.5).epsilon(0.3));
  CHECK(slope(log_rms_var) == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("JSON round trip is exact for randomized instances") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MomentData m;
    m.n_particles = 100.0 + 50.0 * std::abs(u(rng));
    m.mean = Eigen::Vector3d(40.0 * u(rng), 10.0 * u(rng), 5.0 * u(rng));
    Eigen::Matrix3d a = Eigen::Matrix3d::NullaryExpr([&] { return u(rng); });
    m.covariance = 10.0 * a * a.transpose();
    // Flagged entries carry zeros, as the estimators write them.
    if (trial % 2 == 0) {
      m.unmeasured(0, 1) = m.unmeasured(1, 0) = true;
      m.covariance(0, 1) = m.covariance(1, 0) = 0.0;
    }
    m.counts["z"] = trial + 2;
    const auto path = temp_file("single.json");
    save_moments(m, path);
    const auto back = std::get<MomentData>(load_moments(path));
    CHECK(back == m);

    BipartiteMomentData b;
    b.n_A = 10.0 + trial;
    b.n_B = 20.0 + trial;
    b.mean_A = Eigen::Vector3d(3.0 * u(rng), u(rng), u(rng));
    b.mean_B = Eigen::Vector3d(5.0 * u(rng), u(rng), u(rng));
    Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::NullaryExpr([&] { return u(rng); });
    b.covariance = c * c.transpose();
    b.unmeasured(0, 5) = b.unmeasured(5, 0) = true;
    b.covariance(0, 5) = b.covariance(5, 0) = 0.0;
    b.unmeasured_mean(4) = trial % 3 == 0;
    save_moments(b, path);
    CHECK(std::get<BipartiteMomentData>(load_moments(path)) == b);
    std::filesystem::remove(path);
  }
}

TEST_CASE("schema errors name the field") {
  MomentData m;
  m.n_particles = 4;
  m.mean = Eigen::Vector3d(1, 0, 0);
  m.covariance = Eigen::Matrix3d::Identity();
  auto doc = moments_to_json(m);
  doc.erase("covariance");
  try {
    moments_from_json(doc);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "covariance");
  }
  auto extra = moments_to_json(m);
  extra["surprise"] = 1;
  CHECK_THROWS_AS(moments_from_json(extra), SchemaError);
  CHECK_THROWS_AS(load_moments(temp_file("does_not_exist.json")), IoError);
}

TEST_CASE("experimental data file loads and gives xi^2 = 0.280") {
  const auto path = temp_file("experiment.json");
  {
    std::ofstream f(path);
    f << R"({"kind": "single", "n_particles": 476, "mean": [233.24, 0, 0],
             "covariance": [[0, 0, 0], [0, 0, 0], [0, 0, 32]],
             "unmeasured": [[0, 0], [1, 1], [0, 1], [0, 2], [1, 2]]})";
  }
  const auto m = std::get<MomentData>(load_moments(path));
  std::filesystem::remove(path);
  const double hand = 476.0 * 32.0 / (233.24 * 233.24);
  CHECK(wineland_xi2(m).xi2 == doctest::Approx(hand).epsilon(1e-14));
  CHECK(wineland_xi2(m).xi2 == doctest::Approx(0.280).epsilon(5e-4 / 0.28));
}

TEST_CASE("moment invariants") {
  MomentData m;
  m.n_particles = 10;
  m.covariance = Eigen::Matrix3d::Identity();
  m.covariance(0, 1) = 0.5;
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  m.covariance(1, 0) = 0.5;
  CHECK_NOTHROW(m.validate());
  m.covariance(2, 2) = -1e-3;
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  m.covariance(2, 2) = 1.0;
  m.mean = Eigen::Vector3d(5.6, 0, 0);
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  m.mean = Eigen::Vector3d(5.2, 0, 0);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("shots CSV round trip and line diagnostics") {
  const auto shots = sample_shots(verify::squeezed_state(12, 0.2), SettingsPlan{}, 20, 4);
  std::stringstream ss;
  write_shots_csv(ss, shots);
  CHECK(parse_shots_csv(ss) == shots);
  std::stringstream bad("shot_id,setting,region,n1,n2\n0,z,ALL,3,1\n1,z,ALL,x,1\n");
  try {
    parse_shots_csv(bad);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
