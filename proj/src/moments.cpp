#include "entq/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "entq/error.hpp"

namespace entq {

using nlohmann::json;

Region parse_region(std::string_view label) {
  if (label == "ALL") return Region::All;
  if (label == "A") return Region::A;
  if (label == "B") return Region::B;
  throw InvalidInput("unknown region '" + std::string(label) + "' (expected ALL, A or B)");
}

std::string_view region_label(Region region) {
  switch (region) {
    case Region::All: return "ALL";
    case Region::A: return "A";
    case Region::B: return "B";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// FlatMoments

double FlatMoments::mean_of(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != size()) throw InvalidInput("coefficient vector does not match moment components");
  double acc = 0.0;
  for (Index i = 0; i < size(); ++i) {
    if (coeffs(i) == 0.0) continue;
    if (unmeasured_mean(i)) {
      throw UnmeasuredMoment("mean of component " + std::to_string(i) + " is flagged unmeasured");
    }
    acc += coeffs(i) * mean(i);
  }
  return acc;
}

double FlatMoments::variance_of(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != size()) throw InvalidInput("coefficient vector does not match moment components");
  double acc = 0.0;
  for (Index i = 0; i < size(); ++i) {
    if (coeffs(i) == 0.0) continue;
    for (Index j = 0; j < size(); ++j) {
      if (coeffs(j) == 0.0) continue;
      if (unmeasured(i, j)) {
        throw UnmeasuredMoment("covariance entry (" + std::to_string(i) + "," + std::to_string(j) +
                               ") is flagged unmeasured");
      }
      acc += coeffs(i) * coeffs(j) * covariance(i, j);
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kHardMeanSlack = 1.10;

template <typename Mat, typename Mask>
void check_covariance(const Mat& cov, const Mask& unmeasured, const std::string& what) {
  for (Index i = 0; i < cov.rows(); ++i) {
    if (!unmeasured(i, i) && !(cov(i, i) >= 0.0)) {
      throw InvalidInput(what + ": diagonal entry " + std::to_string(i) + " is negative or NaN");
    }
    for (Index j = 0; j < cov.cols(); ++j) {
      if (!std::isfinite(cov(i, j))) throw InvalidInput(what + ": non-finite covariance entry");
      if (std::abs(cov(i, j) - cov(j, i)) > kSymmetryTolerance) {
        throw InvalidInput(what + ": covariance is not symmetric at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
      if (unmeasured(i, j) != unmeasured(j, i)) {
        throw InvalidInput(what + ": unmeasured flags must be symmetric");
      }
    }
  }
}

// |<J>| over the measured components, checked against n/2.
std::vector<std::string> check_mean_length(double n, const Eigen::Vector3d& mean,
                                           const Eigen::Matrix<bool, 3, 1>& unmeasured_mean,
                                           const Eigen::Matrix3d& cov, const Eigen::Matrix<bool, 3, 3>& unmeasured,
                                           const std::map<std::string, long long>& counts,
                                           const std::string& what) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidInput(what + ": particle number must be finite and >= 0");
  double length2 = 0.0;
  double se2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (unmeasured_mean(i)) continue;
    if (!std::isfinite(mean(i))) throw InvalidInput(what + ": non-finite mean");
    length2 += mean(i) * mean(i);
    const auto it = counts.find(std::string(1, axis_label(static_cast<Axis>(i))));
    if (it != counts.end() && it->second > 0 && !unmeasured(i, i)) {
      se2 += cov(i, i) / static_cast<double>(it->second);
    }
  }
  const double length = std::sqrt(length2);
  if (length > 0.5 * n * kHardMeanSlack) {
    throw InvalidInput(what + ": mean spin length " + std::to_string(length) + " exceeds N/2 = " +
                       std::to_string(0.5 * n) + " by more than 10%");
  }
  std::vector<std::string> warnings;
  if (length > 0.5 * n + 3.0 * std::sqrt(se2)) {
    warnings.push_back(what + ": mean spin length exceeds N/2 by more than 3 standard errors");
  }
  return warnings;
}

}  // namespace

std::vector<std::string> MomentData::validate() const {
  check_covariance(covariance, unmeasured, "moments");
  return check_mean_length(n_particles, mean, unmeasured_mean, covariance, unmeasured, counts, "moments");
}

FlatMoments MomentData::flat() const {
  return {mean, covariance, unmeasured, unmeasured_mean};
}

double MomentData::variance(Axis a) const {
  const auto i = static_cast<Index>(a);
  if (unmeasured(i, i)) throw UnmeasuredMoment(std::string("Var(J_") + axis_label(a) + ") is flagged unmeasured");
  return covariance(i, i);
}

double MomentData::mean_of(Axis a) const {
  const auto i = static_cast<Index>(a);
  if (unmeasured_mean(i)) throw UnmeasuredMoment(std::string("<J_") + axis_label(a) + "> is flagged unmeasured");
  return mean(i);
}

MomentData BipartiteMomentData::block_A() const {
  MomentData out;
  out.n_particles = n_A;
  out.mean = mean_A;
  out.covariance = covariance.topLeftCorner<3, 3>();
  out.unmeasured = unmeasured.topLeftCorner<3, 3>();
  out.unmeasured_mean = unmeasured_mean.head<3>();
  return out;
}

MomentData BipartiteMomentData::block_B() const {
  MomentData out;
  out.n_particles = n_B;
  out.mean = mean_B;
  out.covariance = covariance.bottomRightCorner<3, 3>();
  out.unmeasured = unmeasured.bottomRightCorner<3, 3>();
  out.unmeasured_mean = unmeasured_mean.tail<3>();
  return out;
}

std::vector<std::string> BipartiteMomentData::validate() const {
  check_covariance(covariance, unmeasured, "bipartite moments");
  auto warnings = block_A().validate();
  auto more = block_B().validate();
  warnings.insert(warnings.end(), more.begin(), more.end());
  return warnings;
}

FlatMoments BipartiteMomentData::flat() const {
  FlatMoments out;
  out.mean.resize(6);
  out.mean << mean_A, mean_B;
  out.covariance = covariance;
  out.unmeasured = unmeasured;
  out.unmeasured_mean = unmeasured_mean;
  return out;
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;
};

// Values are sorted first so the floating-point reduction order, and hence the
// result, does not depend on shot order.
SampleStats sample_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

double sorted_mean_total(std::vector<long long> totals) {
  const long long sum = std::accumulate(totals.begin(), totals.end(), 0LL);
  return static_cast<double>(sum) / static_cast<double>(totals.size());
}

std::string axis_key(Axis a) { return std::string(1, axis_label(a)); }

}  // namespace

MomentData estimate_moments(std::span<const ShotRecord> shots) {
  if (shots.empty()) throw InvalidInput("no shots supplied");
  std::array<std::vector<double>, 3> per_axis;
  std::vector<long long> totals;
  totals.reserve(shots.size());
  for (const auto& s : shots) {
    if (s.region != Region::All) {
      throw InvalidInput("estimate_moments expects region ALL; use the bipartite estimator for A/B shots");
    }
    if (s.n1 < 0 || s.n2 < 0) throw InvalidInput("negative atom count in shot " + std::to_string(s.shot_id));
    per_axis[static_cast<std::size_t>(s.setting)].push_back(s.spin());
    totals.push_back(s.total());
  }

  MomentData out;
  out.n_particles = sorted_mean_total(std::move(totals));
  out.unmeasured.setConstant(true);
  out.unmeasured_mean.setConstant(true);
  for (int a = 0; a < 3; ++a) {
    auto& values = per_axis[static_cast<std::size_t>(a)];
    if (values.empty()) continue;
    if (values.size() < 2) {
      throw InvalidInput("axis " + axis_key(static_cast<Axis>(a)) + " has fewer than 2 shots");
    }
    out.counts[axis_key(static_cast<Axis>(a))] = static_cast<long long>(values.size());
    const auto stats = sample_stats(std::move(values));
    out.mean(a) = stats.mean;
    out.covariance(a, a) = stats.variance;
    out.unmeasured(a, a) = false;
    out.unmeasured_mean(a) = false;
  }
  return out;
}

BipartiteMomentData estimate_bipartite_moments(std::span<const ShotRecord> shots) {
  if (shots.empty()) throw InvalidInput("no shots supplied");
  struct Pair {
    std::optional<ShotRecord> a;
    std::optional<ShotRecord> b;
  };
  std::map<long long, Pair> by_shot;
  for (const auto& s : shots) {
    if (s.n1 < 0 || s.n2 < 0) throw InvalidInput("negative atom count in shot " + std::to_string(s.shot_id));
    if (s.region == Region::All) {
      throw InvalidInput("shot " + std::to_string(s.shot_id) + " has region ALL in bipartite data");
    }
    auto& slot = by_shot[s.shot_id];
    auto& target = s.region == Region::A ? slot.a : slot.b;
    if (target) {
      throw InvalidInput("shot " + std::to_string(s.shot_id) + " lists region " +
                         std::string(region_label(s.region)) + " twice");
    }
    target = s;
  }

  std::array<std::vector<std::pair<double, double>>, 3> per_axis;
  std::vector<long long> totals_a;
  std::vector<long long> totals_b;
  for (const auto& [id, pair] : by_shot) {
    if (!pair.a || !pair.b) {
      throw InvalidInput("data integrity: shot " + std::to_string(id) + " lacks its " +
                         (pair.a ? "B" : "A") + " region");
    }
    if (pair.a->setting != pair.b->setting) {
      throw InvalidInput("data integrity: shot " + std::to_string(id) + " measures different axes in A and B");
    }
    per_axis[static_cast<std::size_t>(pair.a->setting)].emplace_back(pair.a->spin(), pair.b->spin());
    totals_a.push_back(pair.a->total());
    totals_b.push_back(pair.b->total());
  }

  BipartiteMomentData out;
  out.n_A = sorted_mean_total(std::move(totals_a));
  out.n_B = sorted_mean_total(std::move(totals_b));
  out.unmeasured.setConstant(true);
  out.unmeasured_mean.setConstant(true);
  for (int a = 0; a < 3; ++a) {
    auto& values = per_axis[static_cast<std::size_t>(a)];
    if (values.empty()) continue;
    if (values.size() < 2) {
      throw InvalidInput("axis " + axis_key(static_cast<Axis>(a)) + " has fewer than 2 paired shots");
    }
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const auto& [va, vb] : values) {
      sum_a += va;
      sum_b += vb;
    }
    const double mean_a = sum_a / n;
    const double mean_b = sum_b / n;
    double saa = 0.0;
    double sbb = 0.0;
    double sab = 0.0;
    for (const auto& [va, vb] : values) {
      saa += (va - mean_a) * (va - mean_a);
      sbb += (vb - mean_b) * (vb - mean_b);
      sab += (va - mean_a) * (vb - mean_b);
    }
    const Index ia = component(Region::A, static_cast<Axis>(a));
    const Index ib = component(Region::B, static_cast<Axis>(a));
    out.mean_A(a) = mean_a;
    out.mean_B(a) = mean_b;
    out.covariance(ia, ia) = saa / (n - 1.0);
    out.covariance(ib, ib) = sbb / (n - 1.0);
    out.covariance(ia, ib) = out.covariance(ib, ia) = sab / (n - 1.0);
    for (Index i : {ia, ib}) {
      out.unmeasured_mean(i) = false;
      for (Index j : {ia, ib}) out.unmeasured(i, j) = false;
    }
    out.counts[axis_key(static_cast<Axis>(a))] = static_cast<long long>(values.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename Mask>
json unmeasured_pairs(const Mask& mask) {
  json pairs = json::array();
  for (Index i = 0; i < mask.rows(); ++i) {
    for (Index j = i; j < mask.cols(); ++j) {
      if (mask(i, j)) pairs.push_back({i, j});
    }
  }
  return pairs;
}

template <typename Flags>
json unmeasured_indices(const Flags& flags) {
  json out = json::array();
  for (Index i = 0; i < flags.size(); ++i) {
    if (flags(i)) out.push_back(i);
  }
  return out;
}

template <typename Vec>
json vector_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <typename Mat>
json matrix_json(const Mat& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i)));
  return out;
}

const json& require(const json& doc, const std::string& field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(field, "missing required field");
  return *it;
}

double number_field(const json& doc, const std::string& field) {
  const json& v = require(doc, field);
  if (!v.is_number()) throw SchemaError(field, "expected a number");
  return v.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector_field(const json& doc, const std::string& field) {
  const json& v = require(doc, field);
  if (!v.is_array() || v.size() != N) throw SchemaError(field, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw SchemaError(field, "element " + std::to_string(i) + " is not a number");
    out(i) = v[i].get<double>();
  }
  return out;
}

template <int N>
Eigen::Matrix<double, N, N> matrix_field(const json& doc, const std::string& field) {
  const json& v = require(doc, field);
  const std::string shape = std::to_string(N) + "x" + std::to_string(N);
  if (!v.is_array() || v.size() != N) throw SchemaError(field, "expected a " + shape + " array of arrays");
  Eigen::Matrix<double, N, N> out;
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_array() || v[i].size() != N) throw SchemaError(field, "expected a " + shape + " array of arrays");
    for (int j = 0; j < N; ++j) {
      if (!v[i][j].is_number()) {
        throw SchemaError(field, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not a number");
      }
      out(i, j) = v[i][j].get<double>();
    }
  }
  return out;
}

template <int N>
Eigen::Matrix<bool, N, N> pairs_field(const json& doc, const std::string& field) {
  Eigen::Matrix<bool, N, N> out = Eigen::Matrix<bool, N, N>::Constant(false);
  const auto it = doc.find(field);
  if (it == doc.end()) return out;
  if (!it->is_array()) throw SchemaError(field, "expected an array of index pairs");
  for (const auto& p : *it) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw SchemaError(field, "expected index pairs like [0, 2]");
    }
    const auto i = p[0].get<long long>();
    const auto j = p[1].get<long long>();
    if (i < 0 || j < 0 || i >= N || j >= N) throw SchemaError(field, "index out of range");
    out(i, j) = out(j, i) = true;
  }
  return out;
}

template <int N>
Eigen::Matrix<bool, N, 1> indices_field(const json& doc, const std::string& field) {
  Eigen::Matrix<bool, N, 1> out = Eigen::Matrix<bool, N, 1>::Constant(false);
  const auto it = doc.find(field);
  if (it == doc.end()) return out;
  if (!it->is_array()) throw SchemaError(field, "expected an array of component indices");
  for (const auto& p : *it) {
    if (!p.is_number_integer()) throw SchemaError(field, "expected integer indices");
    const auto i = p.get<long long>();
    if (i < 0 || i >= N) throw SchemaError(field, "index out of range");
    out(i) = true;
  }
  return out;
}

std::map<std::string, long long> counts_field(const json& doc) {
  std::map<std::string, long long> out;
  const auto it = doc.find("counts");
  if (it == doc.end()) return out;
  if (!it->is_object()) throw SchemaError("counts", "expected an object of per-axis shot counts");
  for (const auto& [key, value] : it->items()) {
    if (key != "x" && key != "y" && key != "z") throw SchemaError("counts", "unknown axis '" + key + "'");
    if (!value.is_number_integer() || value.get<long long>() < 0) {
      throw SchemaError("counts", "counts must be nonnegative integers");
    }
    out[key] = value.get<long long>();
  }
  return out;
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(key, "unknown field");
    }
  }
}

// Unmeasured entries are written as 0 so files never carry stale numbers.
template <typename Mat, typename Mask>
Mat zero_flagged(Mat m, const Mask& mask) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (mask(i, j)) m(i, j) = 0.0;
    }
  }
  return m;
}

}  // namespace

json moments_to_json(const AnyMoments& data) {
  json doc;
  if (const auto* single = std::get_if<MomentData>(&data)) {
    doc["kind"] = "single";
    doc["n_particles"] = single->n_particles;
    doc["mean"] = vector_json(single->mean);
    doc["covariance"] = matrix_json(single->covariance);
    doc["unmeasured"] = unmeasured_pairs(single->unmeasured);
    doc["unmeasured_mean"] = unmeasured_indices(single->unmeasured_mean);
    if (!single->counts.empty()) doc["counts"] = single->counts;
  } else {
    const auto& bi = std::get<BipartiteMomentData>(data);
    doc["kind"] = "bipartite";
    doc["n_A"] = bi.n_A;
    doc["n_B"] = bi.n_B;
    doc["mean_A"] = vector_json(bi.mean_A);
    doc["mean_B"] = vector_json(bi.mean_B);
    doc["covariance"] = matrix_json(bi.covariance);
    doc["unmeasured"] = unmeasured_pairs(bi.unmeasured);
    doc["unmeasured_mean"] = unmeasured_indices(bi.unmeasured_mean);
    if (!bi.counts.empty()) doc["counts"] = bi.counts;
  }
  return doc;
}

AnyMoments moments_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("", "moments document must be a JSON object");
  const json& kind = require(doc, "kind");
  if (!kind.is_string()) throw SchemaError("kind", "expected \"single\" or \"bipartite\"");
  if (kind == "single") {
    reject_unknown(doc, {"kind", "n_particles", "mean", "covariance", "unmeasured", "unmeasured_mean", "counts"});
    MomentData m;
    m.n_particles = number_field(doc, "n_particles");
    m.mean = vector_field<3>(doc, "mean");
    m.unmeasured = pairs_field<3>(doc, "unmeasured");
    m.unmeasured_mean = indices_field<3>(doc, "unmeasured_mean");
    m.covariance = zero_flagged(matrix_field<3>(doc, "covariance"), m.unmeasured);
    m.counts = counts_field(doc);
    m.validate();
    return m;
  }
  if (kind == "bipartite") {
    reject_unknown(doc, {"kind", "n_A", "n_B", "mean_A", "mean_B", "covariance", "unmeasured", "unmeasured_mean",
                         "counts"});
    BipartiteMomentData m;
    m.n_A = number_field(doc, "n_A");
    m.n_B = number_field(doc, "n_B");
    m.mean_A = vector_field<3>(doc, "mean_A");
    m.mean_B = vector_field<3>(doc, "mean_B");
    m.unmeasured = pairs_field<6>(doc, "unmeasured");
    m.unmeasured_mean = indices_field<6>(doc, "unmeasured_mean");
    m.covariance = zero_flagged(matrix_field<6>(doc, "covariance"), m.unmeasured);
    m.counts = counts_field(doc);
    m.validate();
    return m;
  }
  throw SchemaError("kind", "expected \"single\" or \"bipartite\"");
}

void save_moments(const AnyMoments& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << moments_to_json(data).dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

AnyMoments load_moments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", path.string() + ": " + e.what());
  }
  return moments_from_json(doc);
}

// ---------------------------------------------------------------------------
// Shots CSV

namespace {

constexpr std::string_view kShotsHeader = "shot_id,setting,region,n1,n2";

long long parse_integer(const std::string& text, std::size_t line, const char* column) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw SchemaError(column, "line " + std::to_string(line) + ": '" + text + "' is not a decimal integer");
  }
  return value;
}

}  // namespace

std::vector<ShotRecord> parse_shots_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw SchemaError("", "empty shots file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kShotsHeader) {
    throw SchemaError("", "line 1: expected header '" + std::string(kShotsHeader) + "'");
  }
  std::vector<ShotRecord> shots;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) {
      throw SchemaError("", "line " + std::to_string(line_no) + ": expected 5 columns, got " +
                                std::to_string(cells.size()));
    }
    ShotRecord s;
    s.shot_id = parse_integer(cells[0], line_no, "shot_id");
    try {
      s.setting = parse_axis(cells[1]);
    } catch (const InvalidInput& e) {
      throw SchemaError("setting", "line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      s.region = parse_region(cells[2]);
    } catch (const InvalidInput& e) {
      throw SchemaError("region", "line " + std::to_string(line_no) + ": " + e.what());
    }
    s.n1 = parse_integer(cells[3], line_no, "n1");
    s.n2 = parse_integer(cells[4], line_no, "n2");
    if (s.n1 < 0 || s.n2 < 0) throw SchemaError("n1", "line " + std::to_string(line_no) + ": negative count");
    shots.push_back(s);
  }
  return shots;
}

void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots) {
  out << kShotsHeader << '\n';
  for (const auto& s : shots) {
    out << s.shot_id << ',' << axis_label(s.setting) << ',' << region_label(s.region) << ',' << s.n1 << ','
        << s.n2 << '\n';
  }
}

std::vector<ShotRecord> load_shots_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_shots_csv(in);
}

void save_shots_csv(std::span<const ShotRecord> shots, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_shots_csv(out, shots);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace entq
