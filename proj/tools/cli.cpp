#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "entq/bounds.hpp"
#include "entq/error.hpp"
#include "entq/moments.hpp"
#include "entq/simulator.hpp"
#include "entq/verify.hpp"

namespace entq::cli {

using nlohmann::json;

namespace {

enum class Format { Text, Json };

struct Common {
  std::uint64_t seed = 42;
  std::string output;
  Format format = Format::Text;
};

std::string num(double x, int precision = 6) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void write_json_file(const json& doc, const std::string& path) {
  auto f = open_output(path);
  f << doc.dump(2) << '\n';
  if (!f) throw IoError("failed writing '" + path + "'");
}

json shifts_json(const WitnessParams& p) {
  json s = json::array();
  for (double v : p.s) s.push_back(v);
  return s;
}

json bound_json(const BoundResult& r) {
  json j;
  j["value"] = r.value;
  j["t"] = r.params.t ? json(*r.params.t) : json(nullptr);
  j["s"] = shifts_json(r.params);
  j["normalization"] = r.normalization;
  if (r.g_z) j["g_z"] = *r.g_z;
  if (r.g_y) j["g_y"] = *r.g_y;
  if (r.measure == Measure::GR) j["normalization_certified"] = r.diagnostics.normalization_certified;
  j["degenerate"] = r.diagnostics.degenerate;
  return j;
}

std::string t_text(const BoundResult& r) { return r.params.t ? num(*r.params.t) : std::string("n/a"); }

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void emit(const json& report, const std::string& text, const Common& common, std::ostream& out) {
  if (!common.output.empty()) write_json_file(report, common.output);
  if (common.format == Format::Json) {
    out << report.dump(2) << '\n';
  } else {
    out << text;
  }
}

// ---------------------------------------------------------------------------
// wineland

struct WinelandArgs {
  std::optional<double> n;
  std::optional<double> var_jz;
  std::optional<double> contrast;
  std::string moments;
};

int cmd_wineland(const WinelandArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  MomentData data;
  if (!a.moments.empty()) {
    if (a.n || a.var_jz || a.contrast) throw InvalidInput("give either --moments or --n/--var-jz/--contrast, not both");
    auto loaded = load_moments(a.moments);
    if (!std::holds_alternative<MomentData>(loaded)) {
      throw InvalidInput("wineland needs single-ensemble moments, got a bipartite file");
    }
    data = std::get<MomentData>(loaded);
  } else {
    if (!a.n || !a.var_jz || !a.contrast) throw InvalidInput("--n, --var-jz and --contrast are all required");
    data = wineland_moments(*a.n, *a.var_jz, *a.contrast);
  }
  print_warnings(data.validate(), err);
  const double var = data.variance(Axis::Z);
  const double jx = data.mean_of(Axis::X);
  const auto wb = wineland_bounds(data);
  const bool certified = wb.bsa.value > 0.0 || wb.gr.value > 0.0;

  json report;
  report["command"] = "wineland";
  report["n_particles"] = data.n_particles;
  report["var_jz"] = var;
  report["mean_jx"] = jx;
  report["contrast"] = wb.degenerate ? 0.0 : wb.squeezing.contrast;
  report["xi2"] = wb.squeezing.xi2;
  report["xi2_db"] = wb.squeezing.db;
  report["degenerate"] = wb.degenerate;
  report["bsa"] = bound_json(wb.bsa);
  report["gr"] = bound_json(wb.gr);
  report["gr_first_order"] = wb.gr_first_order;
  report["entanglement_certified"] = certified;

  std::ostringstream text;
  text << "N                 " << num(data.n_particles) << '\n';
  text << "Var(J_z)          " << num(var) << '\n';
  text << "<J_x>             " << num(jx) << '\n';
  if (wb.degenerate) {
    text << "<J_x> = 0: Wineland criterion is degenerate\n";
  } else {
    text << "contrast C        " << num(wb.squeezing.contrast) << '\n';
    text << "xi^2              " << num(wb.squeezing.xi2) << " (" << num(wb.squeezing.db, 4) << " dB)\n";
  }
  text << "BSA bound         " << num(wb.bsa.value) << "  (t = " << t_text(wb.bsa) << ")\n";
  text << "GR bound          " << num(wb.gr.value) << "  (t = " << t_text(wb.gr) << ")\n";
  text << "GR first order    " << num(wb.gr_first_order) << '\n';
  if (!certified) text << "no entanglement certified\n";
  if (certified && !wb.gr.diagnostics.normalization_certified) {
    text << "note: <J_z> is off the spectral center; W/m_t is not certified to lie in M_GR (shifted normalization "
         << num(wb.gr.diagnostics.shifted_normalization) << ")\n";
  }
  emit(report, text.str(), common, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// giovannetti

struct GiovannettiArgs {
  std::string moments;
  GiovannettiOptions opts;
};

int cmd_giovannetti(const GiovannettiArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  auto loaded = load_moments(a.moments);
  if (!std::holds_alternative<BipartiteMomentData>(loaded)) {
    throw InvalidInput("giovannetti needs bipartite moments, got a single-ensemble file");
  }
  const auto& data = std::get<BipartiteMomentData>(loaded);
  print_warnings(data.validate(), err);
  const auto gb = giovannetti_bounds(data, a.opts);
  const bool certified = gb.bsa.value > 0.0 || gb.gr.value > 0.0;

  json report;
  report["command"] = "giovannetti";
  report["n_A"] = data.n_A;
  report["n_B"] = data.n_B;
  report["g2_min"] = gb.g2_min;
  report["g2_g_z"] = gb.g2_g_z;
  report["g2_g_y"] = gb.g2_g_y;
  report["bsa"] = bound_json(gb.bsa);
  report["gr"] = bound_json(gb.gr);
  report["entanglement_certified"] = certified;

  std::ostringstream text;
  text << "min G^2           " << num(gb.g2_min) << "  (g_z = " << num(gb.g2_g_z) << ", g_y = " << num(gb.g2_g_y)
       << ")\n";
  text << "BSA bound         " << num(gb.bsa.value) << "  (g_z = " << num(gb.bsa.g_z.value_or(0.0))
       << ", g_y = " << num(gb.bsa.g_y.value_or(0.0)) << ", t = " << t_text(gb.bsa) << ")\n";
  text << "GR bound          " << num(gb.gr.value) << "  (g_z = " << num(gb.gr.g_z.value_or(0.0))
       << ", g_y = " << num(gb.gr.g_y.value_or(0.0)) << ", t = " << t_text(gb.gr) << ")\n";
  if (!certified) text << "no entanglement certified\n";
  emit(report, text.str(), common, out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const std::string& input, const Common& common, std::ostream& out, std::ostream& err) {
  const auto shots = load_shots_csv(input);
  bool bipartite = false;
  for (const auto& s : shots) bipartite = bipartite || s.region != Region::All;
  AnyMoments data;
  if (bipartite) {
    data = estimate_bipartite_moments(shots);
  } else {
    data = estimate_moments(shots);
  }
  std::visit([&](const auto& d) { print_warnings(d.validate(), err); }, data);
  if (common.output.empty()) {
    out << moments_to_json(data).dump(2) << '\n';
    return kSuccess;
  }
  save_moments(data, common.output);
  if (common.format == Format::Json) {
    out << moments_to_json(data).dump(2) << '\n';
  } else {
    out << "estimated " << (bipartite ? "bipartite" : "single-ensemble") << " moments from " << shots.size()
        << " shot records -> " << common.output << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int n = 0;
  double mu = 0.0;
  int shots = 1000;
  double sigma = 0.0;
  std::optional<double> split;
  bool no_rotate = false;
  std::string moments;
};

int cmd_simulate(const SimulateArgs& a, const Common& common, std::ostream& out, std::ostream&) {
  if (!std::isfinite(a.mu)) throw InvalidInput("--mu must be finite");
  auto state = oat_evolve(css_x(a.n), a.mu);
  double theta = 0.0;
  if (!a.no_rotate) {
    theta = optimal_squeezing_rotation(state);
    state = rotate_x(state, theta);
  }
  const auto exact = exact_moments(state);
  AnyMoments moments = exact;
  std::vector<ShotRecord> shots;
  if (a.split) {
    const auto split = split_moments(exact, a.n, {*a.split});
    moments = split;
    shots = sample_shots(split, {}, a.shots, common.seed, a.sigma);
  } else {
    shots = sample_shots(state, {}, a.shots, common.seed, a.sigma);
  }
  if (!a.moments.empty()) save_moments(moments, a.moments);
  if (common.output.empty()) {
    write_shots_csv(out, shots);
    return kSuccess;
  }
  save_shots_csv(shots, common.output);
  if (common.format == Format::Json) {
    json report;
    report["command"] = "simulate";
    report["n_particles"] = a.n;
    report["mu"] = a.mu;
    report["theta"] = theta;
    report["shot_records"] = shots.size();
    report["shots_csv"] = common.output;
    report["moments"] = moments_to_json(moments);
    out << report.dump(2) << '\n';
  } else {
    out << "simulated N = " << a.n << ", mu = " << num(a.mu) << ", theta = " << num(theta) << ": " << shots.size()
        << " shot records -> " << common.output << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::vector<int> n{100, 476, 1000};
  double db_min = -12.0;
  double db_max = 0.0;
  double db_step = 0.5;
  double contrast = 0.98;
  int workers = 0;
};

int cmd_sweep(const SweepArgs& a, const Common& common, std::ostream& out, std::ostream&) {
  const int workers = a.workers > 0 ? a.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = sweep(a.n, db_grid(a.db_min, a.db_max, a.db_step), a.contrast, workers);
  if (!common.output.empty()) {
    auto f = open_output(common.output);
    write_sweep_csv(f, rows);
    if (!f) throw IoError("failed writing '" + common.output + "'");
  }
  if (common.format == Format::Json) {
    json doc = json::array();
    for (const auto& r : rows) {
      doc.push_back({{"N", r.n_particles}, {"xi2_db", r.xi2_db}, {"bsa_bound", r.bsa_bound}, {"gr_bound", r.gr_bound}});
    }
    out << doc.dump(2) << '\n';
  } else if (common.output.empty()) {
    write_sweep_csv(out, rows);
  } else {
    out << rows.size() << " rows -> " << common.output << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(verify::SuiteOptions opts, const Common& common, std::ostream& out, std::ostream& err) {
  opts.seed = common.seed;
  const auto results = verify::run_suite(opts);
  const verify::CheckResult* first_failure = nullptr;
  for (const auto& r : results) {
    if (!r.passed && first_failure == nullptr) first_failure = &r;
  }
  json report;
  report["command"] = "verify";
  report["seed"] = common.seed;
  report["passed"] = first_failure == nullptr;
  report["checks"] = json::array();
  std::ostringstream text;
  for (const auto& r : results) {
    report["checks"].push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    text << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  " << r.detail << '\n';
  }
  if (first_failure == nullptr) {
    text << "all " << results.size() << " checks passed\n";
  } else {
    report["first_failure"] = first_failure->name;
  }
  emit(report, text.str(), common, out);
  if (first_failure != nullptr) {
    err << "verification failed: " << first_failure->name << '\n';
    return kVerificationFailed;
  }
  return kSuccess;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> db_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || !(hi >= lo)) {
    throw InvalidInput("dB grid needs finite lo <= hi and step > 0");
  }
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 1000000) throw InvalidInput("dB grid too large");
  std::vector<double> out;
  for (long long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::vector<SweepRow> sweep(const std::vector<int>& n_values, const std::vector<double>& db_values, double contrast,
                            int workers) {
  if (n_values.empty() || db_values.empty()) throw InvalidInput("sweep grid is empty");
  for (int n : n_values) {
    if (n < 1) throw InvalidInput("sweep particle numbers must be positive");
  }
  std::vector<SweepRow> rows;
  for (int n : n_values) {
    for (double db : db_values) rows.push_back({n, db, 0.0, 0.0});
  }
  // Validate once up front so workers only see well-formed inputs.
  (void)wineland_moments_from_xi2(n_values.front(), std::pow(10.0, db_values.front() / 10.0), contrast);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      auto& row = rows[i];
      const auto m = wineland_moments_from_xi2(row.n_particles, std::pow(10.0, row.xi2_db / 10.0), contrast);
      const auto wb = wineland_bounds(m);
      row.bsa_bound = wb.bsa.value;
      row.gr_bound = wb.gr.value;
    }
  };
  const int pool_size = std::clamp(workers, 1, static_cast<int>(rows.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < pool_size; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "N,xi2_db,bsa_bound,gr_bound\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.n_particles << ',' << r.xi2_db << ',' << r.bsa_bound << ',' << r.gr_bound << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified lower bounds on entanglement (best separable approximation and generalized robustness) "
               "from collective-spin moments.\nSqueezing in dB is 10*log10(xi^2)."};
  app.name("entq");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::string format = "text";
  app.add_option("--seed", common.seed, "Random seed (simulate, verify)")->capture_default_str();
  app.add_option("--output", common.output, "Output file (JSON report, CSV or moments depending on the command)");
  app.add_option("--format", format, "Report format on stdout")->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  WinelandArgs wa;
  auto* wineland = app.add_subcommand("wineland", "Bounds from the Wineland spin-squeezing parameter "
                                                  "xi^2 = N Var(J_z)/<J_x>^2 (dB = 10*log10(xi^2))");
  wineland->add_option("--n", wa.n, "Particle number N");
  wineland->add_option("--var-jz", wa.var_jz, "Var(J_z)");
  wineland->add_option("--contrast", wa.contrast, "Contrast C = <J_x>/(N/2)");
  wineland->add_option("--moments", wa.moments, "Single-ensemble moments JSON instead of the flags");

  GiovannettiArgs ga;
  auto* giovannetti = app.add_subcommand("giovannetti", "Bounds from the two-ensemble criterion, optimized over gains");
  giovannetti->add_option("--moments", ga.moments, "Bipartite moments JSON")->required();
  giovannetti->add_option("--grid", ga.opts.grid, "Start magnitudes per gain (both signs are used)")
      ->capture_default_str();
  giovannetti->add_option("--g-min", ga.opts.g_min, "Smallest start gain magnitude")->capture_default_str();
  giovannetti->add_option("--g-max", ga.opts.g_max, "Largest start gain magnitude")->capture_default_str();
  giovannetti->add_option("--max-iterations", ga.opts.max_iterations, "Nelder-Mead iterations per start")
      ->capture_default_str();

  std::string estimate_input;
  auto* estimate = app.add_subcommand("estimate", "Moments JSON from a shots CSV");
  estimate->add_option("input", estimate_input, "Shots CSV (shot_id,setting,region,n1,n2)")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Sample shots from a one-axis-twisted coherent spin state");
  simulate->add_option("--n", sa.n, "Particle number N")->required()->check(CLI::Range(1, 1000000));
  simulate->add_option("--mu", sa.mu, "Twisting strength mu in exp(-i mu J_z^2)")->capture_default_str();
  simulate->add_option("--shots", sa.shots, "Shots per measured axis")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  simulate->add_option("--sigma", sa.sigma, "Detection noise (atoms, per count)")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  simulate->add_option("--split", sa.split, "Split into regions A/B with probability p per atom");
  simulate->add_flag("--no-rotate", sa.no_rotate, "Skip the rotation that minimizes Var(J_z)");
  simulate->add_option("--moments", sa.moments, "Also write the exact moments JSON here");

  SweepArgs swa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Wineland bounds over a grid of N and xi^2 in dB (10*log10(xi^2))");
  sweep_cmd->add_option("--n", swa.n, "Particle numbers")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--db-min", swa.db_min, "Smallest xi^2 in dB")->capture_default_str();
  sweep_cmd->add_option("--db-max", swa.db_max, "Largest xi^2 in dB")->capture_default_str();
  sweep_cmd->add_option("--db-step", swa.db_step, "Grid step in dB")->capture_default_str();
  sweep_cmd->add_option("--contrast", swa.contrast, "Contrast C")->capture_default_str();
  sweep_cmd->add_option("--workers", swa.workers, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  verify::SuiteOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "Run the small-dimension oracle suite");
  verify_cmd->add_option("--product-starts", vo.product_starts, "Product-state starts per witness")
      ->capture_default_str()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--sandwich-states", vo.sandwich_states, "Random two-qubit states")
      ->capture_default_str()->check(CLI::NonNegativeNumber);

  std::vector<std::string> argv_storage{"entq"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return kSuccess;
    }
    err << "error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << "run 'entq --help' for usage\n";
    return kInvalidInput;
  }
  common.format = format == "json" ? Format::Json : Format::Text;

  try {
    if (wineland->parsed()) return cmd_wineland(wa, common, out, err);
    if (giovannetti->parsed()) return cmd_giovannetti(ga, common, out, err);
    if (estimate->parsed()) return cmd_estimate(estimate_input, common, out, err);
    if (simulate->parsed()) return cmd_simulate(sa, common, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(swa, common, out, err);
    if (verify_cmd->parsed()) return cmd_verify(vo, common, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DegenerateCriterion& e) {
    err << "degenerate criterion: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kVerificationFailed;
  }
  err << "error: no command given\n";
  return kInvalidInput;
}

}  // namespace entq::cli
