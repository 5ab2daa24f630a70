// gwk: command-line front end for Galton-Watson branching-process analysis.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwk/report.hpp"

namespace {

using gwk::Json;

enum Exit { kOk = 0, kInvalidInput = 1, kNumerical = 2, kUsage = 3 };

struct Options {
  std::string law_path;
  std::string format = "json";
  std::string out;
  bool renormalize = false;
  int n_max = 200;
  double tol = 1e-9;
  long j_max = 60;
  std::string s_list;
  std::uint64_t seed = 0;
  std::int64_t reps = 100000;
  std::string mode = "closed";
  int steps = 100;
  int i = 1;
  int n = 1;
  unsigned workers = 0;
  bool conditional = false;
  std::string k_trace;
};

/// Output of one subcommand: the JSON document, its CSV/table view, and
/// whether every numerical procedure converged.
struct Result {
  Json doc;
  gwk::Table table;
  bool ok = true;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw CLI::ValidationError(flag, "bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

std::string cell(double x) { return gwk::format_number(x); }

Json head(const gwk::OffspringLaw& law, const gwk::ProcessParams& params) {
  return Json{{"law", gwk::law_json(law)}, {"params", gwk::params_json(params)}};
}

Result run_analyze(const gwk::OffspringLaw& law, const Options& o) {
  gwk::AnalysisOptions a;
  a.n_max = o.n_max;
  a.tol = o.tol;
  a.j_max = o.j_max;
  if (!o.s_list.empty()) a.s_points = parse_list<double>(o.s_list, "--s");
  Result r{gwk::analyze(law, a), {}, true};
  r.ok = r.doc["converged"].get<bool>();
  r.table = gwk::flatten(r.doc);
  return r;
}

Result run_limit(const gwk::OffspringLaw& law, const Options& o) {
  const auto params = gwk::derive_params(law);
  const auto s = o.s_list.empty() ? gwk::default_probe_points(params) : parse_list<double>(o.s_list, "--s");
  const auto limit = gwk::limit_estimate(law, params, s, o.n_max, o.tol);
  Result r{head(law, params), {{"n", "f_n", "r_n", "normalized"}, {}}, limit.converged};
  r.doc["limit"] = gwk::limit_json(limit);
  for (const auto& row : limit.trace.rows) {
    r.table.rows.push_back({std::to_string(row.n), cell(row.f_n), cell(row.r_n), cell(row.normalized)});
  }
  return r;
}

Result run_bounds(const gwk::OffspringLaw& law, const Options& o) {
  const auto params = gwk::derive_params(law);
  Result r{head(law, params), {{"n", "lower", "upper"}, {}}, true};
  r.doc["bounds"] = gwk::bounds_json(gwk::delta_bounds(law, params, o.tol));
  Json steps = Json::array();
  for (int n = 0; n <= 20; ++n) {
    const auto b = gwk::step_bounds(law, params, n);
    steps.push_back(Json{{"n", n}, {"lower", b.lower}, {"upper", b.upper}});
    r.table.rows.push_back({std::to_string(n), cell(b.lower), cell(b.upper)});
  }
  r.doc["step_bounds"] = std::move(steps);
  return r;
}

Result run_invariant(const gwk::OffspringLaw& law, const Options& o) {
  const auto params = gwk::derive_params(law);
  const auto mode = o.mode == "closed" ? gwk::MeasureSource::closed_form : gwk::MeasureSource::empirical;
  const auto m = gwk::pi_measure(law, params, o.j_max, mode, o.n_max, o.tol);
  Result r{head(law, params), {{"j", "nu", "pi"}, {}}, m.converged};
  r.doc["invariant"] = gwk::measure_json(m);
  for (Eigen::Index j = 1; j <= m.pi.size(); ++j) {
    r.table.rows.push_back({std::to_string(j), cell(m.nu[j - 1]), cell(m.pi[j - 1])});
  }
  return r;
}

Result run_qprocess(const gwk::OffspringLaw& law, const Options& o) {
  const auto params = gwk::derive_params(law);
  const auto row = gwk::q_row(law, params, o.i, o.n, o.j_max);
  const auto mom = gwk::qp_moments(params, o.n, o.i);
  Result r{head(law, params), {{"j", "Q_ij"}, {}}, true};
  Json probs = Json::array();
  for (Eigen::Index j = 1; j <= row.probs.size(); ++j) {
    probs.push_back(row.probs[j - 1]);
    r.table.rows.push_back({std::to_string(j), cell(row.probs[j - 1])});
  }
  r.doc["row"] = Json{{"i", o.i}, {"n", o.n}, {"j_max", o.j_max}, {"truncation_loss", row.truncation_loss},
                      {"probs", probs}};
  r.doc["moments"] = Json{{"alpha", mom.alpha},
                          {"mean_W", mom.mean_W},
                          {"mean_W_direct", gwk::qp_mean_direct(law, params, o.n, o.i)}};
  Json path = Json::array();
  for (const auto w : gwk::sample_qprocess(law, params, o.steps, o.seed, 10000, o.i)) path.push_back(w);
  r.doc["path"] = Json{{"seed", o.seed}, {"steps", o.steps}, {"states", path}};
  return r;
}

Result run_simulate(const gwk::OffspringLaw& law, const Options& o) {
  gwk::SimConfig cfg;
  cfg.n = o.n;
  cfg.replicates = o.reps;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  const auto params = gwk::derive_params(law);
  const auto est = o.conditional ? gwk::conditional_on_extinction(law, params, cfg) : gwk::simulate(law, cfg);
  const auto target = o.conditional ? gwk::harris_sevastyanov(law, params.q) : law;
  const auto exact = gwk::iterate_f(target, 0.0, o.n);
  Result r{head(law, params), {}, true};
  r.doc["config"] = Json{{"n", o.n}, {"replicates", o.reps}, {"seed", o.seed}, {"conditional", o.conditional}};
  r.doc["estimate"] = gwk::sim_json(est);
  r.doc["exact"] = Json{{"survival", 1.0 - exact.rows.back().f_n}};
  if (!o.k_trace.empty()) {
    Json trace = Json::array();
    for (const auto& p : gwk::k_from_simulation(law, params, cfg, parse_list<int>(o.k_trace, "--k-trace"))) {
      trace.push_back(Json{{"n", p.n},
                           {"mean_over_survival", p.mean_over_survival},
                           {"mean_over_survival_stderr", p.mean_over_survival_stderr},
                           {"conditional_mean", p.conditional_mean},
                           {"conditional_mean_stderr", p.conditional_mean_stderr},
                           {"survivors", p.survivors}});
    }
    r.doc["k_trace"] = std::move(trace);
  }
  r.table = gwk::flatten(r.doc);
  return r;
}

Result run_verify(const gwk::OffspringLaw& law, const Options& o) {
  gwk::VerifyOptions v;
  v.seed = o.seed;
  v.replicates = o.reps;
  const auto ledger = gwk::verify_suite(law, v);
  Result r{head(law, gwk::derive_params(law)), {{"name", "residual", "threshold", "pass", "status", "note"}, {}},
           gwk::ledger_passed(ledger)};
  r.doc["verify"] = gwk::ledger_json(ledger);
  for (const auto& c : ledger) {
    r.table.rows.push_back({c.name, cell(c.residual), cell(c.threshold), c.status == gwk::CheckStatus::pass ? "true" : "false",
                            std::string(gwk::to_string(c.status)), c.note});
  }
  return r;
}

int exit_for(gwk::ErrorKind kind) {
  switch (kind) {
    case gwk::ErrorKind::NegativeMass:
    case gwk::ErrorKind::MassSumMismatch:
    case gwk::ErrorKind::DegenerateLaw:
    case gwk::ErrorKind::NonFinite:
    case gwk::ErrorKind::Domain:
      return kInvalidInput;
    default:
      return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson branching-process toolkit"};
  app.require_subcommand(1);
  Options o;
  using Runner = Result (*)(const gwk::OffspringLaw&, const Options&);
  std::vector<std::pair<CLI::App*, Runner>> commands;

  auto common = [&](const char* name, const char* help, Runner run) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("law", o.law_path, "law file (JSON)")->required();
    sub->add_option("--format", o.format, "json, csv or table")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->capture_default_str();
    sub->add_option("--out", o.out, "write to this path instead of stdout");
    sub->add_flag("--renormalize", o.renormalize, "rescale masses that do not sum to 1");
    commands.emplace_back(sub, run);
    return sub;
  };
  auto limit_flags = [&](CLI::App* sub) {
    sub->add_option("--n-max", o.n_max, "iteration depth")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--tol", o.tol, "extrapolation tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--s", o.s_list, "comma-separated probe points");
  };

  auto* analyze = common("analyze", "full report", run_analyze);
  limit_flags(analyze);
  analyze->add_option("--j-max", o.j_max, "coefficients of nu and pi")->check(CLI::PositiveNumber)->capture_default_str();

  limit_flags(common("limit", "normalized iterates and extrapolated limits", run_limit));

  auto* bounds = common("bounds", "Delta_1 and Delta_2 bounds on delta", run_bounds);
  bounds->add_option("--tol", o.tol, "tail bound target (default 1e-12)")->check(CLI::PositiveNumber);

  auto* invariant = common("invariant", "invariant measure of the Q-process", run_invariant);
  invariant->add_option("--mode", o.mode, "closed or empirical")
      ->check(CLI::IsMember({"closed", "empirical"}))
      ->capture_default_str();
  invariant->add_option("--j-max", o.j_max, "coefficients kept")->check(CLI::PositiveNumber)->capture_default_str();
  invariant->add_option("--n-max", o.n_max, "series iteration depth (default 400)")->check(CLI::PositiveNumber);
  invariant->add_option("--tol", o.tol, "extrapolation tolerance (default 1e-13)")->check(CLI::PositiveNumber);

  auto* qprocess = common("qprocess", "Q-process row, moments and a sample path", run_qprocess);
  qprocess->add_option("--i", o.i, "initial state")->check(CLI::PositiveNumber)->capture_default_str();
  qprocess->add_option("--n", o.n, "row horizon")->check(CLI::NonNegativeNumber)->capture_default_str();
  qprocess->add_option("--steps", o.steps, "sample path length")->check(CLI::NonNegativeNumber)->capture_default_str();
  qprocess->add_option("--seed", o.seed, "random seed")->capture_default_str();
  qprocess->add_option("--j-max", o.j_max, "row truncation (default 200)")->check(CLI::PositiveNumber);

  auto* simulate = common("simulate", "Monte Carlo estimates against exact iterates", run_simulate);
  simulate->add_option("--n", o.n, "horizon (default 12)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--reps", o.reps, "replicates")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--seed", o.seed, "random seed")->capture_default_str();
  simulate->add_option("--workers", o.workers, "threads, 0 for all cores")->capture_default_str();
  simulate->add_flag("--conditional", o.conditional, "condition on eventual extinction");
  simulate->add_option("--k-trace", o.k_trace, "comma-separated horizons for the simulated 1/K trace");

  auto* verify = common("verify", "run every identity and report a pass/fail ledger", run_verify);
  verify->add_option("--seed", o.seed, "random seed for the simulation checks")->capture_default_str();
  verify->add_option("--reps", o.reps, "replicates for the simulation checks")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kUsage;
  }

  // Per-subcommand defaults that differ from the shared ones.
  if (invariant->parsed()) {
    if (invariant->count("--n-max") == 0) o.n_max = 400;
    if (invariant->count("--tol") == 0) o.tol = 1e-13;
  }
  if (bounds->parsed() && bounds->count("--tol") == 0) o.tol = 1e-12;
  if (qprocess->parsed() && qprocess->count("--j-max") == 0) o.j_max = 200;
  if (simulate->parsed() && simulate->count("--n") == 0) o.n = 12;

  try {
    for (const auto& [sub, run] : commands) {
      if (!sub->parsed()) continue;
      const auto law = gwk::parse_law_file(o.law_path, o.renormalize);
      const auto result = run(law, o);
      const std::string text = o.format == "json"  ? gwk::write_json(result.doc)
                               : o.format == "csv" ? gwk::write_csv(result.table)
                                                   : gwk::write_table(result.table);
      if (o.out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!(f << text)) {
          std::cerr << "gwk: cannot write " << o.out << "\n";
          return kInvalidInput;
        }
      }
      if (!result.ok) {
        std::cerr << "gwk: " << (sub->get_name() == "verify" ? "verification failed" : "did not converge") << "\n";
        return kNumerical;
      }
    }
  } catch (const gwk::InputError& e) {
    std::cerr << "gwk: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const gwk::Error& e) {
    std::cerr << "gwk: " << gwk::to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const CLI::ValidationError& e) {
    std::cerr << "gwk: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
