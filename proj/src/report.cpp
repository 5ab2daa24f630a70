#include "gwk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "gwk/iterate.hpp"

namespace gwk {

// ---------------------------------------------------------------- law files

namespace {

double finite_number(const Json& v, const std::string& field) {
  if (!v.is_number()) throw InputError(InputError::Kind::parse, "field \"" + field + "\": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(InputError::Kind::parse, "field \"" + field + "\": number is not finite");
  return x;
}

void reject_unknown_keys(const Json& doc, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError(InputError::Kind::parse, "field \"" + key + "\": not part of the law format");
    }
  }
}

}  // namespace

OffspringLaw parse_law_text(std::string_view text, bool renormalize) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw InputError(InputError::Kind::parse, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError(InputError::Kind::parse, "law file must hold a JSON object");
  if (!doc.contains("type") || !doc["type"].is_string()) {
    throw InputError(InputError::Kind::parse, "field \"type\": expected \"pmf\" or \"linear_fractional\"");
  }
  const auto type = doc["type"].get<std::string>();
  std::string fields;
  try {
    if (type == "pmf") {
      reject_unknown_keys(doc, {"type", "p"});
      fields = "p";
      if (!doc.contains("p") || !doc["p"].is_array()) {
        throw InputError(InputError::Kind::parse, "field \"p\": expected an array of masses");
      }
      std::vector<double> p;
      for (std::size_t k = 0; k < doc["p"].size(); ++k) {
        p.push_back(finite_number(doc["p"][k], "p[" + std::to_string(k) + "]"));
      }
      return OffspringLaw::pmf(std::move(p), renormalize);
    }
    if (type == "linear_fractional") {
      reject_unknown_keys(doc, {"type", "b", "c"});
      fields = "b, c";
      for (const char* key : {"b", "c"}) {
        if (!doc.contains(key)) throw InputError(InputError::Kind::parse, std::string("field \"") + key + "\": missing");
      }
      return OffspringLaw::linear_fractional(finite_number(doc["b"], "b"), finite_number(doc["c"], "c"));
    }
  } catch (const ValidationError& e) {
    std::string msg = "invalid law (field " + fields + "):";
    for (const auto& v : e.violations()) msg += "\n  " + std::string(to_string(v.kind)) + ": " + v.detail;
    throw InputError(InputError::Kind::validation, msg);
  }
  throw InputError(InputError::Kind::parse, "field \"type\": unknown law type \"" + type + "\"");
}

OffspringLaw parse_law_file(const std::string& path, bool renormalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputError::Kind::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw InputError(InputError::Kind::io, "cannot read " + path);
  try {
    return parse_law_text(buf.str(), renormalize);
  } catch (const InputError& e) {
    throw InputError(e.kind(), path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- output

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) return "0";  // "-0" would read back as the integer 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void emit(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (std::all_of(j.begin(), j.end(), is_scalar)) {
        out += '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit(j[k], out, depth + 1);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        out += pad;
        emit(j[k], out, depth + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t k = 0;
      for (const auto& [key, value] : j.items()) {
        out += pad + Json(key).dump() + ": ";
        emit(value, out, depth + 1);
        out += ++k < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

}  // namespace

std::string write_json(const Json& doc) {
  std::string out;
  emit(doc, out, 0);
  out += '\n';
  return out;
}

Json law_json(const OffspringLaw& law) {
  Json j;
  if (law.is_linear_fractional()) {
    j["type"] = "linear_fractional";
    j["b"] = law.lf_b();
    j["c"] = law.lf_c();
    j["truncation_order"] = law.truncation_order();
  } else {
    j["type"] = "pmf";
  }
  Json p = Json::array();
  for (const double x : law.masses()) p.push_back(x);
  j["p"] = std::move(p);
  return j;
}

Json params_json(const ProcessParams& params) {
  return Json{{"m", params.m},
              {"q", params.q},
              {"beta", params.beta},
              {"b_q", params.b_q},
              {"gamma", params.gamma},
              {"gamma_q", params.gamma_q},
              {"delta_theory", params.delta_theory},
              {"K_theory", params.K_theory},
              {"criticality", params.criticality == Criticality::subcritical ? "subcritical" : "supercritical"}};
}

Json limit_json(const LimitEstimate& limit, bool with_trace) {
  Json points = Json::array();
  for (const auto& p : limit.points) {
    points.push_back(Json{{"s", p.s},
                          {"a_hat", p.a_hat},
                          {"delta_hat", p.delta_hat},
                          {"n_used", p.n_used},
                          {"converged", p.converged}});
  }
  Json j{{"K_hat", limit.K_hat}, {"n_used", limit.n_used}, {"converged", limit.converged}, {"points", points}};
  if (with_trace) {
    Json trace = Json::array();
    for (const auto& r : limit.trace.rows) {
      trace.push_back(Json{{"n", r.n}, {"f_n", r.f_n}, {"r_n", r.r_n}, {"normalized", r.normalized}});
    }
    j["trace"] = std::move(trace);
  }
  return j;
}

Json bounds_json(const BoundsReport& bounds) {
  return Json{{"delta1", bounds.delta1},
              {"delta2", bounds.delta2},
              {"delta2_infinite", bounds.delta2_infinite},
              {"terms_used", bounds.terms_used},
              {"tail_bound", bounds.tail_bound}};
}

Json measure_json(const InvariantMeasure& measure) {
  double mean = 0.0;
  for (Eigen::Index j = 0; j < measure.pi.size(); ++j) mean += static_cast<double>(j + 1) * measure.pi[j];
  return Json{{"source", measure.source == MeasureSource::closed_form ? "closed_form" : "empirical"},
              {"j_max", measure.pi.size()},
              {"residual_l1", measure.residual_l1},
              {"tail", measure.tail},
              {"mean", mean},
              {"n_used", measure.n_used},
              {"converged", measure.converged},
              {"nu", vector_json(measure.nu)},
              {"pi", vector_json(measure.pi)}};
}

Json sim_json(const SimEstimate& est) {
  Json hist = Json::array();
  for (const auto c : est.extinction_time_histogram) hist.push_back(c);
  return Json{{"survival_hat", est.survival_hat},
              {"survival_stderr", est.survival_stderr},
              {"conditional_mean_hat", est.conditional_mean_hat},
              {"conditional_mean_stderr", est.conditional_mean_stderr},
              {"survivors", est.survivors},
              {"replicates", est.replicates},
              {"capped", est.capped},
              {"extinction_time_histogram", hist}};
}

Discrepancy discrepancy(const OffspringLaw& law, const ProcessParams& params, const LimitEstimate& limit) {
  const double gap = std::abs(params.K_theory - limit.K_hat);
  return {params.K_theory, limit.K_hat, gap, gap / std::abs(params.K_theory), law.is_linear_fractional()};
}

Json analyze(const OffspringLaw& law, const AnalysisOptions& opts) {
  const auto params = derive_params(law);
  const auto s_points = opts.s_points ? *opts.s_points : default_probe_points(params);
  const auto limit = limit_estimate(law, params, s_points, opts.n_max, opts.tol);
  const auto closed = pi_measure(law, params, opts.j_max, MeasureSource::closed_form);
  const auto empirical = pi_measure(law, params, opts.j_max, MeasureSource::empirical);
  const auto yaglom = yaglom_conditional(law, params, opts.j_max);
  const auto p11 = p11_check(law, params, opts.n_max);
  const auto gap = discrepancy(law, params, limit);

  auto summary = [](const InvariantMeasure& m) {
    Json j = measure_json(m);
    j.erase("nu");
    Json head = Json::array();
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(10, m.pi.size()); ++k) head.push_back(m.pi[k]);
    j["pi"] = std::move(head);
    return j;
  };

  Json doc;
  doc["law"] = law_json(law);
  doc["params"] = params_json(params);
  doc["limit"] = limit_json(limit);
  doc["bounds"] = bounds_json(delta_bounds(law, params));
  doc["invariant"] = Json{{"closed_form", summary(closed)}, {"empirical", summary(empirical)}};
  doc["yaglom"] = Json{{"mu", yaglom.mu},
                       {"implied_K", yaglom.implied_K},
                       {"unnormalized_mass", yaglom.unnormalized_mass},
                       {"converged", yaglom.converged}};
  doc["p11"] = Json{{"empirical_limit", p11.empirical_limit},
                    {"theory", p11.theory},
                    {"discrepancy", p11.discrepancy},
                    {"a_hat_derivative", p11.a_hat_derivative},
                    {"p11_at_n_max", p11.p11_at_n_max},
                    {"n_used", p11.n_used},
                    {"converged", p11.converged},
                    {"degenerate_zero", p11.degenerate_zero},
                    {"limit_claimed", p11.limit_claimed}};
  doc["discrepancy"] = Json{{"K_theory", gap.K_theory},
                            {"K_hat", gap.K_hat},
                            {"abs_gap", gap.abs_gap},
                            {"rel_gap", gap.rel_gap},
                            {"lf_exact", gap.lf_exact}};
  doc["converged"] = limit.converged && empirical.converged && yaglom.converged && p11.converged;
  return doc;
}

// ---------------------------------------------------------------- verify

std::string_view to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::report: return "report";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Ledger {
 public:
  explicit Ledger(bool lf) : lf_(lf) {}

  void check(std::string name, double residual, double threshold, std::string note = {}) {
    const bool ok = std::isfinite(residual) && residual <= threshold;
    out_.push_back({std::move(name), residual, threshold, ok ? CheckStatus::pass : CheckStatus::fail, false,
                    std::move(note)});
  }
  void lf_check(std::string name, const std::function<double()>& residual, double threshold) {
    if (!lf_) {
      out_.push_back({std::move(name), kInf, threshold, CheckStatus::skipped, true, "law is not linear-fractional"});
      return;
    }
    check(std::move(name), residual(), threshold);
    out_.back().lf_only = true;
  }
  void skip(std::string name, double threshold, std::string why) {
    out_.push_back({std::move(name), kInf, threshold, CheckStatus::skipped, false, std::move(why)});
  }
  void report(std::string name, double value, std::string note) {
    out_.push_back({std::move(name), value, kInf, CheckStatus::report, false, std::move(note)});
  }
  /// Runs `body`, recording a failure instead of propagating library errors.
  void guarded(const std::string& name, double threshold, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      out_.push_back({name, kInf, threshold, CheckStatus::fail, false, std::string(to_string(e.kind())) + ": " + e.what()});
    }
  }

  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  bool lf_;
  std::vector<CheckResult> out_;
};

/// Smallest j_max in [60, 400] whose closed-form pi misses less than 1e-10.
Eigen::Index adaptive_j_max(const ProcessParams& params) {
  const double x = params.q * params.gamma;
  const double c = 1.0 + x;
  double term = 1.0 / (c * c), sum = 0.0;
  Eigen::Index j = 1;
  for (; j <= 400; ++j, term *= x / c) {
    sum += static_cast<double>(j) * term;
    if (j >= 60 && 1.0 - sum < 1e-10) break;
  }
  return std::min<Eigen::Index>(j, 400);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Largest violation of the per-step sandwich along the orbit of s in [0, q).
double step_sandwich_violation(const OffspringLaw& law, const ProcessParams& params, double s, int n_max) {
  const CenteredMap g(law, params.fixed_point());
  double r = params.q - s;
  double worst = 0.0;
  for (int n = 0; n < n_max && std::abs(r) > 1e-200; ++n) {
    const double r_next = g(r);
    if (r_next == 0.0) break;
    const double mid = g.remainder(r) / (r * r_next);
    const auto b = step_bounds(law, params, n);
    const double scale = std::max(1.0, std::abs(mid));
    worst = std::max(worst, (b.lower - mid) / scale);
    if (std::isfinite(b.upper)) worst = std::max(worst, (mid - b.upper) / scale);
    r = r_next;
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> verify_suite(const OffspringLaw& law, const VerifyOptions& opts) {
  const auto params = derive_params(law);  // CriticalLaw propagates to the caller
  const auto fp = params.fixed_point();
  const double q = params.q;
  Ledger L(law.is_linear_fractional());
  const Eigen::Index j_max = adaptive_j_max(params);
  const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  auto probes = default_probe_points(params);
  std::vector<double> inner;  // probes in [0, q)
  std::copy_if(probes.begin(), probes.end(), std::back_inserter(inner), [q](double s) { return s < q; });

  // Generating function and fixed point.
  L.check("gf_normalization", std::abs(gf_eval(law, 1.0).value - 1.0), 1e-12);
  L.check("fixed_point", std::abs(gf_eval(law, q).value - q), 1e-12);
  const auto dual = harris_sevastyanov(law, q);
  L.check("dual_mean_equals_beta", std::abs(gf_eval(dual, 1.0).first - params.beta), 1e-12);
  L.check("k_theory_equals_a_gamma", std::abs(params.K_theory - a_gamma(params, 0.0)), 0.0, "bitwise");
  if (q == 1.0) {
    L.check("k_q1_specialization", std::abs(params.K_theory - subcritical_k(moments(law))), 0.0, "bitwise");
  } else {
    L.skip("k_q1_specialization", 0.0, "q < 1");
  }

  // Iteration.
  {
    double worst = 0.0;
    for (const double s : inner) worst = std::max(worst, step_sandwich_violation(law, params, s, 60));
    L.check("step_sandwich", worst, 1e-9, "n < 60, probes in [0, q)");
  }
  {
    double worst = 0.0;
    for (const double s : inner) {
      const auto tr = iterate_f(law, s, 60, fp);
      for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        const double prev = tr.rows[k - 1].normalized, cur = tr.rows[k].normalized;
        if (std::isfinite(prev) && std::isfinite(cur)) worst = std::max(worst, (prev - cur) / cur);
      }
    }
    L.check("normalized_trace_monotone", worst, 1e-12, "largest relative decrease of beta^n/R_n(s)");
  }

  // Limits and bounds.
  const auto limit = limit_estimate(law, params, probes, 400, 1e-12);
  const auto bounds = delta_bounds(law, params);
  {
    double worst = 0.0;
    for (const auto& p : limit.points) {
      const double scale = std::max(1.0, std::abs(p.delta_hat));
      worst = std::max(worst, (bounds.delta1 - p.delta_hat) / scale);
      if (!bounds.delta2_infinite) worst = std::max(worst, (p.delta_hat - bounds.delta2) / scale);
    }
    L.check("delta_sandwich", worst, 1e-8, bounds.delta2_infinite ? "upper bound infinite (p_1 = 0)" : "");
  }
  L.check("limit_converged", limit.converged ? 0.0 : kInf, 0.0);
  L.guarded("hs_conjugacy", 2e-3, [&] {
    const auto dual_params = derive_params(dual);
    const auto dual_limit = limit_estimate(dual, dual_params, {0.0}, 400, 1e-12);
    L.check("hs_conjugacy", std::abs(limit.K_hat - q * dual_limit.K_hat) / limit.K_hat, 2e-3, "K_hat vs q K_hat(dual)");
  });
  {
    const auto gap = discrepancy(law, params, limit);
    L.report("k_gap_relative", gap.rel_gap,
             "K_theory " + format_number(gap.K_theory) + " vs K_hat " + format_number(gap.K_hat));
  }
  {
    double spread = 0.0;
    for (const auto& p : limit.points) {
      if (p.s < q) spread = std::max(spread, std::abs(p.delta_hat - limit.points.front().delta_hat));
    }
    double r5 = 0.0, r30 = 0.0;
    for (const double s : {0.0, 0.2, 0.4, 0.6, 0.8}) {
      r5 = std::max(r5, schroder_property_residual(law, params, s, 5));
      r30 = std::max(r30, schroder_property_residual(law, params, s, 30));
    }
    if (spread < 1e-6) {
      L.check("schroder_property_decay", r30, std::max(r5, 1e-12), "residual at n=30 against n=5");
    } else {
      L.report("schroder_property_decay", r30, "delta_hat varies with s, residual at n=30 reported");
    }
  }

  // Q-process.
  L.guarded("q_row_sums", 1e-9, [&] {
    double worst = 0.0;
    for (int i = 1; i <= 3; ++i) {
      for (int n = 1; n <= 10; ++n) worst = std::max(worst, std::abs(q_row(law, params, i, n, 400).probs.sum() - 1.0));
    }
    L.check("q_row_sums", worst, 1e-9);
  });
  {
    double ew = 0.0, w1 = 0.0, rec = 0.0;
    for (int i = 1; i <= 3; ++i) {
      for (int n = 0; n <= 30; ++n) {
        ew = std::max(ew, rel(qp_mean_direct(law, params, n, i), qp_moments(params, n, i).mean_W));
        if (n >= 1) w1 = std::max(w1, std::abs(w_eval(law, params, 1.0, n, i) - 1.0));
        if (n <= 10) {
          for (const double s : grid) rec = std::max(rec, w_recursion_residual(law, params, s, n, i));
        }
      }
    }
    L.check("mean_w_identity", ew, 1e-11, "i <= 3, n <= 30");
    L.check("w_normalization", w1, 1e-11);
    L.check("w_recursion", rec, 1e-10, "s in 0.1..0.9, n <= 10, i <= 3");
  }
  L.guarded("chapman_kolmogorov", 1e-8, [&] {
    constexpr Eigen::Index kJ = 12;
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
      // Q_kj(m) for j <= 12 needs only the first 12 coefficients of the dual iterate.
      const Series g = iterate_series(dual, m, kJ);
      const double bm = std::pow(params.beta, m);
      std::vector<Eigen::VectorXd> rows;
      Series gk = g;
      for (Eigen::Index k = 1; k <= 400; ++k) {
        Eigen::VectorXd r(kJ);
        for (Eigen::Index j = 1; j <= kJ; ++j) r[j - 1] = static_cast<double>(j) * gk[j] / (static_cast<double>(k) * bm);
        rows.push_back(r);
        gk = multiply(gk, g);
      }
      for (int i = 1; i <= 3; ++i) {
        for (int n = 1; n <= 3; ++n) {
          const auto left = q_row(law, params, i, n, 400);
          Eigen::VectorXd composed = Eigen::VectorXd::Zero(kJ);
          for (Eigen::Index k = 1; k <= 400; ++k) composed += left.probs[k - 1] * rows[static_cast<std::size_t>(k - 1)];
          const auto direct = q_row(law, params, i, n + m, 400);
          worst = std::max(worst, (composed - direct.probs.head(kJ)).cwiseAbs().maxCoeff());
        }
      }
    }
    L.check("chapman_kolmogorov", worst, 1e-8, "i, n, m <= 3, j <= 12");
  });
  L.guarded("ratio_convergence", 0.0, [&] {
    double early = 0.0, late = 0.0;
    const auto r1_5 = q_row(law, params, 1, 5, 400), r1_40 = q_row(law, params, 1, 40, 400);
    for (int i = 2; i <= 3; ++i) {
      const auto a = q_row(law, params, i, 5, 400), b = q_row(law, params, i, 40, 400);
      for (Eigen::Index j = 1; j <= 4; ++j) {
        if (r1_5.at(j) > 0.0 && r1_40.at(j) > 0.0) {
          early = std::max(early, std::abs(a.at(j) / r1_5.at(j) - 1.0));
          late = std::max(late, std::abs(b.at(j) / r1_40.at(j) - 1.0));
        }
      }
    }
    L.check("ratio_convergence", late, std::max(early, 1e-12), "|Q_ij/Q_1j - 1| at n=40 against n=5");
  });

  // Invariant measure.
  const auto closed = pi_measure(law, params, j_max, MeasureSource::closed_form);
  const auto empirical = pi_measure(law, params, j_max, MeasureSource::empirical);
  const std::string at_j = "j_max " + std::to_string(j_max);
  L.check("closed_pi_mass", std::abs(closed.tail), 1e-9, at_j);
  L.check("empirical_pi_invariance", empirical.converged ? empirical.residual_l1 : kInf, 1e-6, at_j);
  {
    double worst = 0.0;
    for (const auto* m : {&closed, &empirical}) {
      double qp = 1.0;
      for (Eigen::Index j = 1; j <= j_max; ++j, qp *= q) {
        worst = std::max(worst, std::abs(m->pi[j - 1] - static_cast<double>(j) * qp * m->nu[j - 1]));
      }
    }
    L.check("pi_nu_relation", worst, 1e-12);
  }
  {
    double worst = 0.0;
    for (const auto& r : schroder_residual(law, params, empirical, grid)) worst = std::max(worst, r.empirical);
    L.check("empirical_pi_functional_equation", worst, 1e-8, "s in 0.1..0.9");
  }
  {
    const auto yaglom = yaglom_conditional(law, params, j_max);
    L.check("yaglom_implied_k", yaglom.converged ? std::abs(yaglom.implied_K - limit.K_hat) / limit.K_hat : kInf, 1e-6,
            "q / mean of the conditional limit law against K_hat");
  }
  const auto p11 = p11_check(law, params, 400, 1e-12);
  if (p11.degenerate_zero) {
    L.check("p11_degenerate", std::abs(p11.empirical_limit), 0.0, "p_1 = 0, limit is exactly 0");
  } else {
    L.report("p11_discrepancy", p11.discrepancy, "beta^-n P_11(n) limit minus K_theory^2/q^2");
  }

  // Linear-fractional exactness.
  L.lf_check("lf_truncation", [&] {
    double worst = 0.0;
    const auto p = law.masses();
    for (int k = 0; k <= 20; ++k) {
      const double s = k / 20.0;
      double h = 0.0;
      for (std::size_t i = p.size(); i-- > 0;) h = h * s + p[i];
      worst = std::max(worst, std::abs(h - gf_eval(law, s).value));
    }
    return worst;
  }, 1e-12);
  L.lf_check("lf_closed_form", [&] {
    double worst = 0.0;
    for (const double s : {0.0, 0.3, 0.7}) {
      const auto tr = iterate_f(law, s, 60);
      for (const auto& row : tr.rows) worst = std::max(worst, std::abs(row.f_n - lf_closed_form(law, s, row.n).f_n));
    }
    return worst;
  }, 1e-10);
  L.lf_check("lf_normalized_trace", [&] {
    double worst = 0.0;
    const auto tr = iterate_f(law, 0.0, 40, fp);
    for (const auto& row : tr.rows) {
      const double bn = std::pow(params.beta, row.n);
      worst = std::max(worst, rel(row.normalized, 1.0 / q + params.gamma * (1.0 - bn)));
    }
    return worst;
  }, 1e-10);
  L.lf_check("lf_k_exact", [&] { return std::abs(limit.K_hat - params.K_theory); }, 1e-8);
  L.lf_check("lf_delta_exact", [&] {
    double worst = 0.0;
    for (const auto& p : limit.points) worst = std::max(worst, std::abs(p.delta_hat - 2.0 * params.gamma));
    return worst;
  }, 1e-7);
  L.lf_check("lf_schroder_property", [&] {
    double worst = 0.0;
    for (const double s : {0.0, 0.2, 0.4, 0.6, 0.8}) {
      worst = std::max(worst, params.beta * schroder_property_residual(law, params, s, 1));
    }
    return worst;
  }, 1e-12);
  L.lf_check("lf_pi_closed_vs_empirical", [&] { return (closed.pi - empirical.pi).cwiseAbs().maxCoeff(); }, 1e-7);
  L.lf_check("lf_pi_closed_invariance", [&] { return closed.residual_l1; }, 1e-9);
  L.lf_check("lf_pi_closed_functional_equation", [&] {
    double worst = 0.0;
    for (const auto& r : schroder_residual(law, params, empirical, grid)) worst = std::max(worst, r.closed_form);
    return worst;
  }, 1e-12);
  L.lf_check("lf_p11_limit", [&] { return std::abs(p11.discrepancy); }, 1e-7);

  // Simulation against exact iterates.
  L.guarded("mc_survival", 4.0, [&] {
    constexpr int kN = 12;
    SimConfig cfg;
    cfg.n = kN;
    cfg.replicates = opts.replicates;
    cfg.seed = opts.seed;
    const auto reps = static_cast<double>(cfg.replicates);
    const auto z_score = [reps](double hat, double exact) {
      const double se = std::sqrt(exact * (1.0 - exact) / reps);
      return se > 0.0 ? std::abs(hat - exact) / se : (hat == exact ? 0.0 : kInf);
    };
    const auto est = simulate(law, cfg);
    const auto tr = iterate_f(law, 0.0, kN);
    L.check("mc_survival", z_score(est.survival_hat, 1.0 - tr.rows.back().f_n), 4.0, "standard errors at n=12");
    double worst = 0.0;
    for (int h = 1; h <= kN; ++h) {
      const double exact = tr.rows[static_cast<std::size_t>(h)].f_n - tr.rows[static_cast<std::size_t>(h - 1)].f_n;
      worst = std::max(worst, z_score(static_cast<double>(est.extinction_time_histogram[static_cast<std::size_t>(h)]) / reps,
                                      exact));
    }
    L.check("mc_extinction_times", worst, 4.0, "largest standard-error gap over h <= 12");
    if (q < 1.0) {
      const auto cond = conditional_on_extinction(law, params, cfg);
      const auto dual_tr = iterate_f(dual, 0.0, kN);
      L.check("mc_conditional_survival", z_score(cond.survival_hat, 1.0 - dual_tr.rows.back().f_n), 4.0,
              "dual process at n=12");
    } else {
      L.skip("mc_conditional_survival", 4.0, "q = 1, the dual is the law itself");
    }
  });

  return L.take();
}

bool ledger_passed(const std::vector<CheckResult>& ledger) {
  return std::none_of(ledger.begin(), ledger.end(), [](const CheckResult& c) { return c.status == CheckStatus::fail; });
}

Json ledger_json(const std::vector<CheckResult>& ledger) {
  Json checks = Json::array();
  int counts[4] = {0, 0, 0, 0};
  for (const auto& c : ledger) {
    ++counts[static_cast<int>(c.status)];
    checks.push_back(Json{{"name", c.name},
                          {"residual", c.residual},
                          {"threshold", c.threshold},
                          {"pass", c.status == CheckStatus::pass},
                          {"status", to_string(c.status)},
                          {"lf_only", c.lf_only},
                          {"note", c.note}});
  }
  return Json{{"checks", checks},
              {"summary", Json{{"passed", counts[0]},
                               {"failed", counts[1]},
                               {"skipped", counts[2]},
                               {"reported", counts[3]},
                               {"overall_pass", ledger_passed(ledger)}}}};
}

// ---------------------------------------------------------------- tables

namespace {

void flatten_into(const Json& j, const std::string& prefix, Table& t) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten_into(value, prefix.empty() ? key : prefix + "." + key, t);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten_into(j[k], prefix + "." + std::to_string(k), t);
  } else if (j.is_number_float()) {
    t.rows.push_back({prefix, format_number(j.get<double>())});
  } else if (j.is_string()) {
    t.rows.push_back({prefix, j.get<std::string>()});
  } else {
    t.rows.push_back({prefix, j.dump()});
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Table flatten(const Json& doc) {
  Table t{{"key", "value"}, {}};
  flatten_into(doc, "", t);
  return t;
}

std::string write_csv(const Table& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + csv_field(cells[k]);
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

std::string write_table(const Table& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  auto measure = [&width](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size() && k < width.size(); ++k) width[k] = std::max(width[k], cells[k].size());
  };
  measure(table.header);
  for (const auto& r : table.rows) measure(r);
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out += cells[k];
      if (k + 1 < cells.size()) out += std::string(width[k] - cells[k].size() + 2, ' ');
    }
    out += '\n';
  };
  line(table.header);
  std::vector<std::string> rule;
  for (const auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : table.rows) line(r);
  return out;
}

}  // namespace gwk
