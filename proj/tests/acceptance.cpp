// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gwk/report.hpp"
#include "oracle_values.hpp"

using namespace gwk;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::function<bool(std::string&)> run;  // fills a detail line, returns pass
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const OffspringLaw kA = OffspringLaw::pmf({0.75, 0.0, 0.25});
const OffspringLaw kB = OffspringLaw::pmf({0.5, 0.25, 0.25});
const OffspringLaw kC = OffspringLaw::pmf({0.25, 0.0, 0.75});
const OffspringLaw kLf = OffspringLaw::linear_fractional(0.2, 0.5);

const std::vector<const OffspringLaw*> kTestLaws{&kA, &kB, &kC, &kLf};

bool lf_exactness(std::string& detail) {
  const auto p = derive_params(kLf);
  const auto tr = iterate_f(kLf, 0.0, 40, p.fixed_point());
  double worst = 0.0;
  for (const auto& row : tr.rows) {
    const double mn = std::pow(0.8, row.n);
    worst = std::max(worst, std::abs(mn / row.r_n - (1.0 + 5.0 * (1.0 - mn))));
  }
  const double k_hat = limit_estimate(kLf, p, {0.0}).K_hat;
  const double k_err = std::max(std::abs(k_hat - 1.0 / 6.0), std::abs(p.K_theory - 1.0 / 6.0));
  detail = fmt("identity max err %.3g (tol 1e-10)", worst) + fmt(", |K_hat - 1/6| %.3g (tol 1e-8)", k_err);
  return worst <= 1e-10 && k_err <= 1e-8;
}

bool supercritical_parameters(std::string& detail) {
  const auto p = derive_params(kC);
  const double q_err = std::abs(solve_q(kC) - 1.0 / 3.0);
  const double par_err = std::max({std::abs(p.beta - 0.5), std::abs(p.gamma - 3.0), std::abs(p.K_theory - 1.0 / 6.0)});
  detail = fmt("|q - 1/3| %.3g (tol 1e-12)", q_err) + fmt(", max parameter err %.3g (tol 1e-14)", par_err);
  return q_err <= 1e-12 && par_err <= 1e-14;
}

bool sandwich_bounds(std::string& detail) {
  const auto pa = derive_params(kA);
  const auto ba = delta_bounds(kA, pa);
  const double d0 = limit_estimate(kA, pa, {0.0}).points[0].delta_hat;
  bool ok = std::abs(ba.delta1 - 2.0) <= 1e-10 && ba.delta2_infinite && std::abs(d0 - 3.09) <= 0.01 && ba.delta1 <= d0;
  detail = fmt("[0.75,0,0.25]: Delta1 %.12g", ba.delta1) + (ba.delta2_infinite ? ", Delta2 inf" : ", Delta2 finite") +
           fmt(", delta_hat(0) %.6g", d0);
  int probed = 0, inside = 0;
  for (const auto* law : kTestLaws) {
    if (law->mass(1) == 0.0) continue;
    const auto p = derive_params(*law);
    const auto b = delta_bounds(*law, p);
    for (const auto& pt : limit_estimate(*law, p, default_probe_points(p)).points) {
      ++probed;
      if (b.delta1 <= pt.delta_hat && pt.delta_hat <= b.delta2) ++inside;
    }
  }
  detail += "; p1>0 laws: " + std::to_string(inside) + "/" + std::to_string(probed) + " probes inside [Delta1, Delta2]";
  return ok && probed > 0 && inside == probed;
}

bool k_gap(std::string& detail) {
  const auto pa = derive_params(kA);
  const double ka = limit_estimate(kA, pa, {0.0}).K_hat;
  const auto ledger = verify_suite(kA, {});
  const CheckResult* gap = nullptr;
  for (const auto& c : ledger) {
    if (c.name == "k_gap_relative") gap = &c;
  }
  const auto pb = derive_params(kB);
  const double kb = limit_estimate(kB, pb, {0.0}).K_hat;
  const bool ok = std::abs(ka - 0.393) <= 0.001 && pa.K_theory == 0.5 && gap && gap->status == CheckStatus::report &&
                  std::abs(gap->residual - 0.21) <= 0.01 && ledger_passed(ledger) && std::abs(kb - 0.386) <= 0.002 &&
                  std::abs(pb.K_theory - 3.0 / 7.0) <= 1e-14;
  detail = fmt("[0.75,0,0.25] K_hat %.6g (0.393 +- 0.001)", ka) + fmt(", ledger gap %.4g", gap ? gap->residual : NAN) +
           (ledger_passed(ledger) ? " reported, ledger passes" : " ledger FAILED") +
           fmt("; [0.5,0.25,0.25] K_hat %.6g (0.386 +- 0.002)", kb) + fmt(" vs K_theory %.6g", pb.K_theory);
  return ok;
}

bool qprocess_identities(std::string& detail) {
  double mean_err = 0.0, w1_err = 0.0, row_err = 0.0, rec_err = 0.0;
  for (const auto* law : kTestLaws) {
    const auto p = derive_params(*law);
    for (int i = 1; i <= 3; ++i) {
      for (int n = 0; n <= 20; ++n) {
        mean_err = std::max(mean_err, std::abs(qp_moments(p, n, i).mean_W - qp_mean_direct(*law, p, n, i)));
        w1_err = std::max(w1_err, std::abs(w_eval(*law, p, 1.0, n, i) - 1.0));
      }
      for (int n = 1; n <= 6; ++n) row_err = std::max(row_err, std::abs(q_row(*law, p, i, n, 400).probs.sum() - 1.0));
      for (int n = 0; n <= 10; ++n) {
        for (int k = 1; k <= 9; ++k) rec_err = std::max(rec_err, w_recursion_residual(*law, p, 0.1 * k, n, i));
      }
    }
  }
  detail = fmt("mean %.3g (tol 1e-11)", mean_err) + fmt(", w_n(1) %.3g (tol 1e-11)", w1_err) +
           fmt(", row sums %.3g (tol 1e-9)", row_err) + fmt(", w recursion %.3g (tol 1e-10)", rec_err);
  return mean_err <= 1e-11 && w1_err <= 1e-11 && row_err <= 1e-9 && rec_err < 1e-10;
}

bool invariant_measure(std::string& detail) {
  const auto pc = derive_params(kC);
  const auto closed = pi_measure(kC, pc, 60, MeasureSource::closed_form);
  double entry = 0.0;
  for (Eigen::Index j = 1; j <= 60; ++j) {
    entry = std::max(entry, std::abs(closed.pi[j - 1] - static_cast<double>(j) * std::pow(0.5, static_cast<double>(j - 1)) / 4.0));
  }
  const double sum_err = std::abs(closed.pi.sum() - 1.0);
  // The lf pi tail is geometric with ratio 5/6; 144 terms leave < 1e-10 outside the truncated space.
  const auto pl = derive_params(kLf);
  const auto lf_closed = pi_measure(kLf, pl, 144, MeasureSource::closed_form);
  const auto lf_emp = pi_measure(kLf, pl, 144, MeasureSource::empirical);
  const double lf_gap = (lf_emp.pi - lf_closed.pi).cwiseAbs().maxCoeff();
  detail = fmt("[0.25,0,0.75] entry err %.3g (tol 1e-12)", entry) + fmt(", |sum - 1| %.3g (tol 1e-9)", sum_err) +
           fmt("; lf empirical vs closed %.3g (tol 1e-7)", lf_gap) +
           fmt(", invariance residual %.3g (tol 1e-9, j_max 144)", lf_emp.residual_l1);
  return entry <= 1e-12 && sum_err <= 1e-9 && lf_emp.converged && lf_gap <= 1e-7 && lf_emp.residual_l1 < 1e-9;
}

bool duality(std::string& detail) {
  const auto pc = derive_params(kC);
  const double kc = limit_estimate(kC, pc, {0.0}).K_hat;
  const double ka = limit_estimate(kA, derive_params(kA), {0.0}).K_hat;
  const double rel = std::abs(kc - pc.q * ka) / kc;
  detail = fmt("K_hat %.10g", kc) + fmt(" vs q K_hat(dual) %.10g", pc.q * ka) + fmt(", rel %.3g (tol 2e-3)", rel);
  return rel <= 2e-3;
}

bool p11(std::string& detail) {
  const auto c = p11_check(kLf, derive_params(kLf));
  const auto a = p11_check(kA, derive_params(kA));
  const double err = std::abs(c.empirical_limit - 1.0 / 36.0);
  detail = fmt("lf limit %.12g", c.empirical_limit) + fmt(", |. - 1/36| %.3g (tol 1e-7)", err) +
           (a.degenerate_zero ? "; p1=0 flagged" : "; p1=0 NOT flagged") + fmt(" with limit %.3g", a.empirical_limit);
  return err <= 1e-7 && a.degenerate_zero && a.empirical_limit == 0.0;
}

bool same(const SimEstimate& x, const SimEstimate& y) {
  return x.survival_hat == y.survival_hat && x.survival_stderr == y.survival_stderr &&
         x.conditional_mean_hat == y.conditional_mean_hat && x.conditional_mean_stderr == y.conditional_mean_stderr &&
         x.extinction_time_histogram == y.extinction_time_histogram;
}

bool monte_carlo(std::string& detail) {
  const double exact[] = {oracle::LawA::survival_12, oracle::LawB::survival_12, oracle::LawC::survival_12,
                          oracle::LawLf::survival_12};
  bool ok = true;
  for (std::size_t k = 0; k < kTestLaws.size(); ++k) {
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto est = simulate(*kTestLaws[k], {12, 1000000, seed});
      if (std::abs(est.survival_hat - exact[k]) <= 4.0 * est.survival_stderr) ++within;
    }
    detail += (k ? ", " : "") + std::to_string(within) + "/20";
    ok = ok && within >= 19;
  }
  detail += " seeds within 4 stderr (need 19)";
  bool reproducible = true;
  for (const auto* law : kTestLaws) {
    SimConfig cfg{12, 1000000, 2024};
    cfg.workers = 1;
    const auto one = simulate(*law, cfg);
    for (const unsigned w : {2u, 5u, 0u}) {
      cfg.workers = w;
      reproducible = reproducible && same(one, simulate(*law, cfg));
    }
  }
  detail += reproducible ? "; bitwise identical for 1, 2, 5 and all workers" : "; worker count changed the result";
  return ok && reproducible;
}

/// P(sum of i offspring = j) by enumerating offspring tuples.
double one_step(const std::vector<double>& p, int i, int j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  double total = 0.0;
  for (int k = 0; k < static_cast<int>(p.size()) && k <= j; ++k) total += p[k] * one_step(p, i - 1, j - k);
  return total;
}

double n_step(const std::vector<double>& p, int i, int j, int n) {
  if (n == 0) return i == j ? 1.0 : 0.0;
  double total = 0.0;
  for (int k = 0; k <= i * static_cast<int>(p.size() - 1); ++k) {
    const double step = one_step(p, i, k);
    if (step != 0.0) total += step * n_step(p, k, j, n - 1);
  }
  return total;
}

bool brute_force(std::string& detail) {
  const std::vector<double> p{0.5, 0.25, 0.25};
  const auto law = OffspringLaw::pmf(p);
  double worst = 0.0;
  for (int i = 1; i <= 3; ++i) {
    for (int n = 1; n <= 3; ++n) {
      // Every reachable state fits, so the truncation guard never fires.
      const auto row = transition_row(law, i, n, std::max(12, i << n));
      for (int j = 0; j <= 12; ++j) worst = std::max(worst, std::abs(row[j] - n_step(p, i, j, n)));
    }
  }
  detail = fmt("max err %.3g over i,n <= 3, j <= 12 (tol 1e-10)", worst);
  return worst <= 1e-10;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "linear-fractional exactness", lf_exactness},
      {2, "supercritical parameters", supercritical_parameters},
      {3, "sandwich bounds", sandwich_bounds},
      {4, "K_hat vs K_theory gap", k_gap},
      {5, "Q-process identities", qprocess_identities},
      {6, "invariant measure", invariant_measure},
      {7, "duality", duality},
      {8, "beta^-n P_11(n) limit", p11},
      {9, "Monte Carlo vs exact", monte_carlo},
      {10, "brute-force transition rows", brute_force},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool pass = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail += std::string(" threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
