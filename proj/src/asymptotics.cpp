#include "gwk/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwk/extrapolation.hpp"

namespace gwk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this |R_n| the normalized trace is no longer trustworthy.
constexpr double kUnderflowGuard = 1e-280;
constexpr int kMinDepth = 5;

}  // namespace

double solve_q(const OffspringLaw& law) {
  const double m = moments(law).m;
  if (std::abs(m - 1.0) <= kCriticalityCutoff) {
    throw Error(ErrorKind::CriticalLaw, "critical law: |m - 1| <= 1e-9");
  }
  if (m < 1.0) return 1.0;

  // f' - 1 changes sign on (0, 1); its root is the minimum of h(s) = f(s) - s, where h < 0.
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    (gf_eval(law, mid).first < 1.0 ? lo : hi) = mid;
  }
  // h is convex and decreasing on [0, lo] with h(0) = p_0 > 0 > h(lo).
  double left = 0.0, right = lo;
  double x = 0.0, best = 0.0, best_residual = kInf;
  for (int it = 0; it < 200; ++it) {
    const auto g = gf_eval(law, x);
    const double h = g.value - x;
    if (std::abs(h) < best_residual) {
      best_residual = std::abs(h);
      best = x;
    }
    if (h == 0.0) break;
    (h > 0.0 ? left : right) = x;
    const double slope = g.first - 1.0;
    double next = slope != 0.0 ? x - h / slope : 0.5 * (left + right);
    if (!(next > left && next < right)) next = 0.5 * (left + right);
    if (next == x || right - left <= 4.0 * std::numeric_limits<double>::epsilon()) break;
    x = next;
  }
  return best;
}

double subcritical_k(const MomentSet& moments) {
  const double gamma = moments.b_one / (moments.m - moments.m * moments.m);
  return 1.0 / (1.0 + gamma);
}

ProcessParams derive_params(const OffspringLaw& law) {
  const double q = solve_q(law);
  const auto g = gf_eval(law, q);
  ProcessParams p{};
  p.m = moments(law).m;
  p.q = q;
  p.beta = g.first;
  p.b_q = g.second / 2.0;
  const double spread = p.beta - p.beta * p.beta;
  p.gamma = p.b_q / spread;
  p.gamma_q = q * g.second / spread;
  p.delta_theory = p.gamma_q / q;
  p.K_theory = q / (1.0 + q * p.gamma);
  p.criticality = p.m < 1.0 ? Criticality::subcritical : Criticality::supercritical;
  return p;
}

double a_gamma(const ProcessParams& params, double s) {
  const double u = params.q - s;
  return u / (1.0 + params.gamma * u);
}

double a_gamma_derivative(const ProcessParams& params, double s) {
  const double d = 1.0 + params.gamma * (params.q - s);
  return -1.0 / (d * d);
}

std::vector<double> default_probe_points(const ProcessParams& params) {
  const double q = params.q;
  std::vector<double> pts{0.0, 0.25 * q, 0.5 * q, 0.75 * q};
  if (q < 1.0) pts.push_back(0.5 * (1.0 + q));
  return pts;
}

PointLimit point_limit(const OffspringLaw& law, const ProcessParams& params, double s, int n_max, double tol) {
  if (!(s >= 0.0 && s < 1.0) || s == params.q) {
    throw Error(ErrorKind::Domain, "limit probe point must lie in [0, 1) and differ from q");
  }
  const CenteredMap map(law, params.fixed_point());
  AitkenAccelerator<double> acc;
  double r = params.q - s;
  PointLimit out{s, 0.0, 0.0, 0, false};
  for (int n = 0; n <= n_max; ++n) {
    if (!(std::abs(r) > kUnderflowGuard)) break;
    acc.push(r / std::pow(params.beta, n));
    out.n_used = n;
    if (n >= kMinDepth && acc.change() < tol * std::max(1.0, std::abs(acc.estimate()))) {
      out.converged = true;
      break;
    }
    r = map(r);
  }
  out.a_hat = acc.estimate();
  out.delta_hat = 2.0 * (1.0 / out.a_hat - 1.0 / (params.q - s));
  return out;
}

LimitEstimate limit_estimate(const OffspringLaw& law, const ProcessParams& params,
                             const std::vector<double>& s_points, int n_max, double tol) {
  LimitEstimate est{};
  std::vector<double> pts = s_points;
  if (std::find(pts.begin(), pts.end(), 0.0) == pts.end()) pts.insert(pts.begin(), 0.0);
  est.converged = true;
  for (const double s : pts) {
    auto pl = point_limit(law, params, s, n_max, tol);
    if (s == 0.0) {
      est.K_hat = pl.a_hat;
      est.n_used = pl.n_used;
    }
    est.converged = est.converged && pl.converged;
    est.points.push_back(pl);
  }
  est.trace = iterate_f(law, 0.0, est.n_used, params.fixed_point());
  return est;
}

StepBounds step_bounds(const OffspringLaw& law, const ProcessParams& params, int n) {
  const double bn = std::pow(params.beta, n);
  const double q0 = params.q - params.q * bn;
  const double q1 = params.q + (1.0 - params.q) * bn;
  const auto g0 = gf_eval(law, q0);
  const auto g1 = gf_eval(law, q1);
  const double upper = g0.first == 0.0 ? kInf : g1.second / (2.0 * g0.first);
  return {g0.second / (2.0 * g1.first), upper};
}

BoundsReport delta_bounds(const OffspringLaw& law, const ProcessParams& params, double tol) {
  const double beta = params.beta;
  const double f2q = 2.0 * params.b_q;
  BoundsReport rep{0.0, 0.0, gf_eval(law, 0.0).first == 0.0, 0, kInf};
  constexpr int kMaxTerms = 100000;
  for (int k = 0; k < kMaxTerms; ++k) {
    const auto b = step_bounds(law, params, k);
    rep.delta1 += 2.0 * b.lower * std::pow(beta, k);
    if (!rep.delta2_infinite) rep.delta2 += 2.0 * b.upper * std::pow(beta, k);
    rep.terms_used = k + 1;

    // Terms are bounded by their value at k+1 times beta^(k+1-k') in the tail:
    // f'' grows and f' shrinks toward q from either side.
    const double bk1 = std::pow(beta, k + 1);
    const double tail1 = f2q / beta * bk1 / (1.0 - beta);
    double tail2 = 0.0;
    if (!rep.delta2_infinite) tail2 = 2.0 * step_bounds(law, params, k + 1).upper * bk1 / (1.0 - beta);
    rep.tail_bound = std::max(tail1, tail2);
    if (rep.tail_bound < tol) break;
  }
  if (rep.delta2_infinite) rep.delta2 = kInf;
  return rep;
}

SeriesLimit normalized_series_limit(const OffspringLaw& law, double beta, Eigen::Index j_max, int n_max,
                                    double tol) {
  if (j_max < 1) throw Error(ErrorKind::Domain, "j_max must be at least 1");
  const Series f = Series::from(mass_vector(law), std::max<Eigen::Index>(j_max, law.degree()));
  Series fn = Series::identity(j_max);
  std::vector<AitkenAccelerator<double>> acc(static_cast<std::size_t>(j_max));
  SeriesLimit out{Eigen::VectorXd::Zero(j_max), 0, false};
  for (int n = 0; n <= n_max; ++n) {
    const double bn = std::pow(beta, n);
    if (!(bn > kUnderflowGuard)) break;
    double change = 0.0, scale = 0.0;
    for (Eigen::Index j = 1; j <= j_max; ++j) {
      auto& a = acc[static_cast<std::size_t>(j - 1)];
      a.push(fn[j] / bn);
      change = std::max(change, a.change());
      scale = std::max(scale, std::abs(a.estimate()));
    }
    out.n_used = n;
    if (n >= kMinDepth && change < tol * scale) {
      out.converged = true;
      break;
    }
    if (n < n_max) fn = compose(f, fn);
  }
  for (Eigen::Index j = 1; j <= j_max; ++j) out.coeffs[j - 1] = acc[static_cast<std::size_t>(j - 1)].estimate();
  return out;
}

NuCoefficients nu_coefficients(const ProcessParams& params, Eigen::Index j_max, NuMode mode,
                               const OffspringLaw& law, int n_max, double tol) {
  NuCoefficients out{Eigen::VectorXd::Zero(j_max), mode, 0, true};
  if (mode == NuMode::closed_form) {
    const double c = 1.0 + params.q * params.gamma;
    double nu = 1.0 / (c * c);
    for (Eigen::Index j = 0; j < j_max; ++j, nu *= params.gamma / c) out.nu[j] = nu;
    return out;
  }
  const auto dual = harris_sevastyanov(law, params.q);
  const auto lim = normalized_series_limit(dual, params.beta, j_max, n_max, tol);
  double scale = 1.0;
  for (Eigen::Index j = 0; j < j_max; ++j, scale /= params.q) out.nu[j] = lim.coeffs[j] * scale;
  out.n_used = lim.n_used;
  out.converged = lim.converged;
  return out;
}

YaglomLimit yaglom_conditional(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max,
                               int n_max, double tol) {
  const auto dual = harris_sevastyanov(law, params.q);
  const auto lim = normalized_series_limit(dual, params.beta, j_max, n_max, tol);
  YaglomLimit out{};
  out.unnormalized_mass = lim.coeffs.sum();
  out.distribution = lim.coeffs / out.unnormalized_mass;
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(j_max, 1.0, static_cast<double>(j_max));
  out.mu = k.dot(out.distribution);
  out.implied_K = params.q / out.mu;
  out.converged = lim.converged;
  return out;
}

P11Check p11_check(const OffspringLaw& law, const ProcessParams& params, int n_max, double tol) {
  P11Check out{};
  out.theory = params.K_theory * params.K_theory / (params.q * params.q);
  out.limit_claimed = n_max > 0;
  out.degenerate_zero = law.mass(1) == 0.0;

  AitkenAccelerator<double> acc;
  double x = 0.0, d = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    out.p11_at_n_max = d;
    out.n_used = n;
    if (!out.degenerate_zero) {
      const double bn = std::pow(params.beta, n);
      if (!(bn > kUnderflowGuard)) break;
      acc.push(d / bn);
      if (n >= kMinDepth && acc.change() < tol * std::max(1.0, std::abs(acc.estimate()))) {
        out.converged = true;
        break;
      }
    }
    if (n == n_max) break;
    const auto g = gf_eval(law, x);
    d *= g.first;
    x = g.value;
  }
  if (out.degenerate_zero) {
    out.empirical_limit = 0.0;
    out.converged = n_max > 0;
  } else {
    out.empirical_limit = n_max > 0 ? acc.estimate() : 1.0;
  }
  out.discrepancy = out.empirical_limit - out.theory;

  // Richardson-corrected forward difference of A_hat at 0.
  const double h = 1e-3 * params.q;
  const double a0 = point_limit(law, params, 0.0, 400, 1e-14).a_hat;
  const double ah = point_limit(law, params, h, 400, 1e-14).a_hat;
  const double ah2 = point_limit(law, params, 0.5 * h, 400, 1e-14).a_hat;
  const double slope = 2.0 * (ah2 - a0) / (0.5 * h) - (ah - a0) / h;
  out.a_hat_derivative = -slope;
  return out;
}

double schroder_property_residual(const OffspringLaw& law, const ProcessParams& params, double s, int n) {
  const CenteredMap map(law, params.fixed_point());
  const double x = params.q * s;
  double r = params.q - x;
  for (int k = 0; k < n; ++k) r = map(r);
  const double bn = std::pow(params.beta, n);
  return std::abs(r / bn / (1.0 + params.gamma * r) - a_gamma(params, x));
}

}  // namespace gwk
