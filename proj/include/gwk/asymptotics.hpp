#ifndef GWK_ASYMPTOTICS_HPP
#define GWK_ASYMPTOTICS_HPP

#include <vector>

#include <Eigen/Core>

#include "gwk/iterate.hpp"
#include "gwk/offspring.hpp"

namespace gwk {

inline constexpr double kCriticalityCutoff = 1e-9;

enum class Criticality { subcritical, supercritical };

/// Structural parameters of a non-critical law.
struct ProcessParams {
  double m;
  double q;
  double beta;          ///< f'(q)
  double b_q;           ///< f''(q)/2
  double gamma;         ///< b_q / (beta - beta^2)
  double gamma_q;       ///< q f''(q) / (beta - beta^2)
  double delta_theory;  ///< gamma_q / q, equal to 2 gamma
  double K_theory;      ///< q / (1 + q gamma)
  Criticality criticality;

  FixedPoint fixed_point() const noexcept { return {q, beta}; }
};

/// Extinction probability. 1 for subcritical laws; otherwise the root of
/// f(s) = s in (0, 1) by bisection with safeguarded Newton steps.
/// Throws Error(CriticalLaw) when |m - 1| <= 1e-9.
double solve_q(const OffspringLaw& law);

ProcessParams derive_params(const OffspringLaw& law);

/// K = 1/(1 + gamma) with gamma = b/(m - m^2), the q = 1 specialization.
double subcritical_k(const MomentSet& moments);

/// A_gamma(s) = (q - s)/(1 + gamma (q - s)).
double a_gamma(const ProcessParams& params, double s);
/// A_gamma'(s) = -1/(1 + gamma (q - s))^2. This is also the leading
/// coefficient of dR_n(s)/ds / beta^n.
double a_gamma_derivative(const ProcessParams& params, double s);

/// Default probe points {0, q/4, q/2, 3q/4} plus (1+q)/2 when q < 1.
std::vector<double> default_probe_points(const ProcessParams& params);

struct PointLimit {
  double s;
  double a_hat;      ///< extrapolated lim R_n(s)/beta^n
  double delta_hat;  ///< 2 (1/a_hat - 1/(q - s))
  int n_used;
  bool converged;
};

struct LimitEstimate {
  double K_hat;
  std::vector<PointLimit> points;
  int n_used;  ///< depth used at s = 0
  bool converged;
  /// Trace at s = 0; `normalized` is the slowly varying beta^n/R_n(0).
  IterationTrace trace;
};

/// R_n(s)/beta^n followed by one level of Aitken extrapolation. A point is
/// converged when two successive extrapolants differ by < tol (relative to
/// max(1, |estimate|)). Not converging is reported by flag, not thrown.
LimitEstimate limit_estimate(const OffspringLaw& law, const ProcessParams& params,
                             const std::vector<double>& s_points, int n_max = 200, double tol = 1e-9);

PointLimit point_limit(const OffspringLaw& law, const ProcessParams& params, double s, int n_max = 200,
                       double tol = 1e-9);

struct BoundsReport {
  double delta1;
  double delta2;  ///< +infinity when p_1 = 0
  bool delta2_infinite;
  int terms_used;
  double tail_bound;  ///< bound on the omitted tails of both series
};

/// Partial sums of the Delta_1 and Delta_2 series, stopped once the geometric
/// tail bound falls below tol.
BoundsReport delta_bounds(const OffspringLaw& law, const ProcessParams& params, double tol = 1e-12);

/// Lower and upper per-step bounds f''(q_0(n))/(2f'(q_1(n))) and
/// f''(q_1(n))/(2f'(q_0(n))); the upper one is +infinity when f'(q_0(n)) = 0.
struct StepBounds {
  double lower;
  double upper;
};
StepBounds step_bounds(const OffspringLaw& law, const ProcessParams& params, int n);

enum class NuMode { closed_form, empirical };

/// lim_n [s^j] (f_n(s) - q)/beta^n for j = 1..j_max, extrapolated per coefficient.
struct SeriesLimit {
  Eigen::VectorXd coeffs;  ///< index j-1 holds the coefficient of s^j
  int n_used;
  bool converged;
};

/// Iterates f as a truncated series and extrapolates [s^j] f_n / beta^n for
/// j >= 1. Convergence: max_j change < tol * max_j |coefficient|.
SeriesLimit normalized_series_limit(const OffspringLaw& law, double beta, Eigen::Index j_max, int n_max = 400,
                                    double tol = 1e-13);

struct NuCoefficients {
  Eigen::VectorXd nu;  ///< nu_1..nu_jmax
  NuMode mode;
  int n_used;
  bool converged;
};

/// nu_j = -[s^j] A for j >= 1. Closed form gamma^(j-1)/(1 + q gamma)^(j+1);
/// empirical mode extrapolates the series of the Harris-Sevastyanov dual and
/// rescales by q^(1-j).
NuCoefficients nu_coefficients(const ProcessParams& params, Eigen::Index j_max, NuMode mode,
                               const OffspringLaw& law, int n_max = 400, double tol = 1e-13);

struct YaglomLimit {
  Eigen::VectorXd distribution;  ///< nu_k^cond for k = 1..j_max, sums to 1
  double mu;                     ///< its mean
  double implied_K;              ///< q / mu
  double unnormalized_mass;      ///< sum of dual nu_k before normalization
  bool converged;
};

/// Limit law of Z(n) given n < H < infinity, from the dual's empirical nu.
YaglomLimit yaglom_conditional(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max,
                               int n_max = 400, double tol = 1e-13);

struct P11Check {
  double empirical_limit;     ///< extrapolated beta^-n P_11(n)
  double theory;              ///< K_theory^2 / q^2
  double discrepancy;         ///< empirical - theory
  double a_hat_derivative;    ///< -A_hat'(0) from limits at nearby points
  double p11_at_n_max;        ///< P_11(n_max)
  int n_used;
  bool converged;
  bool degenerate_zero;       ///< p_1 = 0, so P_11(n) = 0 for n >= 1
  bool limit_claimed;         ///< false when n_max = 0
};

P11Check p11_check(const OffspringLaw& law, const ProcessParams& params, int n_max = 200, double tol = 1e-11);

/// |A_gamma(f_n(qs)) - beta^n A_gamma(qs)| / beta^n.
double schroder_property_residual(const OffspringLaw& law, const ProcessParams& params, double s, int n);

}  // namespace gwk

#endif  // GWK_ASYMPTOTICS_HPP
