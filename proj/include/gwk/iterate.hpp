#ifndef GWK_ITERATE_HPP
#define GWK_ITERATE_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gwk/offspring.hpp"
#include "gwk/power_series.hpp"

namespace gwk {

/// Extinction probability q and beta = f'(q), shared by every module that
/// needs them. Produced by `derive_params`.
struct FixedPoint {
  double q;
  double beta;
};

/// The recentred map R -> q - f(q - R), whose fixed point is R = 0.
///
/// Near R = 0 it is evaluated from the Taylor expansion of f at q, so
/// R_n keeps full relative precision even when f_n(s) is within rounding of q.
/// Far from 0 it uses f directly. Linear-fractional laws use the exact
/// Moebius form beta R / (1 + kappa R).
class CenteredMap {
 public:
  CenteredMap(const OffspringLaw& law, FixedPoint fp);

  double operator()(double r) const { return fp_.beta * r - remainder(r); }
  /// beta R - (q - f(q - R)), the part of the map beyond first order.
  double remainder(double r) const;

  const FixedPoint& fixed_point() const noexcept { return fp_; }

 private:
  OffspringLaw law_;
  FixedPoint fp_;
  Eigen::VectorXd taylor_;  // f^(j)(q)/j!
  double taylor_radius_ = 0.0;
  double kappa_ = 0.0;
};

struct TraceRow {
  int n;
  double f_n;         ///< f_n(s) by direct iteration of f
  double r_n;         ///< q - f_n(s) through CenteredMap; NaN without a fixed point
  double normalized;  ///< beta^n / R_n(s); NaN without a fixed point
};

struct IterationTrace {
  double s;
  std::optional<FixedPoint> fixed_point;
  std::vector<TraceRow> rows;
};

/// f_0(s) = s, f_{k+1}(s) = f(f_k(s)) for k < n. R_n and beta^n/R_n are
/// recorded when the fixed point is supplied.
IterationTrace iterate_f(const OffspringLaw& law, double s, int n, std::optional<FixedPoint> fp = std::nullopt);

/// f_n(s), f_n'(s), f_n''(s) by the chain rule along the orbit of s.
GfValue<double> fn_derivatives(const OffspringLaw& law, double s, int n);

/// f_n'(s) = prod_{k<n} f'(f_k(s)).
inline double fn_prime(const OffspringLaw& law, double s, int n) { return fn_derivatives(law, s, n).first; }

/// Coefficients of f_n(s) truncated at `order`.
Series iterate_series(const OffspringLaw& law, int n, Eigen::Index order);

/// P_i0(n), ..., P_{i j_max}(n): coefficients of [f_n(s)]^i.
/// Throws Error(TruncationLossExceeded) when the row misses more than 1e-6 of its mass.
Eigen::VectorXd transition_row(const OffspringLaw& law, int i, int n, Eigen::Index j_max,
                               Eigen::Index order = kDefaultSeriesOrder);

struct LfIterate {
  double f_n;
  double r_n;
};

/// Exact n-step iterate of a linear-fractional law from the n-th power of the
/// 2x2 Moebius matrix of the recentred map, taken through its eigendecomposition.
/// Uses its own closed-form q (min(1, p_0/c)), independent of `solve_q`.
/// Throws Error(CriticalLaw) when the two eigenvalues coincide.
LfIterate lf_closed_form(const OffspringLaw& law, double s, int n);

/// Matrix of the recentred Moebius map of a linear-fractional law raised to the n-th power.
Eigen::Matrix2d lf_moebius_power(const OffspringLaw& law, int n);

}  // namespace gwk

#endif  // GWK_ITERATE_HPP
