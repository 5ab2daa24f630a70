#include "gwk/iterate.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace gwk {

CenteredMap::CenteredMap(const OffspringLaw& law, FixedPoint fp) : law_(law), fp_(fp) {
  if (law.is_linear_fractional()) {
    kappa_ = law.lf_c() / (1.0 - law.lf_c() * fp.q);
    return;
  }
  // Taylor shift of the mass polynomial to q; every update adds nonnegative terms.
  Eigen::VectorXd a = mass_vector(law);
  const Eigen::Index d = a.size() - 1;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = d - 1; j >= i; --j) a[j] += fp.q * a[j + 1];
  }
  taylor_ = std::move(a);
  taylor_radius_ = 0.5 * fp.q / static_cast<double>(std::max<Eigen::Index>(d, 1));
}

double CenteredMap::remainder(double r) const {
  if (law_.is_linear_fractional()) return fp_.beta * kappa_ * r * r / (1.0 + kappa_ * r);
  if (std::abs(r) <= taylor_radius_) {
    // sum_{j>=2} (-1)^j t_j r^j
    double acc = 0.0;
    for (Eigen::Index j = taylor_.size() - 1; j >= 2; --j) {
      acc = acc * (-r) + taylor_[j];
    }
    return acc * r * r;
  }
  return fp_.beta * r - (fp_.q - gf_eval(law_, fp_.q - r).value);
}

IterationTrace iterate_f(const OffspringLaw& law, double s, int n, std::optional<FixedPoint> fp) {
  IterationTrace trace{s, fp, {}};
  trace.rows.reserve(static_cast<std::size_t>(n) + 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double x = s;
  double r = fp ? fp->q - s : nan;
  std::optional<CenteredMap> map;
  if (fp) map.emplace(law, *fp);
  for (int k = 0; k <= n; ++k) {
    const double normalized = fp ? std::pow(fp->beta, k) / r : nan;
    trace.rows.push_back({k, x, r, normalized});
    if (k == n) break;
    x = gf_eval(law, x).value;
    if (map) r = (*map)(r);
  }
  return trace;
}

GfValue<double> fn_derivatives(const OffspringLaw& law, double s, int n) {
  double x = s, d1 = 1.0, d2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto g = gf_eval(law, x);
    d2 = g.second * d1 * d1 + g.first * d2;
    d1 *= g.first;
    x = g.value;
  }
  return {x, d1, d2};
}

Series iterate_series(const OffspringLaw& law, int n, Eigen::Index order) {
  // Every mass of f reaches the low coefficients of f(f_k) when p_0 > 0, so
  // the outer series is never truncated below the degree of the law.
  const Series f = Series::from(mass_vector(law), std::max<Eigen::Index>(order, law.degree()));
  Series fn = Series::identity(order);
  for (int k = 0; k < n; ++k) fn = compose(f, fn);
  return fn;
}

Eigen::VectorXd transition_row(const OffspringLaw& law, int i, int n, Eigen::Index j_max, Eigen::Index order) {
  if (i < 1 || n < 0) throw Error(ErrorKind::Domain, "transition_row requires i >= 1 and n >= 0");
  if (j_max > order) throw Error(ErrorKind::Domain, "column cap exceeds the series truncation order");
  Eigen::VectorXd row = Eigen::VectorXd::Zero(j_max + 1);
  if (n == 0) {
    if (i <= j_max) row[i] = 1.0;
  } else {
    row = power(iterate_series(law, n, j_max), static_cast<unsigned>(i)).coeffs();
  }
  const double loss = 1.0 - row.sum();
  if (loss > 1e-6) {
    throw Error(ErrorKind::TruncationLossExceeded,
                "transition row loses " + std::to_string(loss) + " of its mass beyond j_max");
  }
  return row;
}

namespace {

struct LfStructure {
  double q;
  double beta;
  double kappa;
};

LfStructure lf_structure(const OffspringLaw& law) {
  if (!law.is_linear_fractional()) throw Error(ErrorKind::Domain, "law is not linear-fractional");
  const double b = law.lf_b(), c = law.lf_c();
  const double m = b / ((1.0 - c) * (1.0 - c));
  if (std::abs(m - 1.0) <= 1e-9) throw Error(ErrorKind::CriticalLaw, "critical linear-fractional law");
  // f(s) = s has roots 1 and p_0/c.
  const double p0 = 1.0 - b / (1.0 - c);
  const double q = std::min(1.0, p0 / c);
  const double d = 1.0 - c * q;
  return {q, b / (d * d), c / d};
}

}  // namespace

Eigen::Matrix2d lf_moebius_power(const OffspringLaw& law, int n) {
  const auto [q, beta, kappa] = lf_structure(law);
  // R -> beta R / (kappa R + 1); eigenvalues beta and 1, distinct off criticality.
  Eigen::Matrix2d v;
  v << 1.0 - beta, 0.0,
       -kappa, 1.0;
  const Eigen::Vector2d eigenvalues_n(std::pow(beta, n), 1.0);
  return v * eigenvalues_n.asDiagonal() * v.inverse();
}

LfIterate lf_closed_form(const OffspringLaw& law, double s, int n) {
  const double q = lf_structure(law).q;
  const Eigen::Matrix2d mn = lf_moebius_power(law, n);
  const double r0 = q - s;
  const double rn = mn(0, 0) * r0 / (mn(1, 0) * r0 + mn(1, 1));
  return {n == 0 ? s : q - rn, rn};
}

}  // namespace gwk
