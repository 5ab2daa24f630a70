#ifndef GWK_POWER_SERIES_HPP
#define GWK_POWER_SERIES_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gwk/errors.hpp"

namespace gwk {

inline constexpr Eigen::Index kDefaultSeriesOrder = 512;

/// Neumaier's variant of Kahan summation.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) noexcept {
    const Scalar t = sum_ + x;
    if (abs_(sum_) >= abs_(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Scalar value() const noexcept { return sum_ + comp_; }

 private:
  static Scalar abs_(Scalar x) noexcept { return x < Scalar(0) ? -x : x; }
  Scalar sum_ = 0;
  Scalar comp_ = 0;
};

/// c_0 + c_1 s + ... + c_J s^J, truncated at order J.
///
/// `lost_mass()` tracks how much of the untruncated series' value at s = 1
/// was dropped by truncation in the operations that produced this series.
/// For probability generating functions that is the tail probability mass.
template <typename Scalar>
class TruncatedSeries {
 public:
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit TruncatedSeries(Coefficients coeffs, Scalar lost_mass = Scalar(0))
      : coeffs_(std::move(coeffs)), lost_mass_(lost_mass) {
    if (coeffs_.size() == 0) coeffs_ = Coefficients::Zero(1);
  }

  /// Coefficients padded with zeros or cut to exactly order+1 entries.
  static TruncatedSeries from(const Coefficients& coeffs, Eigen::Index order) {
    Coefficients c = Coefficients::Zero(order + 1);
    const Eigen::Index n = std::min<Eigen::Index>(coeffs.size(), order + 1);
    c.head(n) = coeffs.head(n);
    Scalar lost = 0;
    for (Eigen::Index k = n; k < coeffs.size(); ++k) lost += coeffs[k];
    return TruncatedSeries(std::move(c), lost);
  }
  static TruncatedSeries constant(Scalar c0, Eigen::Index order) {
    Coefficients c = Coefficients::Zero(order + 1);
    c[0] = c0;
    return TruncatedSeries(std::move(c));
  }
  static TruncatedSeries identity(Eigen::Index order) {
    Coefficients c = Coefficients::Zero(order + 1);
    if (order >= 1) c[1] = Scalar(1);
    return TruncatedSeries(std::move(c), order >= 1 ? Scalar(0) : Scalar(1));
  }

  Eigen::Index order() const noexcept { return coeffs_.size() - 1; }
  const Coefficients& coeffs() const noexcept { return coeffs_; }
  Scalar operator[](Eigen::Index j) const { return coeffs_[j]; }
  Scalar lost_mass() const noexcept { return lost_mass_; }

  Scalar evaluate(Scalar s) const noexcept {
    Scalar r = 0;
    for (Eigen::Index k = coeffs_.size(); k-- > 0;) r = r * s + coeffs_[k];
    return r;
  }
  Scalar sum() const noexcept {
    CompensatedSum<Scalar> acc;
    for (Eigen::Index k = 0; k < coeffs_.size(); ++k) acc.add(coeffs_[k]);
    return acc.value();
  }
  /// Value at s = 1 of the series before any truncation.
  Scalar full_mass() const noexcept { return sum() + lost_mass_; }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a.coeffs_.size() == b.coeffs_.size() && (a.coeffs_.array() == b.coeffs_.array()).all();
  }

 private:
  Coefficients coeffs_;
  Scalar lost_mass_;
};

using Series = TruncatedSeries<double>;

namespace detail {

template <typename Scalar>
std::vector<Eigen::Index> nonzero_indices(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c, Eigen::Index limit) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k <= limit && k < c.size(); ++k) {
    if (c[k] != Scalar(0)) idx.push_back(k);
  }
  return idx;
}

}  // namespace detail

/// Truncated product at the shorter of the two orders, compensated convolution.
template <typename Scalar>
TruncatedSeries<Scalar> multiply(const TruncatedSeries<Scalar>& a, const TruncatedSeries<Scalar>& b) {
  const Eigen::Index order = std::min(a.order(), b.order());
  const auto ia = detail::nonzero_indices(a.coeffs(), order);
  const auto ib = detail::nonzero_indices(b.coeffs(), order);
  std::vector<CompensatedSum<Scalar>> acc(static_cast<std::size_t>(order + 1));
  for (const auto i : ia) {
    const Scalar ai = a[i];
    for (const auto k : ib) {
      if (i + k > order) break;
      acc[static_cast<std::size_t>(i + k)].add(ai * b[k]);
    }
  }
  typename TruncatedSeries<Scalar>::Coefficients out(order + 1);
  for (Eigen::Index j = 0; j <= order; ++j) out[j] = acc[static_cast<std::size_t>(j)].value();
  TruncatedSeries<Scalar> result(std::move(out));
  const Scalar lost = a.full_mass() * b.full_mass() - result.sum();
  return TruncatedSeries<Scalar>(result.coeffs(), lost);
}

/// outer(inner(s)) by Horner's scheme over series. Requires inner(0) in [0, 1).
template <typename Scalar>
TruncatedSeries<Scalar> compose(const TruncatedSeries<Scalar>& outer, const TruncatedSeries<Scalar>& inner) {
  if (!(inner[0] >= Scalar(0) && inner[0] < Scalar(1))) {
    throw Error(ErrorKind::InnerConstantOutOfRange, "inner constant term must lie in [0, 1)");
  }
  const Eigen::Index order = std::min(outer.order(), inner.order());
  Eigen::Index top = outer.order();
  while (top > 0 && outer[top] == Scalar(0)) --top;

  const TruncatedSeries<Scalar> in = inner.order() == order
                                         ? inner
                                         : TruncatedSeries<Scalar>::from(inner.coeffs(), order);
  auto r = TruncatedSeries<Scalar>::constant(outer[top], order);
  for (Eigen::Index k = top; k-- > 0;) {
    auto next = multiply(r, in).coeffs();
    next[0] += outer[k];
    r = TruncatedSeries<Scalar>(std::move(next));
  }
  const Scalar full = outer.evaluate(in.full_mass()) + outer.lost_mass();
  return TruncatedSeries<Scalar>(r.coeffs(), full - r.sum());
}

/// a(s)^i by repeated squaring. Requires i >= 1.
template <typename Scalar>
TruncatedSeries<Scalar> power(const TruncatedSeries<Scalar>& a, unsigned i) {
  if (i == 0) throw Error(ErrorKind::Domain, "power exponent must be positive");
  std::optional<TruncatedSeries<Scalar>> result;
  TruncatedSeries<Scalar> base = a;
  for (;;) {
    if (i & 1U) result = result ? multiply(*result, base) : base;
    i >>= 1U;
    if (i == 0) break;
    base = multiply(base, base);
  }
  return *result;
}

/// Term-wise derivative; the order drops by one. Requires order >= 1.
template <typename Scalar>
TruncatedSeries<Scalar> differentiate(const TruncatedSeries<Scalar>& a) {
  if (a.order() < 1) throw Error(ErrorKind::ZeroOrderSeries, "cannot differentiate an order-0 series");
  typename TruncatedSeries<Scalar>::Coefficients d(a.order());
  for (Eigen::Index k = 1; k <= a.order(); ++k) d[k - 1] = Scalar(k) * a[k];
  return TruncatedSeries<Scalar>(std::move(d));
}

}  // namespace gwk

#endif  // GWK_POWER_SERIES_HPP
