#ifndef GWK_EXTRAPOLATION_HPP
#define GWK_EXTRAPOLATION_HPP

#include <cmath>
#include <limits>

namespace gwk {

/// One Aitken delta-squared step on x0, x1, x2.
///
/// Falls back to x2 when the second difference is at rounding-noise level,
/// which happens once the raw sequence has already converged.
template <typename Scalar>
Scalar aitken(Scalar x0, Scalar x1, Scalar x2) noexcept {
  const Scalar d1 = x2 - x1;
  const Scalar d2 = x2 - Scalar(2) * x1 + x0;
  const Scalar scale = std::abs(x0) + std::abs(x1) + std::abs(x2);
  if (!(std::abs(d2) > Scalar(16) * std::numeric_limits<Scalar>::epsilon() * scale)) return x2;
  return x2 - d1 * d1 / d2;
}

/// Online Aitken extrapolation of a sequence whose error is asymptotically geometric.
template <typename Scalar>
class AitkenAccelerator {
 public:
  /// Feeds the next term; returns true once an extrapolant is available.
  bool push(Scalar x) noexcept {
    x0_ = x1_;
    x1_ = x2_;
    x2_ = x;
    ++count_;
    if (count_ < 3) return false;
    previous_ = current_;
    current_ = aitken(x0_, x1_, x2_);
    return true;
  }

  Scalar estimate() const noexcept { return count_ >= 3 ? current_ : x2_; }
  /// |latest extrapolant - previous one|; infinite until two extrapolants exist.
  Scalar change() const noexcept {
    return count_ >= 4 ? std::abs(current_ - previous_) : std::numeric_limits<Scalar>::infinity();
  }
  long count() const noexcept { return count_; }

 private:
  Scalar x0_ = 0, x1_ = 0, x2_ = 0;
  Scalar current_ = 0, previous_ = 0;
  long count_ = 0;
};

}  // namespace gwk

#endif  // GWK_EXTRAPOLATION_HPP
