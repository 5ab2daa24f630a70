#ifndef GWK_OFFSPRING_HPP
#define GWK_OFFSPRING_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gwk/errors.hpp"

namespace gwk {

inline constexpr double kMassSumTolerance = 1e-12;
inline constexpr double kLinearFractionalTailMass = 1e-15;

enum class LawKind { finite_pmf, linear_fractional };

/// An offspring distribution {p_k}.
///
/// Finite laws hold their masses directly. Linear-fractional laws,
/// p_0 = 1 - b/(1-c) and p_k = b c^(k-1) for k >= 1, keep the exact (b, c)
/// parameters for closed-form evaluation together with a finite truncation
/// (tail mass <= 1e-15, renormalized) for coefficient work. Immutable.
class OffspringLaw {
 public:
  /// Validates raw masses. Throws ValidationError listing every violation.
  /// With `renormalize`, a mass-sum mismatch is fixed by rescaling instead.
  static OffspringLaw pmf(std::vector<double> masses, bool renormalize = false);
  static OffspringLaw linear_fractional(double b, double c);

  LawKind kind() const noexcept { return kind_; }
  bool is_linear_fractional() const noexcept { return kind_ == LawKind::linear_fractional; }

  /// Masses p_0..p_D. For linear-fractional laws this is the truncated sequence.
  std::span<const double> masses() const noexcept { return masses_; }
  /// D, the index of the last retained mass.
  std::size_t degree() const noexcept { return masses_.size() - 1; }
  /// Truncation order of a linear-fractional law, 0 for finite laws.
  std::size_t truncation_order() const noexcept { return truncation_order_; }

  /// Exact mass p_k (closed form for linear-fractional laws).
  double mass(std::size_t k) const noexcept;

  double lf_b() const noexcept { return lf_b_; }
  double lf_c() const noexcept { return lf_c_; }

  friend bool operator==(const OffspringLaw&, const OffspringLaw&) = default;

 private:
  OffspringLaw() = default;

  LawKind kind_ = LawKind::finite_pmf;
  std::vector<double> masses_;
  double lf_b_ = 0.0;
  double lf_c_ = 0.0;
  std::size_t truncation_order_ = 0;
};

/// Validating constructor for raw masses, see OffspringLaw::pmf.
inline OffspringLaw validate(std::vector<double> raw_masses, bool renormalize = false) {
  return OffspringLaw::pmf(std::move(raw_masses), renormalize);
}

template <typename Scalar>
struct GfValue {
  Scalar value;
  Scalar first;
  Scalar second;
};

/// f(s), f'(s), f''(s). Horner for finite laws, the rational form for
/// linear-fractional ones. Throws Error(Domain) unless s is in [0, 1].
template <typename Scalar = double>
GfValue<Scalar> gf_eval(const OffspringLaw& law, Scalar s) {
  if (!(s >= Scalar(0) && s <= Scalar(1))) {
    throw Error(ErrorKind::Domain, "generating function argument outside [0, 1]");
  }
  if (law.is_linear_fractional()) {
    const Scalar b = law.lf_b();
    const Scalar c = law.lf_c();
    const Scalar p0 = Scalar(1) - b / (Scalar(1) - c);
    const Scalar d = Scalar(1) - c * s;
    return {p0 + b * s / d, b / (d * d), Scalar(2) * b * c / (d * d * d)};
  }
  const auto p = law.masses();
  Scalar f = 0, df = 0, d2f = 0;
  for (std::size_t k = p.size(); k-- > 0;) {
    d2f = d2f * s + Scalar(2) * df;
    df = df * s + f;
    f = f * s + Scalar(p[k]);
  }
  return {f, df, d2f};
}

struct MomentSet {
  double m;                 ///< f'(1-)
  double second_factorial;  ///< f''(1-)
  double b_one;             ///< f''(1-)/2
};

MomentSet moments(const OffspringLaw& law);

/// Harris-Sevastyanov dual, f_q(s) = f(qs)/q, i.e. masses p_k q^(k-1).
/// Identity at q = 1; maps linear-fractional (b, c) to (b, cq).
/// Throws Error(NotFixedPoint) when |f(q) - q| > 1e-10.
OffspringLaw harris_sevastyanov(const OffspringLaw& law, double q);

/// Masses as an Eigen vector (truncated sequence for linear-fractional laws).
Eigen::VectorXd mass_vector(const OffspringLaw& law);

}  // namespace gwk

#endif  // GWK_OFFSPRING_HPP
