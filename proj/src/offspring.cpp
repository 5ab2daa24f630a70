#include "gwk/offspring.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace gwk {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NegativeMass: return "NegativeMass";
    case ErrorKind::MassSumMismatch: return "MassSumMismatch";
    case ErrorKind::DegenerateLaw: return "DegenerateLaw";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Domain: return "Domain";
    case ErrorKind::NotFixedPoint: return "NotFixedPoint";
    case ErrorKind::CriticalLaw: return "CriticalLaw";
    case ErrorKind::InnerConstantOutOfRange: return "InnerConstantOutOfRange";
    case ErrorKind::ZeroOrderSeries: return "ZeroOrderSeries";
    case ErrorKind::TruncationLossExceeded: return "TruncationLossExceeded";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::StateCapExceeded: return "StateCapExceeded";
    case ErrorKind::PopulationCapExceeded: return "PopulationCapExceeded";
    case ErrorKind::InsufficientSurvivors: return "InsufficientSurvivors";
  }
  return "Unknown";
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream out;
  out << "invalid offspring law:";
  for (const auto& v : violations) out << " [" << to_string(v.kind) << "] " << v.detail << ";";
  return out.str();
}

ErrorKind first_kind(const std::vector<Violation>& violations) {
  return violations.empty() ? ErrorKind::DegenerateLaw : violations.front().kind;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(first_kind(violations), join_violations(violations)), violations_(std::move(violations)) {}

OffspringLaw OffspringLaw::pmf(std::vector<double> masses, bool renormalize) {
  std::vector<Violation> violations;
  if (masses.empty()) {
    throw ValidationError({{ErrorKind::DegenerateLaw, "empty mass sequence"}});
  }
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (!std::isfinite(masses[k])) {
      violations.push_back({ErrorKind::NonFinite, "p_" + std::to_string(k) + " is not finite"});
    } else if (masses[k] < 0.0) {
      violations.push_back({ErrorKind::NegativeMass, "p_" + std::to_string(k) + " < 0"});
    }
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!std::isfinite(total)) {
    if (violations.empty()) violations.push_back({ErrorKind::NonFinite, "masses sum to a non-finite value"});
    throw ValidationError(std::move(violations));
  }
  if (std::abs(total - 1.0) > kMassSumTolerance) {
    if (renormalize && total > 0.0 && violations.empty()) {
      for (double& p : masses) p /= total;
    } else {
      std::ostringstream detail;
      detail.precision(17);
      detail << "masses sum to " << total;
      violations.push_back({ErrorKind::MassSumMismatch, detail.str()});
    }
  }
  while (masses.size() > 1 && masses.back() == 0.0) masses.pop_back();

  if (masses[0] <= 0.0) violations.push_back({ErrorKind::DegenerateLaw, "p_0 must be positive"});
  const double p1 = masses.size() > 1 ? masses[1] : 0.0;
  if (masses[0] + p1 >= 1.0) violations.push_back({ErrorKind::DegenerateLaw, "p_0 + p_1 must be below 1"});
  if (std::any_of(masses.begin(), masses.end(), [](double p) { return p == 1.0; })) {
    violations.push_back({ErrorKind::DegenerateLaw, "a single mass equals 1"});
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  OffspringLaw law;
  law.kind_ = LawKind::finite_pmf;
  law.masses_ = std::move(masses);
  return law;
}

OffspringLaw OffspringLaw::linear_fractional(double b, double c) {
  std::vector<Violation> violations;
  if (!std::isfinite(b) || !std::isfinite(c)) {
    throw ValidationError({{ErrorKind::NonFinite, "linear-fractional parameters must be finite"}});
  }
  if (!(b > 0.0 && b < 1.0)) violations.push_back({ErrorKind::DegenerateLaw, "b must lie in (0, 1)"});
  if (!(c > 0.0 && c < 1.0)) violations.push_back({ErrorKind::DegenerateLaw, "c must lie in (0, 1)"});
  if (violations.empty() && !(b / (1.0 - c) < 1.0)) {
    violations.push_back({ErrorKind::DegenerateLaw, "b/(1-c) must be below 1 so that p_0 > 0"});
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));

  OffspringLaw law;
  law.kind_ = LawKind::linear_fractional;
  law.lf_b_ = b;
  law.lf_c_ = c;

  // Cut at the first K whose tail b c^K / (1-c) is <= 1e-15.
  std::vector<double> masses{1.0 - b / (1.0 - c)};
  double term = b;
  std::size_t k = 1;
  for (;; ++k) {
    masses.push_back(term);
    const double tail = term * c / (1.0 - c);
    if (tail <= kLinearFractionalTailMass) break;
    term *= c;
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (double& p : masses) p /= total;
  law.masses_ = std::move(masses);
  law.truncation_order_ = k;
  return law;
}

double OffspringLaw::mass(std::size_t k) const noexcept {
  if (kind_ == LawKind::linear_fractional) {
    if (k == 0) return 1.0 - lf_b_ / (1.0 - lf_c_);
    return lf_b_ * std::pow(lf_c_, static_cast<double>(k - 1));
  }
  return k < masses_.size() ? masses_[k] : 0.0;
}

MomentSet moments(const OffspringLaw& law) {
  const auto at_one = gf_eval(law, 1.0);
  return {at_one.first, at_one.second, at_one.second / 2.0};
}

OffspringLaw harris_sevastyanov(const OffspringLaw& law, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::Domain, "extinction probability must lie in (0, 1]");
  const double residual = gf_eval(law, q).value - q;
  if (std::abs(residual) > 1e-10) {
    throw Error(ErrorKind::NotFixedPoint, "q is not a fixed point of f within 1e-10");
  }
  if (q == 1.0) return law;
  if (law.is_linear_fractional()) return OffspringLaw::linear_fractional(law.lf_b(), law.lf_c() * q);

  const auto p = law.masses();
  std::vector<double> dual(p.size());
  double scale = 1.0 / q;
  for (std::size_t k = 0; k < p.size(); ++k, scale *= q) dual[k] = p[k] * scale;
  // f(q)/q differs from 1 by at most the fixed-point residual.
  return OffspringLaw::pmf(std::move(dual), /*renormalize=*/true);
}

Eigen::VectorXd mass_vector(const OffspringLaw& law) {
  const auto p = law.masses();
  return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

}  // namespace gwk
