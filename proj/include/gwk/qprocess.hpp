#ifndef GWK_QPROCESS_HPP
#define GWK_QPROCESS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gwk/asymptotics.hpp"
#include "gwk/offspring.hpp"

namespace gwk {

/// Q_i1(n), ..., Q_{i j_max}(n) of the Q-process.
struct QRow {
  int i;
  int n;
  Eigen::VectorXd probs;  ///< index j-1 holds Q_ij(n)
  double truncation_loss;

  double at(Eigen::Index j) const { return j >= 1 && j <= probs.size() ? probs[j - 1] : 0.0; }
};

/// Q_ij(n) = j q^(j-i) P_ij(n) / (i beta^n).
///
/// Built from the Harris-Sevastyanov dual, whose rows are exactly
/// q^(j-i) P_ij(n), so no power of 1/q is ever formed. n = 0 gives the point
/// mass at i. Throws Error(TruncationLossExceeded) when more than 1e-6 of the
/// row lies beyond j_max.
QRow q_row(const OffspringLaw& law, const ProcessParams& params, int i, int n, Eigen::Index j_max);

/// One-step matrix Q_ij(1) for i, j in 1..j_max, rows truncated at j_max
/// (mass beyond the cap is dropped, not redistributed).
Eigen::MatrixXd q_matrix(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max);

/// w_n^(i)(s) = [f_n(qs)/q]^(i-1) s f_n'(qs) / beta^n; w_0^(i)(s) = s^i.
double w_eval(const OffspringLaw& law, const ProcessParams& params, double s, int n, int i);

/// |w_{n+1}^(i)(s) - (w(s)/f_q(s)) w_n^(i)(f_q(s))| with f_q(s) = f(qs)/q.
double w_recursion_residual(const OffspringLaw& law, const ProcessParams& params, double s, int n, int i);

struct QpMoments {
  double alpha;   ///< w'(1-) = 1 + (1 - beta) gamma_q
  double mean_W;  ///< E_i W(n) = (i-1) beta^n + 1 + gamma_q (1 - beta^n)
};

QpMoments qp_moments(const ProcessParams& params, int n, int i);

/// E_i W(n) as d/ds w_n^(i)(s) at s = 1, from the chain-rule derivatives of f_n at q.
double qp_mean_direct(const OffspringLaw& law, const ProcessParams& params, int n, int i);

enum class MeasureSource { closed_form, empirical };

struct InvariantMeasure {
  Eigen::VectorXd nu;  ///< nu_1..nu_jmax
  Eigen::VectorXd pi;  ///< pi_1..pi_jmax
  MeasureSource source;
  double residual_l1;  ///< || pi Q(1) - pi ||_1 on the truncated space
  double tail;         ///< 1 - sum pi
  int n_used;
  bool converged;
};

/// pi_j = j q^(j-1) nu_j. Closed form j (q gamma)^(j-1) / (1 + q gamma)^(j+1);
/// empirical mode takes the extrapolated lim Q_1j(n) through the dual series.
InvariantMeasure pi_measure(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max,
                            MeasureSource mode, int n_max = 400, double tol = 1e-13);

/// pi(s) = s / (1 + q gamma (1 - s))^2.
double pi_closed_form(const ProcessParams& params, double s);
/// sum_j pi_j s^j over the stored coefficients.
double pi_series(const InvariantMeasure& measure, double s);

/// w(s)/f_q(s) at one step, the multiplier in the functional equations.
double schroder_multiplier(const OffspringLaw& law, const ProcessParams& params, double s);

struct SchroderResidual {
  double s;
  double closed_form;
  double empirical;
};

/// |pi(s) - (w(s)/f_q(s)) pi(f_q(s))| for the closed-form pi and for `empirical`.
std::vector<SchroderResidual> schroder_residual(const OffspringLaw& law, const ProcessParams& params,
                                                const InvariantMeasure& empirical,
                                                const std::vector<double>& s_points);

/// Samples W(0..steps) from exact one-step rows with tail mass < 1e-12
/// folded into the largest retained state. Rows are built on demand.
/// Throws Error(StateCapExceeded) if a row needs states above `state_cap`.
std::vector<std::int64_t> sample_qprocess(const OffspringLaw& law, const ProcessParams& params, int steps,
                                          std::uint64_t seed, std::int64_t state_cap = 10000,
                                          std::int64_t initial_state = 1, std::uint64_t stream = 0);

}  // namespace gwk

#endif  // GWK_QPROCESS_HPP
