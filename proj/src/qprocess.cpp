#include "gwk/qprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gwk/iterate.hpp"
#include "gwk/philox.hpp"
#include "gwk/power_series.hpp"

namespace gwk {

QRow q_row(const OffspringLaw& law, const ProcessParams& params, int i, int n, Eigen::Index j_max) {
  if (i < 1 || n < 0 || j_max < 1) throw Error(ErrorKind::Domain, "q_row requires i >= 1, n >= 0, j_max >= 1");
  QRow row{i, n, Eigen::VectorXd::Zero(j_max), 0.0};
  if (n == 0) {
    if (i <= j_max) row.probs[i - 1] = 1.0;
  } else {
    const auto dual = harris_sevastyanov(law, params.q);
    const Eigen::VectorXd p = transition_row(dual, i, n, j_max, j_max);
    const double scale = 1.0 / (static_cast<double>(i) * std::pow(params.beta, n));
    for (Eigen::Index j = 1; j <= j_max; ++j) row.probs[j - 1] = static_cast<double>(j) * p[j] * scale;
  }
  row.truncation_loss = 1.0 - row.probs.sum();
  if (row.truncation_loss > 1e-6) {
    throw Error(ErrorKind::TruncationLossExceeded,
                "Q-process row loses " + std::to_string(row.truncation_loss) + " of its mass beyond j_max");
  }
  return row;
}

Eigen::MatrixXd q_matrix(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max) {
  const auto dual = harris_sevastyanov(law, params.q);
  const Series f = Series::from(mass_vector(dual), j_max);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(j_max, j_max);
  Series p = f;  // row i of P^dual(1) is the i-th power of f
  for (Eigen::Index i = 1; i <= j_max; ++i) {
    const double scale = 1.0 / (static_cast<double>(i) * params.beta);
    for (Eigen::Index j = 1; j <= j_max; ++j) q(i - 1, j - 1) = static_cast<double>(j) * p[j] * scale;
    if (i < j_max) p = multiply(p, f);
  }
  return q;
}

double w_eval(const OffspringLaw& law, const ProcessParams& params, double s, int n, int i) {
  if (i < 1 || n < 0) throw Error(ErrorKind::Domain, "w_eval requires i >= 1 and n >= 0");
  if (n == 0) return std::pow(s, i);
  const auto d = fn_derivatives(law, params.q * s, n);
  return std::pow(d.value / params.q, i - 1) * s * d.first / std::pow(params.beta, n);
}

double w_recursion_residual(const OffspringLaw& law, const ProcessParams& params, double s, int n, int i) {
  const double fq = gf_eval(law, params.q * s).value / params.q;
  const double rhs = schroder_multiplier(law, params, s) * w_eval(law, params, fq, n, i);
  return std::abs(w_eval(law, params, s, n + 1, i) - rhs);
}

QpMoments qp_moments(const ProcessParams& params, int n, int i) {
  const double bn = std::pow(params.beta, n);
  return {1.0 + (1.0 - params.beta) * params.gamma_q,
          static_cast<double>(i - 1) * bn + 1.0 + params.gamma_q * (1.0 - bn)};
}

double qp_mean_direct(const OffspringLaw& law, const ProcessParams& params, int n, int i) {
  const double q = params.q;
  const auto d = fn_derivatives(law, q, n);
  const double bn = std::pow(params.beta, n);
  const double w1 = d.first / bn;
  const double dw1 = d.first / bn + q * d.second / bn;
  const double ratio = d.value / q;
  double mean = std::pow(ratio, i - 1) * dw1;
  if (i > 1) mean += static_cast<double>(i - 1) * std::pow(ratio, i - 2) * d.first * w1;
  return mean;
}

InvariantMeasure pi_measure(const OffspringLaw& law, const ProcessParams& params, Eigen::Index j_max,
                            MeasureSource mode, int n_max, double tol) {
  if (j_max < 1) throw Error(ErrorKind::Domain, "j_max must be at least 1");
  InvariantMeasure m{Eigen::VectorXd::Zero(j_max), Eigen::VectorXd::Zero(j_max), mode, 0.0, 0.0, 0, true};
  if (mode == MeasureSource::closed_form) {
    const double x = params.q * params.gamma;
    const double c = 1.0 + x;
    m.nu = nu_coefficients(params, j_max, NuMode::closed_form, law).nu;
    double term = 1.0 / (c * c);
    for (Eigen::Index j = 1; j <= j_max; ++j, term *= x / c) m.pi[j - 1] = static_cast<double>(j) * term;
  } else {
    const auto dual = harris_sevastyanov(law, params.q);
    const auto lim = normalized_series_limit(dual, params.beta, j_max, n_max, tol);
    double scale = 1.0;
    for (Eigen::Index j = 1; j <= j_max; ++j, scale /= params.q) {
      m.pi[j - 1] = static_cast<double>(j) * lim.coeffs[j - 1];
      m.nu[j - 1] = lim.coeffs[j - 1] * scale;
    }
    m.n_used = lim.n_used;
    m.converged = lim.converged;
  }
  const Eigen::MatrixXd q1 = q_matrix(law, params, j_max);
  m.residual_l1 = (m.pi.transpose() * q1 - m.pi.transpose()).lpNorm<1>();
  m.tail = 1.0 - m.pi.sum();
  return m;
}

double pi_closed_form(const ProcessParams& params, double s) {
  const double d = 1.0 + params.q * params.gamma * (1.0 - s);
  return s / (d * d);
}

double pi_series(const InvariantMeasure& measure, double s) {
  double r = 0.0;
  for (Eigen::Index j = measure.pi.size(); j-- > 0;) r = r * s + measure.pi[j];
  return r * s;
}

double schroder_multiplier(const OffspringLaw& law, const ProcessParams& params, double s) {
  const auto g = gf_eval(law, params.q * s);
  const double w = s * g.first / params.beta;
  const double fq = g.value / params.q;
  return w / fq;
}

std::vector<SchroderResidual> schroder_residual(const OffspringLaw& law, const ProcessParams& params,
                                                const InvariantMeasure& empirical,
                                                const std::vector<double>& s_points) {
  std::vector<SchroderResidual> out;
  for (const double s : s_points) {
    const double fq = gf_eval(law, params.q * s).value / params.q;
    const double mult = schroder_multiplier(law, params, s);
    out.push_back({s, std::abs(pi_closed_form(params, s) - mult * pi_closed_form(params, fq)),
                   std::abs(pi_series(empirical, s) - mult * pi_series(empirical, fq))});
  }
  return out;
}

namespace {

constexpr double kRowTail = 1e-12;

/// Cumulative one-step row of the Q-process from state i, tail folded in.
std::vector<double> sampling_cdf(const OffspringLaw& dual, double beta, std::int64_t i, std::int64_t state_cap) {
  Eigen::Index cap = std::max<Eigen::Index>(32, 2 * i + 16);
  for (;;) {
    cap = std::min<Eigen::Index>(cap, state_cap);
    const Series f = Series::from(mass_vector(dual), cap);
    const Series p = power(f, static_cast<unsigned>(i));
    std::vector<double> probs(static_cast<std::size_t>(cap));
    const double scale = 1.0 / (static_cast<double>(i) * beta);
    double total = 0.0;
    for (Eigen::Index j = 1; j <= cap; ++j) {
      probs[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) * p[j] * scale;
      total += probs[static_cast<std::size_t>(j - 1)];
    }
    const double tail = 1.0 - total;
    if (tail < kRowTail) {
      auto last = static_cast<std::size_t>(cap - 1);
      while (last > 0 && probs[last] == 0.0) --last;
      probs[last] += std::max(tail, 0.0);
      std::partial_sum(probs.begin(), probs.end(), probs.begin());
      return probs;
    }
    if (cap >= state_cap) {
      throw Error(ErrorKind::StateCapExceeded,
                  "Q-process row from state " + std::to_string(i) + " needs states above the cap");
    }
    cap *= 2;
  }
}

}  // namespace

std::vector<std::int64_t> sample_qprocess(const OffspringLaw& law, const ProcessParams& params, int steps,
                                          std::uint64_t seed, std::int64_t state_cap, std::int64_t initial_state,
                                          std::uint64_t stream) {
  if (initial_state < 1) throw Error(ErrorKind::Domain, "Q-process starts from a positive state");
  if (initial_state > state_cap) throw Error(ErrorKind::StateCapExceeded, "initial state above the cap");
  const auto dual = harris_sevastyanov(law, params.q);
  std::map<std::int64_t, std::vector<double>> rows;
  PhiloxStream rng(seed, stream);
  std::vector<std::int64_t> path{initial_state};
  path.reserve(static_cast<std::size_t>(steps) + 1);
  std::int64_t w = initial_state;
  for (int k = 0; k < steps; ++k) {
    auto it = rows.find(w);
    if (it == rows.end()) it = rows.emplace(w, sampling_cdf(dual, params.beta, w, state_cap)).first;
    const auto& cdf = it->second;
    const double u = rng.uniform() * cdf.back();
    const auto pos = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    w = std::min<std::int64_t>(pos, static_cast<std::int64_t>(cdf.size()) - 1) + 1;
    path.push_back(w);
  }
  return path;
}

}  // namespace gwk
