#ifndef GWK_MONTECARLO_HPP
#define GWK_MONTECARLO_HPP

#include <cstdint>
#include <vector>

#include "gwk/asymptotics.hpp"
#include "gwk/offspring.hpp"

namespace gwk {

struct SimConfig {
  int n = 0;                                ///< horizon in generations
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;
  std::int64_t population_cap = 1000000000;
  unsigned workers = 0;                     ///< 0 = hardware concurrency
};

struct SimEstimate {
  double survival_hat;           ///< fraction of replicates with Z(n) > 0
  double survival_stderr;
  double conditional_mean_hat;   ///< mean of Z(n) over survivors
  double conditional_mean_stderr;
  std::int64_t survivors;
  std::int64_t replicates;       ///< replicates that entered the estimates
  std::int64_t capped;           ///< replicates excluded for hitting the population cap
  /// Index h in 1..n counts replicates with extinction time H = h; index 0
  /// counts those still alive at n (censored).
  std::vector<std::int64_t> extinction_time_histogram;
};

/// Direct simulation of Z(0) = 1, Z(k+1) = sum of Z(k) offspring draws.
///
/// Replicate r draws from its own Philox stream keyed by (seed, r), and
/// replicates are reduced in fixed-size blocks in index order, so results
/// are bitwise identical for any worker count. Small generations draw each
/// offspring count by inverse CDF; large ones draw the offspring-count
/// histogram as a multinomial via conditional binomials.
/// Throws Error(PopulationCapExceeded) if more than 0.1% of replicates hit the cap.
SimEstimate simulate(const OffspringLaw& law, const SimConfig& cfg);

/// The process conditioned on eventual extinction, simulated exactly as the
/// Harris-Sevastyanov dual process.
SimEstimate conditional_on_extinction(const OffspringLaw& law, const ProcessParams& params, const SimConfig& cfg);

struct KTracePoint {
  int n;
  double mean_over_survival;  ///< m_dual^n / Q_hat_dual(n)
  double mean_over_survival_stderr;
  double conditional_mean;    ///< E_hat[Z_dual(n) | Z_dual(n) > 0]
  double conditional_mean_stderr;
  std::int64_t survivors;
};

/// m_dual^n / Q_hat_dual(n) and the conditional mean at each horizon; both
/// approach 1/K of the dual. Throws Error(InsufficientSurvivors) when a
/// horizon leaves fewer than 200 survivors.
std::vector<KTracePoint> k_from_simulation(const OffspringLaw& law, const ProcessParams& params,
                                           const SimConfig& cfg, const std::vector<int>& horizons);

}  // namespace gwk

#endif  // GWK_MONTECARLO_HPP
