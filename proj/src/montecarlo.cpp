#include "gwk/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "gwk/philox.hpp"

namespace gwk {

namespace {

constexpr std::int64_t kBlockSize = 4096;
constexpr std::int64_t kInverseCdfLimit = 32;

struct Sampler {
  std::vector<double> masses;
  std::vector<double> cdf;
  std::vector<double> suffix;  // sum_{j >= k} p_j

  explicit Sampler(const OffspringLaw& law) : masses(law.masses().begin(), law.masses().end()) {
    cdf.resize(masses.size());
    std::partial_sum(masses.begin(), masses.end(), cdf.begin());
    cdf.back() = 2.0;  // every u in [0, 1) lands inside the support
    suffix.resize(masses.size());
    double acc = 0.0;
    for (std::size_t k = masses.size(); k-- > 0;) suffix[k] = acc += masses[k];
  }

  std::int64_t draw_one(PhiloxStream& rng) const {
    const double u = rng.uniform();
    return std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
  }

  std::int64_t next_generation(std::int64_t z, PhiloxStream& rng) const {
    std::int64_t next = 0;
    if (z <= kInverseCdfLimit) {
      for (std::int64_t i = 0; i < z; ++i) next += draw_one(rng);
      return next;
    }
    std::int64_t remaining = z;
    const std::size_t last = masses.size() - 1;
    for (std::size_t k = 0; k <= last && remaining > 0; ++k) {
      std::int64_t count = remaining;
      if (k < last) {
        const double p = std::clamp(masses[k] / suffix[k], 0.0, 1.0);
        count = std::binomial_distribution<std::int64_t>(remaining, p)(rng);
      }
      next += static_cast<std::int64_t>(k) * count;
      remaining -= count;
    }
    return next;
  }
};

struct BlockTally {
  std::int64_t survivors = 0;
  std::int64_t capped = 0;
  double sum_z = 0.0;
  double sum_z2 = 0.0;
  std::vector<std::int64_t> histogram;
};

BlockTally run_block(const Sampler& sampler, const SimConfig& cfg, std::int64_t first, std::int64_t last) {
  BlockTally t;
  t.histogram.assign(static_cast<std::size_t>(cfg.n) + 1, 0);
  for (std::int64_t r = first; r < last; ++r) {
    PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(r));
    std::int64_t z = 1;
    int extinct_at = 0;
    bool capped = false;
    for (int g = 1; g <= cfg.n; ++g) {
      z = sampler.next_generation(z, rng);
      if (z == 0) {
        extinct_at = g;
        break;
      }
      if (z > cfg.population_cap) {
        capped = true;
        break;
      }
    }
    if (capped) {
      ++t.capped;
      continue;
    }
    ++t.histogram[static_cast<std::size_t>(extinct_at)];
    if (z > 0) {
      ++t.survivors;
      const auto zd = static_cast<double>(z);
      t.sum_z += zd;
      t.sum_z2 += zd * zd;
    }
  }
  return t;
}

}  // namespace

SimEstimate simulate(const OffspringLaw& law, const SimConfig& cfg) {
  if (cfg.replicates < 1 || cfg.n < 0) throw Error(ErrorKind::Domain, "simulation needs replicates >= 1 and n >= 0");
  const Sampler sampler(law);
  const std::int64_t blocks = (cfg.replicates + kBlockSize - 1) / kBlockSize;
  std::vector<BlockTally> tallies(static_cast<std::size_t>(blocks));

  unsigned workers = cfg.workers != 0 ? cfg.workers : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, blocks));
  std::atomic<std::int64_t> next_block{0};
  auto work = [&] {
    for (std::int64_t b; (b = next_block.fetch_add(1)) < blocks;) {
      const std::int64_t first = b * kBlockSize;
      tallies[static_cast<std::size_t>(b)] =
          run_block(sampler, cfg, first, std::min(first + kBlockSize, cfg.replicates));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  SimEstimate est{};
  est.extinction_time_histogram.assign(static_cast<std::size_t>(cfg.n) + 1, 0);
  double sum_z = 0.0, sum_z2 = 0.0;
  for (const auto& t : tallies) {
    est.survivors += t.survivors;
    est.capped += t.capped;
    sum_z += t.sum_z;
    sum_z2 += t.sum_z2;
    for (std::size_t h = 0; h < t.histogram.size(); ++h) est.extinction_time_histogram[h] += t.histogram[h];
  }
  if (static_cast<double>(est.capped) > 1e-3 * static_cast<double>(cfg.replicates)) {
    throw Error(ErrorKind::PopulationCapExceeded,
                std::to_string(est.capped) + " replicates exceeded the population cap");
  }
  est.replicates = cfg.replicates - est.capped;
  const auto reps = static_cast<double>(est.replicates);
  const auto surv = static_cast<double>(est.survivors);
  est.survival_hat = reps > 0 ? surv / reps : 0.0;
  est.survival_stderr = reps > 0 ? std::sqrt(est.survival_hat * (1.0 - est.survival_hat) / reps) : 0.0;
  if (est.survivors > 0) {
    est.conditional_mean_hat = sum_z / surv;
    if (est.survivors > 1) {
      const double var = std::max(0.0, (sum_z2 - surv * est.conditional_mean_hat * est.conditional_mean_hat) /
                                           (surv - 1.0));
      est.conditional_mean_stderr = std::sqrt(var / surv);
    }
  }
  return est;
}

SimEstimate conditional_on_extinction(const OffspringLaw& law, const ProcessParams& params, const SimConfig& cfg) {
  return simulate(harris_sevastyanov(law, params.q), cfg);
}

std::vector<KTracePoint> k_from_simulation(const OffspringLaw& law, const ProcessParams& params,
                                           const SimConfig& cfg, const std::vector<int>& horizons) {
  const auto dual = harris_sevastyanov(law, params.q);
  std::vector<KTracePoint> out;
  for (const int n : horizons) {
    SimConfig c = cfg;
    c.n = n;
    const auto est = simulate(dual, c);
    if (est.survivors < 200) {
      throw Error(ErrorKind::InsufficientSurvivors,
                  "horizon " + std::to_string(n) + " left " + std::to_string(est.survivors) + " survivors");
    }
    const double mn = std::pow(params.beta, n);
    const double qhat = est.survival_hat;
    out.push_back({n, mn / qhat, mn * est.survival_stderr / (qhat * qhat), est.conditional_mean_hat,
                   est.conditional_mean_stderr, est.survivors});
  }
  return out;
}

}  // namespace gwk
