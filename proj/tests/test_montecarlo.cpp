#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gwk/iterate.hpp"
#include "gwk/montecarlo.hpp"
#include "gwk/philox.hpp"
#include "oracle_values.hpp"

using namespace gwk;

namespace {

bool same(const SimEstimate& a, const SimEstimate& b) {
  return a.survival_hat == b.survival_hat && a.survival_stderr == b.survival_stderr &&
         a.conditional_mean_hat == b.conditional_mean_hat &&
         a.conditional_mean_stderr == b.conditional_mean_stderr && a.survivors == b.survivors &&
         a.extinction_time_histogram == b.extinction_time_histogram;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("distinct streams differ and a stream replays") {
  PhiloxStream a(1, 0), b(1, 1), c(1, 0);
  const auto x = a(), y = b(), z = c();
  CHECK(x != y);
  CHECK(x == z);
}

TEST_CASE("zero generations") {
  const auto est = simulate(OffspringLaw::pmf({0.5, 0.25, 0.25}), {0, 1000, 3});
  CHECK(est.survival_hat == 1.0);
  CHECK(est.conditional_mean_hat == 1.0);
  CHECK(est.survival_stderr == 0.0);
}

TEST_CASE("one generation of a fair coin") {
  const auto est = simulate(OffspringLaw::pmf({0.5, 0.0, 0.5}), {1, 200000, 5});
  CHECK(std::abs(est.survival_hat - 0.5) <= 4.0 * est.survival_stderr);
  CHECK(est.conditional_mean_hat == 2.0);
}

TEST_CASE("survival at twelve generations against the exact value") {
  const OffspringLaw laws[] = {OffspringLaw::pmf({0.75, 0.0, 0.25}), OffspringLaw::pmf({0.5, 0.25, 0.25}),
                               OffspringLaw::pmf({0.25, 0.0, 0.75}), OffspringLaw::linear_fractional(0.2, 0.5)};
  const double exact[] = {oracle::LawA::survival_12, oracle::LawB::survival_12, oracle::LawC::survival_12,
                          oracle::LawLf::survival_12};
  for (int k = 0; k < 4; ++k) {
    const auto est = simulate(laws[k], {12, 200000, 17});
    CHECK(std::abs(est.survival_hat - exact[k]) <= 4.0 * est.survival_stderr);
  }
}

TEST_CASE("results do not depend on the number of workers") {
  const auto law = OffspringLaw::pmf({0.25, 0.0, 0.75});
  SimConfig cfg{12, 30000, 99};
  cfg.workers = 1;
  const auto one = simulate(law, cfg);
  for (const unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    CHECK(same(one, simulate(law, cfg)));
  }
  cfg.seed = 100;
  CHECK_FALSE(same(one, simulate(law, cfg)));
}

TEST_CASE("conditioning on extinction is the dual process") {
  const auto law = OffspringLaw::pmf({0.25, 0.0, 0.75});
  const auto params = derive_params(law);
  const SimConfig cfg{12, 100000, 4};
  const auto cond = conditional_on_extinction(law, params, cfg);
  CHECK(same(cond, simulate(OffspringLaw::pmf({0.75, 0.0, 0.25}), cfg)));
  CHECK(std::abs(cond.survival_hat - oracle::LawC::dual_survival_12) <= 4.0 * cond.survival_stderr);
}

TEST_CASE("extinction-time histogram") {
  const auto est = simulate(OffspringLaw::pmf({0.5, 0.25, 0.25}), {8, 50000, 2});
  REQUIRE(est.extinction_time_histogram.size() == 9);
  const auto total =
      std::accumulate(est.extinction_time_histogram.begin(), est.extinction_time_histogram.end(), std::int64_t{0});
  CHECK(total == est.replicates);
  CHECK(est.extinction_time_histogram[0] == est.survivors);
  // P(H = 1) = p_0.
  CHECK(static_cast<double>(est.extinction_time_histogram[1]) / 50000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("K from simulated survival of the dual") {
  const auto law = OffspringLaw::pmf({0.75, 0.0, 0.25});
  const auto params = derive_params(law);
  const auto trace = k_from_simulation(law, params, {0, 1000000, 21}, {4, 8});
  REQUIRE(trace.size() == 2);
  const auto& last = trace.back();
  CHECK(last.n == 8);
  CHECK(last.survivors >= 200);
  const double target = 1.0 / oracle::LawA::K_hat;
  CHECK(std::abs(last.mean_over_survival - target) <= 4.0 * last.mean_over_survival_stderr);
  // 1/K_theory = 2 is many standard errors away.
  CHECK(std::abs(last.mean_over_survival - 2.0) > 4.0 * last.mean_over_survival_stderr);
  CHECK(std::abs(last.conditional_mean - target) <= 4.0 * last.conditional_mean_stderr + 0.05);
}

TEST_CASE("too few survivors is an error") {
  const auto law = OffspringLaw::pmf({0.75, 0.0, 0.25});
  CHECK_THROWS_AS(k_from_simulation(law, derive_params(law), {0, 1000, 1}, {30}), Error);
}

TEST_CASE("population cap") {
  SimConfig cfg{30, 2000, 1};
  cfg.population_cap = 1000;
  CHECK_THROWS_AS(simulate(OffspringLaw::pmf({0.01, 0.0, 0.99}), cfg), Error);
}

TEST_CASE("simulated conditional mean against exact iterates") {
  const auto law = OffspringLaw::linear_fractional(0.2, 0.5);
  const auto params = derive_params(law);
  const auto trace = k_from_simulation(law, params, {0, 1000000, 5}, {1, 15});
  REQUIRE(trace.size() == 2);
  for (const auto& pt : trace) {
    const double survival = 1.0 - iterate_f(law, 0.0, pt.n).rows.back().f_n;
    const double exact = std::pow(0.8, pt.n) / survival;
    CHECK(std::abs(pt.conditional_mean - exact) <= 3.0 * pt.conditional_mean_stderr);
    CHECK(std::abs(pt.mean_over_survival - exact) <= 3.0 * pt.mean_over_survival_stderr);
  }
}
