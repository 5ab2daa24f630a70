#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gwk/extrapolation.hpp"
#include "gwk/iterate.hpp"
#include "gwk/offspring.hpp"
#include "gwk/power_series.hpp"

using namespace gwk;

namespace {

Series series(std::initializer_list<double> c, Eigen::Index order) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index k = 0;
  for (const double x : c) v[k++] = x;
  return Series::from(v, order);
}

/// P(sum of i independent offspring counts = j), by enumerating every tuple.
double enumerate_one_step(const std::vector<double>& p, int i, int j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  double total = 0.0;
  for (int k = 0; k < static_cast<int>(p.size()) && k <= j; ++k) total += p[k] * enumerate_one_step(p, i - 1, j - k);
  return total;
}

/// n-step probability by summing over every intermediate population size.
double enumerate(const std::vector<double>& p, int i, int j, int n) {
  if (n == 0) return i == j ? 1.0 : 0.0;
  const int reach = i * static_cast<int>(p.size() - 1);
  double total = 0.0;
  for (int k = 0; k <= reach; ++k) {
    const double step = enumerate_one_step(p, i, k);
    if (step != 0.0) total += step * enumerate(p, k, j, n - 1);
  }
  return total;
}

}  // namespace

TEST_CASE("composition with the identity and first power are exact") {
  const auto f = Series::from(mass_vector(OffspringLaw::pmf({0.3, 0.1, 0.2, 0.4})), 16);
  CHECK(compose(f, Series::identity(16)) == f);
  CHECK(power(f, 1) == f);
  const auto lf = Series::from(mass_vector(OffspringLaw::linear_fractional(0.2, 0.5)), 64);
  CHECK(compose(lf, Series::identity(64)) == lf);
  CHECK(power(lf, 1) == lf);
}

TEST_CASE("products truncate to the shorter order and track lost mass") {
  const auto a = series({0.5, 0.5}, 3);
  const auto b = series({0.25, 0.5, 0.25}, 2);
  const auto c = multiply(a, b);
  CHECK(c.order() == 2);
  CHECK(c[0] == 0.125);
  CHECK(c[1] == 0.375);
  CHECK(c[2] == 0.375);
  CHECK(c.lost_mass() == doctest::Approx(0.125));
  CHECK(c.full_mass() == doctest::Approx(1.0));
}

TEST_CASE("powers of a probability generating function account for truncated mass") {
  const auto f = Series::from(mass_vector(OffspringLaw::pmf({0.2, 0.1, 0.3, 0.4})), 32);
  for (unsigned i = 1; i <= 12; ++i) {
    const auto fi = power(f, i);
    const double at_one = fi.evaluate(1.0);
    CHECK(at_one <= 1.0 + 1e-15);
    CHECK(at_one + fi.lost_mass() == doctest::Approx(1.0).epsilon(1e-13));
    if (3 * i <= 32) CHECK(at_one == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("power matches repeated multiplication") {
  const auto f = Series::from(mass_vector(OffspringLaw::pmf({0.5, 0.25, 0.25})), 20);
  Series slow = f;
  for (int k = 2; k <= 7; ++k) slow = multiply(slow, f);
  const auto fast = power(f, 7);
  CHECK((fast.coeffs() - slow.coeffs()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(power(f, 0), Error);
}

TEST_CASE("composition requires an inner constant in [0, 1)") {
  const auto f = series({0.5, 0.5}, 4);
  CHECK_THROWS_AS(compose(f, series({1.0}, 4)), Error);
  CHECK_THROWS_AS(compose(f, series({-0.1, 1.0}, 4)), Error);
  CHECK_NOTHROW(compose(f, series({0.0, 1.0}, 4)));
}

TEST_CASE("differentiation") {
  const auto d = differentiate(series({1.0, 2.0, 3.0}, 2));
  CHECK(d.order() == 1);
  CHECK(d[0] == 2.0);
  CHECK(d[1] == 6.0);
  CHECK_THROWS_AS(differentiate(series({1.0}, 0)), Error);
}

TEST_CASE("coefficients of iterated powers agree with tuple enumeration") {
  const std::vector<double> p{0.5, 0.25, 0.25};
  const auto law = OffspringLaw::pmf(p);
  for (int n = 0; n <= 2; ++n) {
    const auto fn = iterate_series(law, n, 16);
    for (unsigned i = 1; i <= 3; ++i) {
      const auto row = power(fn, i);
      for (int j = 0; j <= 4; ++j) CHECK(std::abs(row[j] - enumerate(p, static_cast<int>(i), j, n)) <= 1e-13);
    }
  }
}

TEST_CASE("Aitken removes a geometric error term") {
  AitkenAccelerator<double> acc;
  for (int n = 0; n < 6; ++n) acc.push(2.0 + 3.0 * std::pow(0.5, n));
  CHECK(acc.estimate() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(acc.change() <= 1e-14);
}

TEST_CASE("Aitken falls back to the raw term at noise level") {
  CHECK(aitken(1.0, 1.0, 1.0) == 1.0);
  CHECK(aitken(1.0, 1.0 + 1e-17, 1.0) == 1.0);
}
