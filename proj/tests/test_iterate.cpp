#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gwk/asymptotics.hpp"
#include "gwk/iterate.hpp"

using namespace gwk;

namespace {

/// One-step transition matrix on states 0..cap by enumerating offspring tuples.
Eigen::MatrixXd one_step_matrix(const std::vector<double>& p, int cap) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(cap + 1, cap + 1);
  m(0, 0) = 1.0;
  // row i is the i-fold convolution of p
  Eigen::VectorXd row = Eigen::VectorXd::Zero(cap + 1);
  row[0] = 1.0;
  for (int i = 1; i <= cap; ++i) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(cap + 1);
    for (int a = 0; a <= cap; ++a) {
      for (int k = 0; k < static_cast<int>(p.size()) && a + k <= cap; ++k) next[a + k] += row[a] * p[k];
    }
    row = next;
    m.row(i) = row.transpose();
  }
  return m;
}

}  // namespace

TEST_CASE("iterate_f starts at s and applies f") {
  const auto law = OffspringLaw::pmf({0.5, 0.25, 0.25});
  const auto tr = iterate_f(law, 0.3, 3);
  REQUIRE(tr.rows.size() == 4);
  CHECK(tr.rows[0].f_n == 0.3);
  CHECK(tr.rows[1].f_n == gf_eval(law, 0.3).value);
  CHECK(tr.rows[2].f_n == gf_eval(law, tr.rows[1].f_n).value);
  CHECK(std::isnan(tr.rows[1].r_n));  // no fixed point supplied
}

TEST_CASE("R_n keeps relative precision far below rounding of f_n") {
  const auto law = OffspringLaw::pmf({0.75, 0.0, 0.25});
  const auto params = derive_params(law);
  const auto tr = iterate_f(law, 0.0, 120, params.fixed_point());
  const auto& last = tr.rows.back();
  CHECK(last.f_n == 1.0);      // direct iteration has rounded to q
  CHECK(last.r_n > 0.0);       // the recentred map has not
  CHECK(last.normalized == doctest::Approx(1.0 / 0.39290685275577959).epsilon(1e-12));
}

TEST_CASE("CenteredMap agrees with direct evaluation away from the fixed point") {
  for (const auto& law : {OffspringLaw::pmf({0.5, 0.25, 0.25}), OffspringLaw::pmf({0.25, 0.0, 0.75}),
                          OffspringLaw::pmf({0.1, 0.2, 0.3, 0.2, 0.2})}) {
    const auto params = derive_params(law);
    const CenteredMap g(law, params.fixed_point());
    CHECK(g(0.0) == 0.0);
    for (const double s : {0.0, 0.1, 0.5 * params.q, 0.9 * params.q}) {
      const double r = params.q - s;
      CHECK(g(r) == doctest::Approx(params.q - gf_eval(law, s).value).epsilon(1e-12));
    }
  }
}

TEST_CASE("iteration and the closed form agree on linear-fractional laws") {
  for (const auto& law : {OffspringLaw::linear_fractional(0.2, 0.5), OffspringLaw::linear_fractional(0.3, 0.6),
                          OffspringLaw::linear_fractional(0.1, 0.8)}) {
    for (const double s : {0.0, 0.3, 0.7}) {
      const auto tr = iterate_f(law, s, 60);
      for (const auto& row : tr.rows) CHECK(std::abs(row.f_n - lf_closed_form(law, s, row.n).f_n) <= 1e-10);
    }
  }
}

TEST_CASE("closed-form normalized iterate of the linear-fractional law") {
  // lf(0.2, 0.5): q = 1, m = 0.8, gamma = 5, so m^n/R_n(0) = 1 + 5(1 - m^n).
  const auto law = OffspringLaw::linear_fractional(0.2, 0.5);
  for (int n = 0; n <= 40; ++n) {
    const auto it = lf_closed_form(law, 0.0, n);
    const double mn = std::pow(0.8, n);
    CHECK(mn / it.r_n == doctest::Approx(1.0 + 5.0 * (1.0 - mn)).epsilon(1e-12));
  }
}

TEST_CASE("Moebius power matches repeated multiplication") {
  const auto law = OffspringLaw::linear_fractional(0.3, 0.6);
  const Eigen::Matrix2d one = lf_moebius_power(law, 1);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
  for (int n = 1; n <= 25; ++n) {
    acc = acc * one;
    const Eigen::Matrix2d closed = lf_moebius_power(law, n);
    CHECK((closed - acc).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, acc.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("critical linear-fractional laws have no closed form here") {
  const auto law = OffspringLaw::linear_fractional(0.25, 0.5);  // m = b/(1-c)^2 = 1
  CHECK_THROWS_AS(lf_closed_form(law, 0.0, 3), Error);
}

TEST_CASE("beta^n / R_n(s) is nondecreasing for s below q") {
  for (const auto& law : {OffspringLaw::pmf({0.75, 0.0, 0.25}), OffspringLaw::pmf({0.5, 0.25, 0.25}),
                          OffspringLaw::pmf({0.25, 0.0, 0.75}), OffspringLaw::pmf({0.2, 0.3, 0.1, 0.4})}) {
    const auto params = derive_params(law);
    for (const double frac : {0.0, 0.3, 0.6, 0.9}) {
      const auto tr = iterate_f(law, frac * params.q, 60, params.fixed_point());
      for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        CHECK(tr.rows[k].normalized >= tr.rows[k - 1].normalized * (1.0 - 1e-13));
      }
    }
  }
}

TEST_CASE("chain-rule derivatives of f_n") {
  const auto law = OffspringLaw::pmf({0.2, 0.3, 0.1, 0.4});
  const double s = 0.4, h = 1e-5;
  for (int n = 1; n <= 5; ++n) {
    const auto d = fn_derivatives(law, s, n);
    const auto at = [&](double x) { return iterate_f(law, x, n).rows.back().f_n; };
    CHECK(d.value == at(s));
    CHECK(d.first == doctest::Approx((at(s + h) - at(s - h)) / (2 * h)).epsilon(1e-8));
    CHECK(d.second == doctest::Approx((at(s + h) - 2 * at(s) + at(s - h)) / (h * h)).epsilon(1e-4));
    CHECK(fn_prime(law, s, n) == d.first);
  }
}

TEST_CASE("transition rows agree with powers of the enumerated one-step matrix") {
  const std::vector<double> p{0.5, 0.25, 0.25};
  const auto law = OffspringLaw::pmf(p);
  for (int i = 1; i <= 3; ++i) {
    for (int n = 1; n <= 3; ++n) {
      const int cap = i * (1 << n);  // largest reachable population, so no truncation
      const Eigen::MatrixXd m = one_step_matrix(p, cap);
      Eigen::MatrixXd mn = Eigen::MatrixXd::Identity(cap + 1, cap + 1);
      for (int k = 0; k < n; ++k) mn = mn * m;
      const Eigen::VectorXd row = transition_row(law, i, n, std::max(12, cap));
      for (int j = 0; j <= 12; ++j) CHECK(std::abs(row[j] - (j <= cap ? mn(i, j) : 0.0)) <= 1e-10);
    }
  }
}

TEST_CASE("transition rows refuse to drop visible mass") {
  const auto law = OffspringLaw::linear_fractional(0.2, 0.5);
  CHECK_THROWS_AS(transition_row(law, 3, 4, 5, 5), Error);
  CHECK_NOTHROW(transition_row(law, 3, 4, 300, 300));
}
