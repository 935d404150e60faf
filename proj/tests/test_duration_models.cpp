#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lacksim/duration_models.hpp"
#include "oracles.hpp"

using namespace lacksim;
using doctest::Approx;

TEST_SUITE("duration_models") {

TEST_CASE("construction rejects non-positive parameters") {
  CHECK_THROWS_AS(WeibullModel(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(WeibullModel(1.0, -2.0), DomainError);
  CHECK_THROWS_AS(WeibullModel(std::nan(""), 1.0), DomainError);
  CHECK_NOTHROW(WeibullModel(0.4, 35.3));
}

TEST_CASE("pdf examples") {
  const auto exp_model = DurationModel::exponential(117.31);
  CHECK(exp_model.pdf(0.0) == Approx(1.0 / 117.31).epsilon(1e-14));
  CHECK(exp_model.pdf(0.0) == Approx(0.008524).epsilon(1e-4));
  CHECK(DurationModel::weibull(2.0, 132.37).pdf(0.0) == 0.0);
  CHECK(DurationModel::empirical().pdf(500.0) == 0.0);
  CHECK_THROWS_AS(exp_model.pdf(-1.0), DomainError);
}

TEST_CASE("ccdf examples") {
  CHECK(DurationModel::exponential(117.31).ccdf(117.31) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(DurationModel::weibull(2.0, 132.37).ccdf(132.37) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(DurationModel::empirical().ccdf(0.0) == Approx(1.0).epsilon(1e-12));
  CHECK(DurationModel::empirical().ccdf(455.0) == 0.0);
  CHECK_THROWS_AS(DurationModel::empirical().ccdf(-0.5), DomainError);
}

TEST_CASE("k = 1 agrees pointwise with the analytic exponential") {
  const auto w = DurationModel::weibull(1.0, 117.31);
  for (double x : {0.0, 0.5, 10.0, 117.31, 400.0, 2000.0}) {
    const double ccdf = std::exp(-x / 117.31);
    CHECK(w.ccdf(x) == Approx(ccdf).epsilon(1e-12));
    CHECK(w.pdf(x) == Approx(ccdf / 117.31).epsilon(1e-12));
  }
}

TEST_CASE("moments follow the Gamma closed forms") {
  const auto m1 = WeibullModel(1.0, 117.31).moments();
  CHECK(m1.mean == Approx(117.31).epsilon(1e-12));
  CHECK(m1.cv == Approx(1.0).epsilon(1e-12));

  // C_v for k = 0.5 is sqrt(Gamma(5) / Gamma(3)^2 - 1) = sqrt(5).
  const auto m05 = WeibullModel(0.5, 58.65).moments();
  CHECK(m05.cv == Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(m05.mean == Approx(117.3).epsilon(1e-12));

  // Gamma(1.5) = sqrt(pi) / 2; C_v = sqrt(4/pi - 1).
  const auto m2 = WeibullModel(2.0, 132.37).moments();
  CHECK(m2.mean == Approx(132.37 * std::sqrt(std::numbers::pi) / 2).epsilon(1e-12));
  CHECK(m2.cv == Approx(std::sqrt(4.0 / std::numbers::pi - 1.0)).epsilon(1e-12));
  CHECK(m2.cv == Approx(0.5227).epsilon(1e-4));

  for (const auto& m : {m1, m05, m2}) {
    CHECK(m.cv == Approx(m.std_dev / m.mean));
    CHECK(m.second_moment == Approx(m.std_dev * m.std_dev + m.mean * m.mean));
  }
}

TEST_CASE("every reference table entry has mean 117.31 and the printed C_v") {
  for (const auto& e : table1()) {
    CAPTURE(e.shape);
    const auto m = WeibullModel(e.shape, e.scale).moments();
    CHECK(std::abs(m.mean - 117.31) / 117.31 < 0.005);
    CHECK(std::abs(m.cv - e.printed_cv) <= 0.01);
  }
}

TEST_CASE("empirical fit: normalization, mass and moments against the closed-form oracle") {
  const auto& emp = *DurationModel::empirical().as_empirical();
  CHECK(emp.normalization() == Approx(oracle::kEmpiricalZ).epsilon(1e-10));
  CHECK(emp.normalization() ==
        Approx(oracle::empirical_raw_mass(0.0, 455.0)).epsilon(1e-10));

  // Renormalized density integrates to one. Breaks belong to the left branch,
  // so each later piece starts one ulp to the right of its break.
  auto pdf = [&](double x) { return emp.pdf(x); };
  const double total = oracle::simpson(pdf, 0.0, 27.5) +
                       oracle::simpson(pdf, std::nextafter(27.5, 66.5), 66.5) +
                       oracle::simpson(pdf, std::nextafter(66.5, 455.0), 455.0);
  CHECK(total == Approx(1.0).epsilon(1e-6));

  for (double x : {0.001, 1.0, 10.0, 27.5, 30.0, 66.5, 100.0, 300.0, 454.0}) {
    CAPTURE(x);
    CHECK(emp.ccdf(x) == Approx(oracle::empirical_ccdf(x)).epsilon(1e-10));
    CHECK(emp.pdf(x) >= 0.0);
  }
  CHECK(emp.moments().mean == Approx(oracle::kEmpiricalMean).epsilon(1e-9));
  CHECK(emp.moments().second_moment == Approx(oracle::kEmpiricalSecondMoment).epsilon(1e-9));
}

TEST_CASE("branch boundaries evaluate with the left branch") {
  const double at_first = EmpiricalPiecewiseModel::raw_density(27.5);
  const double d = std::log(27.5) - 3.8;
  CHECK(at_first == Approx(std::exp(-d * d / 4.805) / (1.55 * 27.5 * std::sqrt(2 * std::numbers::pi))));
  CHECK(EmpiricalPiecewiseModel::raw_density(66.5) ==
        Approx(0.000114 * std::exp(-0.00114 * 66.5) + 0.027252 * std::exp(-0.03028 * 66.5)));
  CHECK(EmpiricalPiecewiseModel::raw_density(455.0) > 0.0);
  CHECK(EmpiricalPiecewiseModel::raw_density(455.0001) == 0.0);
}

TEST_CASE("property: pdf integrates to ccdf differences") {
  std::mt19937_64 rng(20240611);
  const std::vector<DurationModel> models = {
      DurationModel::weibull(0.4, 35.3), DurationModel::weibull(1.0, 117.31),
      DurationModel::weibull(3.4, 130.57), DurationModel::empirical()};
  for (const auto& model : models) {
    CAPTURE(model.label());
    const double hi = model.kind() == ModelKind::empirical ? 455.0 : 600.0;
    std::uniform_real_distribution<double> u(0.0, hi);
    for (int trial = 0; trial < 25; ++trial) {
      double a = u(rng);
      double b = u(rng);
      if (a > b) std::swap(a, b);
      // Stay off the k < 1 pole at zero and split at the empirical breaks.
      a = std::max(a, 1e-3);
      double integral = 0.0;
      double lo = a;
      for (double brk : {27.5, 66.5, b}) {
        if (brk <= lo || brk > b) continue;
        const double from = lo == 27.5 || lo == 66.5 ? std::nextafter(lo, brk) : lo;
        integral += oracle::simpson([&](double x) { return model.pdf(x); }, from, brk, 40000);
        lo = brk;
      }
      CHECK(std::abs(integral - (model.ccdf(a) - model.ccdf(b))) < 1e-8);
      CHECK(model.ccdf(a) >= model.ccdf(b));
    }
  }
}

TEST_CASE("inverse-transform sampling") {
  const auto e = DurationModel::exponential(117.31);
  CHECK(e.sample_at(std::exp(-1.0)) == Approx(117.31).epsilon(1e-12));
  const auto r = DurationModel::weibull(2.0, 132.37);
  CHECK(r.sample_at(std::exp(-1.0)) == Approx(132.37).epsilon(1e-12));
  CHECK(e.sample(42) == e.sample(42));
  CHECK(e.sample(42) != e.sample(43));
  CHECK_THROWS_AS(e.sample_at(0.0), DomainError);
}

TEST_CASE("empirical quantile table") {
  const auto& emp = *DurationModel::empirical().as_empirical();
  const auto& knots = emp.quantile_knots();
  REQUIRE(knots.size() == EmpiricalPiecewiseModel::kQuantileKnots + 1);
  CHECK(knots.front() == 0.0);
  CHECK(knots.back() == 455.0);
  for (std::size_t i = 1; i < knots.size(); ++i) REQUIRE(knots[i] >= knots[i - 1]);
  // Knots are equiprobable.
  for (std::size_t i : {1UL, 512UL, 2048UL, 4000UL, 4095UL}) {
    const double p = static_cast<double>(i) / 4096.0;
    CHECK(1.0 - oracle::empirical_ccdf(knots[i]) == Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("empirical sampling: mean and coarse chi-square") {
  const auto model = DurationModel::empirical();
  Rng rng(7);
  constexpr int kDraws = 100000;
  const std::vector<double> edges = {0, 5, 10, 20, 27.5, 40, 66.5, 100, 150, 200, 300, 455};
  std::vector<int> counts(edges.size() - 1, 0);
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = model.sample(rng);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 455.0);
    sum += x;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      if (x < edges[b + 1] || b + 2 == edges.size()) {
        ++counts[b];
        break;
      }
    }
  }
  CHECK(std::abs(sum / kDraws - oracle::kEmpiricalMean) / oracle::kEmpiricalMean < 0.02);

  double chi2 = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double expected =
        kDraws * (oracle::empirical_ccdf(edges[b]) - oracle::empirical_ccdf(edges[b + 1]));
    chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  // 10 degrees of freedom; upper 1% point is 23.209.
  CHECK(chi2 < 23.209);
}

}  // TEST_SUITE
