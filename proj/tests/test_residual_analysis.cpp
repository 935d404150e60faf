#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lacksim/residual_analysis.hpp"
#include "oracles.hpp"

using namespace lacksim;
using doctest::Approx;

namespace {

// Brute-force E(D|D>t) = t + (1/ccdf(t)) * integral of ccdf over [t, upper],
// with the Weibull tail truncated where exp(-(x/lambda)^k) < 1e-300.
double brute_conditional_mean(const DurationModel& model, double t) {
  double upper = 455.0;
  if (const auto* w = model.as_weibull()) upper = w->scale() * std::pow(690.0, 1.0 / w->shape());
  double tail = 0.0;
  double lo = t;
  // Panels widen geometrically away from t, where the integrand carries most of its mass.
  for (double hi : {t + 50.0, t + 500.0, t + 5e3, t + 5e4, t + 5e5, t + 5e6, upper}) {
    hi = std::min(hi, upper);
    if (hi <= lo) continue;
    tail += oracle::simpson([&](double x) { return model.ccdf(x); }, lo, hi, 200000);
    lo = hi;
  }
  return t + tail / model.ccdf(t);
}

std::vector<DurationModel> all_models() {
  std::vector<DurationModel> out;
  for (const auto& e : table1()) out.push_back(DurationModel::weibull(e.shape, e.scale));
  out.push_back(DurationModel::empirical());
  return out;
}

}  // namespace

TEST_SUITE("residual_analysis") {

TEST_CASE("mean residual examples") {
  CHECK(mean_residual_from_cv(117.31, 1.0) == Approx(117.31).epsilon(1e-15));
  // (2.37^2 + 1) / 2 * 117.31
  CHECK(mean_residual_from_cv(117.31, 2.37) == Approx(388.1142695).epsilon(1e-12));
  CHECK(mean_residual_from_cv(117.31, 0.32) == Approx(64.661272).epsilon(1e-12));
  CHECK_THROWS_AS(mean_residual_from_cv(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(mean_residual(ModelMoments{}), DomainError);
}

TEST_CASE("mean residual: E(D^2)/2E(D) equals the C_v form") {
  for (double cv : {0.32, 1.0, 2.37, 3.14}) {
    const auto m = ModelMoments::from_mean_cv(117.31, cv);
    CHECK(mean_residual(m) == Approx(mean_residual_from_cv(117.31, cv)).epsilon(1e-12));
  }
  for (const auto& model : all_models()) {
    const auto& m = model.moments();
    CHECK(mean_residual(m) == Approx(mean_residual_from_cv(m.mean, m.cv)).epsilon(1e-12));
  }
}

TEST_CASE("conditional mean examples") {
  const auto e = DurationModel::exponential(117.31);
  CHECK(conditional_mean(e, 50.0) == Approx(167.31).epsilon(1e-12));
  CHECK(conditional_mean(e, 0.0) == Approx(117.31).epsilon(1e-12));

  const auto w = DurationModel::weibull(0.5, 58.65);
  const double v = conditional_mean(w, 100.0);
  CHECK(v > 217.31);
  CHECK(v >= 100.0);
  CHECK(v <= 117.3 / w.ccdf(100.0));
  // Frozen from scipy QUADPACK on the tail integral.
  CHECK(v == Approx(370.4665759883663).epsilon(1e-10));
}

TEST_CASE("conditional mean: frozen oracle values") {
  struct Row {
    double k, lambda, t, expected;
  };
  const Row rows[] = {
      {0.4, 35.3, 100.0, 471.46664664144026},  {0.4, 35.3, 300.0, 858.8214136688957},
      {3.4, 130.57, 200.0, 212.10288463139784}, {3.4, 130.57, 300.0, 305.01694743037035},
      {2.0, 132.37, 100.0, 159.2339760022106},
  };
  for (const auto& r : rows) {
    CAPTURE(r.k);
    CAPTURE(r.t);
    CHECK(conditional_mean(DurationModel::weibull(r.k, r.lambda), r.t) ==
          Approx(r.expected).epsilon(1e-9));
  }
  const auto emp = DurationModel::empirical();
  CHECK(conditional_mean(emp, 0.0) == Approx(74.3590867040298).epsilon(1e-9));
  CHECK(conditional_mean(emp, 60.0) == Approx(162.6397065267603).epsilon(1e-9));
  CHECK(conditional_mean(emp, 200.0) == Approx(296.76170441945555).epsilon(1e-9));
  CHECK(conditional_mean(emp, 400.0) == Approx(426.35572310714105).epsilon(1e-9));
}

TEST_CASE("closed form, generic quadrature and brute force agree") {
  for (const auto& model : all_models()) {
    CAPTURE(model.label());
    for (double t : {0.0, 25.0, 117.31, 250.0}) {
      CAPTURE(t);
      const double fast = conditional_mean(model, t);
      CHECK(conditional_mean_by_quadrature(model, t) == Approx(fast).epsilon(1e-8));
      CHECK(brute_conditional_mean(model, t) == Approx(fast).epsilon(1e-7));
    }
  }
}

TEST_CASE("memorylessness of the exponential") {
  const auto e = DurationModel::exponential(117.31);
  for (double t : {0.0, 10.0, 50.0, 117.31, 300.0}) {
    CHECK(std::abs(conditional_mean(e, t) - (t + 117.31)) < 1e-6 * 117.31);
  }
}

TEST_CASE("bounds hold on a grid for every model") {
  for (const auto& model : all_models()) {
    CAPTURE(model.label());
    const double t_end = std::min(300.0, largest_valid_time(model));
    for (int i = 0; i < 100; ++i) {
      const double t = t_end * i / 99.0;
      const auto b = conditional_mean_bounds(model, t);
      const double v = conditional_mean(model, t);
      CHECK(b.lower == t);
      CHECK(b.lower <= v);
      CHECK(v <= b.upper * (1 + 1e-12));
      if (t > 0) {
        CHECK(b.lower < v);
        CHECK(v < b.upper);
      }
    }
  }
}

TEST_CASE("bounds examples and the Weibull closed-form upper bound") {
  const auto e = DurationModel::exponential(117.31);
  const auto b0 = conditional_mean_bounds(e, 0.0);
  CHECK(b0.lower == 0.0);
  CHECK(b0.upper == Approx(117.31).epsilon(1e-12));
  CHECK(conditional_mean_bounds(e, 117.31).upper == Approx(318.8816412965306).epsilon(1e-12));
  const auto r = DurationModel::weibull(2.0, 132.37);
  CHECK(conditional_mean_bounds(r, 132.37).upper == Approx(318.88125563263486).epsilon(1e-12));
  CHECK(weibull_upper_bound(*r.as_weibull(), 132.37) ==
        Approx(conditional_mean_bounds(r, 132.37).upper).epsilon(1e-9));
}

TEST_CASE("monotone mean residual life: nondecreasing for k < 1, nonincreasing for k > 1") {
  for (const auto& e : table1()) {
    if (e.shape == 1.0) continue;
    CAPTURE(e.shape);
    const auto model = DurationModel::weibull(e.shape, e.scale);
    const double t_end = std::min(300.0, largest_valid_time(model));
    double prev = conditional_mean(model, 0.0);
    for (int i = 1; i <= 60; ++i) {
      const double t = t_end * i / 60.0;
      const double mrl = conditional_mean(model, t) - t;
      if (e.shape < 1.0) {
        CHECK(mrl >= prev - 1e-9);
      } else {
        CHECK(mrl <= prev + 1e-9);
      }
      prev = mrl;
    }
  }
}

TEST_CASE("conditional mean at zero is the model mean") {
  for (const auto& model : all_models()) {
    CHECK(conditional_mean(model, 0.0) == Approx(model.moments().mean).epsilon(1e-10));
  }
}

TEST_CASE("tail underflow names the largest valid time") {
  const auto e = DurationModel::exponential(117.31);
  const double limit = largest_valid_time(e);
  CHECK(limit == Approx(117.31 * -std::log(kTailFloor)).epsilon(1e-12));
  CHECK_NOTHROW(conditional_mean(e, limit * 0.999));
  try {
    conditional_mean(e, 5000.0);
    FAIL("expected TailUnderflowError");
  } catch (const TailUnderflowError& err) {
    CHECK(err.largest_valid_time() == Approx(limit));
    CHECK(std::string(err.what()).find("largest valid t") != std::string::npos);
  }
  const auto emp = DurationModel::empirical();
  CHECK(largest_valid_time(emp) < 455.0);
  CHECK(largest_valid_time(emp) > 454.0);
  CHECK_THROWS_AS(conditional_mean(emp, 455.0), TailUnderflowError);
  CHECK_THROWS_AS(conditional_mean(e, -1.0), DomainError);
}

TEST_CASE("approximation evaluated as printed") {
  const auto printed = ApproxCoefficients::as_printed();
  CHECK(approx_conditional_mean(printed, 1.0, 0.0) == Approx(1.91).epsilon(1e-14));
  CHECK(approx_conditional_mean(printed, 4.0, 10.0) == Approx(25.87).epsilon(1e-14));
  CHECK_FALSE(printed.is_fit());
}

TEST_CASE("refit on the exponential recovers the exact line") {
  const auto fit = refit_approximation(DurationModel::exponential(117.31), 300.0);
  CHECK(fit.b == 1.0);
  CHECK(fit.a * 1.0 + fit.c == Approx(117.31).epsilon(1e-9));
  CHECK(fit.a / fit.c == Approx(1.32 / 0.59));
  CHECK(fit.fit_residual < 1e-6);
  CHECK(fit.is_fit());
}

TEST_CASE("refit reports its residual for heavy-tailed and empirical models") {
  const auto heavy = refit_approximation(DurationModel::weibull(0.4, 35.3), 300.0);
  CHECK(std::isfinite(heavy.a));
  CHECK(std::isfinite(heavy.c));
  CHECK(heavy.fit_residual > 0.0);
  const auto emp = refit_approximation(DurationModel::empirical(), 300.0);
  CHECK(std::isfinite(emp.a));
  CHECK(std::isfinite(emp.fit_residual));
  CHECK_THROWS_AS(refit_approximation(DurationModel::exponential(117.31), 0.0), FitError);
  CHECK_THROWS_AS(refit_approximation(DurationModel::exponential(117.31), 300.0, 1), FitError);
}

TEST_CASE("precomputed conditional mean curve") {
  const auto model = DurationModel::weibull(0.6, 77.97);
  const ConditionalMeanCurve curve(model, 300.0, 301);
  REQUIRE(curve.points().size() == 301);
  for (const auto& p : curve.points()) {
    CHECK(p.t <= p.value);
  }
  CHECK(curve.at(150.0) == Approx(conditional_mean(model, 150.0)).epsilon(1e-12));
  CHECK(curve.at(150.5) == Approx(conditional_mean(model, 150.5)).epsilon(1e-4));
  CHECK_THROWS_AS(curve.at(301.0), DomainError);
}

}  // TEST_SUITE
