#include "lacksim/residual_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "quadrature.hpp"

namespace lacksim {

namespace {

void check_time(const DurationModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("elapsed time must be >= 0, got {}", t));
  if (model.ccdf(t) < kTailFloor) throw TailUnderflowError(t, largest_valid_time(model));
}

}  // namespace

TailUnderflowError::TailUnderflowError(double t, double largest_valid_t)
    : std::domain_error(fmt::format(
          "survival probability at t={} is below {:g}; largest valid t is {:.6f}", t,
          kTailFloor, largest_valid_t)),
      t_(t),
      largest_valid_t_(largest_valid_t) {}

double mean_residual(const ModelMoments& moments) {
  if (!(moments.mean > 0.0)) throw DomainError("mean residual needs a positive mean");
  return moments.second_moment / (2.0 * moments.mean);
}

double mean_residual_from_cv(double mean, double cv) {
  if (!(mean > 0.0)) throw DomainError("mean residual needs a positive mean");
  return (cv * cv + 1.0) / 2.0 * mean;
}

double largest_valid_time(const DurationModel& model) {
  if (const auto* w = model.as_weibull()) return w->inverse_ccdf(kTailFloor);
  double lo = 0.0;
  double hi = model.support_max();
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = (lo + hi) / 2;
    (model.ccdf(mid) >= kTailFloor ? lo : hi) = mid;
  }
  return lo;
}

double conditional_mean(const DurationModel& model, double t) {
  check_time(model, t);
  if (const auto* w = model.as_weibull()) {
    const double k = w->shape();
    const double z = std::pow(t / w->scale(), k);
    // Tail integral = lambda * Gamma(1 + 1/k) * Q(1/k, z); divide by ccdf = e^{-z}.
    const double tail = w->scale() * boost::math::tgamma(1.0 + 1.0 / k) *
                        boost::math::gamma_q(1.0 / k, z);
    return t + std::exp(z) * tail;
  }
  const auto* e = model.as_empirical();
  return e->tail_first_moment(t) / e->ccdf(t);
}

double tail_integral(const DurationModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("elapsed time must be >= 0, got {}", t));
  auto survival = [&model](double x) { return model.ccdf(x); };
  if (model.as_weibull()) {
    return detail::integrate_adaptive(survival, t, std::numeric_limits<double>::infinity());
  }
  // Split at the branch breaks, where the survival function has a kink.
  double total = 0.0;
  double lo = t;
  for (double brk : {EmpiricalPiecewiseModel::kFirstBreak, EmpiricalPiecewiseModel::kSecondBreak,
                     EmpiricalPiecewiseModel::kSupportMax}) {
    if (brk <= lo) continue;
    total += detail::integrate_adaptive(survival, lo, brk);
    lo = brk;
  }
  return total;
}

double conditional_mean_by_quadrature(const DurationModel& model, double t) {
  check_time(model, t);
  return t + tail_integral(model, t) / model.ccdf(t);
}

ConditionalMeanBounds conditional_mean_bounds(const DurationModel& model, double t) {
  check_time(model, t);
  return {t, model.moments().mean / model.ccdf(t)};
}

double weibull_upper_bound(const WeibullModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("elapsed time must be >= 0, got {}", t));
  const double z = std::pow(t / model.scale(), model.shape());
  return std::exp(z) * model.scale() * boost::math::tgamma(1.0 + 1.0 / model.shape());
}

double approx_conditional_mean(const ApproxCoefficients& coeffs, double cv, double t) {
  return coeffs.a * cv + coeffs.b * t * std::sqrt(cv) + coeffs.c;
}

ApproxCoefficients refit_approximation(const DurationModel& model, double t_max,
                                       std::size_t grid_points) {
  if (!(t_max > 0.0) || grid_points < 2) {
    throw FitError(fmt::format("degenerate fit grid: t_max={}, points={}", t_max, grid_points));
  }
  const double cv = model.moments().cv;
  const double slope = std::sqrt(cv);
  const auto n = static_cast<double>(grid_points - 1);

  std::vector<double> ts(grid_points);
  std::vector<double> exact(grid_points);
  double intercept_sum = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    ts[i] = t_max * static_cast<double>(i) / n;
    exact[i] = conditional_mean(model, ts[i]);
    intercept_sum += exact[i] - slope * ts[i];
  }
  const double intercept = intercept_sum / static_cast<double>(grid_points);

  const ApproxCoefficients printed = ApproxCoefficients::as_printed();
  const double base = printed.a * cv + printed.c;
  ApproxCoefficients fit;
  fit.a = printed.a * intercept / base;
  fit.b = 1.0;
  fit.c = printed.c * intercept / base;

  double worst = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double approx = approx_conditional_mean(fit, cv, ts[i]);
    worst = std::max(worst, std::abs(approx - exact[i]) / exact[i]);
  }
  if (!std::isfinite(worst)) throw FitError("fit produced non-finite residual");
  fit.fit_residual = worst;
  return fit;
}

ConditionalMeanCurve::ConditionalMeanCurve(const DurationModel& model, double t_max,
                                           std::size_t points)
    : t_max_(t_max) {
  if (!(t_max > 0.0) || points < 2) {
    throw DomainError(fmt::format("curve grid needs t_max > 0 and >= 2 points"));
  }
  points_.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    points_.push_back({t, conditional_mean(model, t)});
  }
}

double ConditionalMeanCurve::at(double t) const {
  if (!(t >= 0.0 && t <= t_max_)) {
    throw DomainError(fmt::format("t={} outside curve range [0, {}]", t, t_max_));
  }
  const double step = t_max_ / static_cast<double>(points_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t / step), points_.size() - 2);
  const double frac = (t - points_[i].t) / step;
  return points_[i].value + frac * (points_[i + 1].value - points_[i].value);
}

}  // namespace lacksim
