#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lacksim/duration_models.hpp"

namespace lacksim {

/// Conditional quantities are not evaluated where the survival function drops
/// below this floor; the ratio becomes numerically meaningless there.
inline constexpr double kTailFloor = 1e-12;

class TailUnderflowError : public std::domain_error {
 public:
  TailUnderflowError(double t, double largest_valid_t);
  double time() const noexcept { return t_; }
  double largest_valid_time() const noexcept { return largest_valid_t_; }

 private:
  double t_;
  double largest_valid_t_;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean residual life at a random instant, E(D^2) / (2 E(D)).
double mean_residual(const ModelMoments& moments);

/// Same quantity from the first two moments expressed as mean and C_v:
/// (C_v^2 + 1) / 2 * E(D).
double mean_residual_from_cv(double mean, double cv);

/// Largest t whose survival probability is still at or above kTailFloor.
double largest_valid_time(const DurationModel& model);

/// E(D | D > t), the expected total duration of a call that has already
/// lasted t seconds. Weibull uses the incomplete-Gamma closed form of the
/// tail integral; the empirical model uses its tabulated first moment.
double conditional_mean(const DurationModel& model, double t);

/// Integral of the survival function over [t, inf), by adaptive quadrature.
double tail_integral(const DurationModel& model, double t);

/// E(D | D > t) through the generic route t + tail_integral(t) / ccdf(t).
/// Slower than conditional_mean; kept as an independent cross-check.
double conditional_mean_by_quadrature(const DurationModel& model, double t);

struct ConditionalMeanBounds {
  double lower;  // t
  double upper;  // E(D) / ccdf(t)
};

ConditionalMeanBounds conditional_mean_bounds(const DurationModel& model, double t);

/// Closed-form upper bound for Weibull: exp((t/lambda)^k) * lambda * Gamma(1 + 1/k).
double weibull_upper_bound(const WeibullModel& model, double t);

/// Coefficients of the linear approximation a*C_v + b*t*sqrt(C_v) + c.
struct ApproxCoefficients {
  double a = 1.32;  // seconds
  double b = 1.0;   // multiplier on the t*sqrt(C_v) slope
  double c = 0.59;  // seconds
  double fit_residual = -1.0;  // max relative error over the fit window; < 0 if never fit

  static ApproxCoefficients as_printed() { return {}; }
  bool is_fit() const noexcept { return fit_residual >= 0.0; }
};

double approx_conditional_mean(const ApproxCoefficients& coeffs, double cv, double t);

/// Rescales the intercept of the approximation so it best matches the exact
/// conditional mean in least squares over a uniform grid on [0, t_max].
///
/// The slope stays at sqrt(C_v) and a : c keeps the printed 1.32 : 0.59 ratio,
/// because a single curve only identifies the combined intercept a*C_v + c.
/// fit_residual reports the worst relative error on the grid.
ApproxCoefficients refit_approximation(const DurationModel& model, double t_max = 300.0,
                                       std::size_t grid_points = 64);

/// Precomputed (t, E(D|D>t)) samples on a uniform grid.
class ConditionalMeanCurve {
 public:
  struct Point {
    double t;
    double value;
  };

  ConditionalMeanCurve(const DurationModel& model, double t_max, std::size_t points);

  const std::vector<Point>& points() const noexcept { return points_; }
  double t_max() const noexcept { return t_max_; }

  /// Linear interpolation between grid points; throws outside [0, t_max].
  double at(double t) const;

 private:
  std::vector<Point> points_;
  double t_max_;
};

}  // namespace lacksim
