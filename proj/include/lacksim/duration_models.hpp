#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lacksim/random.hpp"

namespace lacksim {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ModelMoments {
  double mean = 0.0;           // E(D), seconds
  double std_dev = 0.0;        // sigma(D), seconds
  double cv = 0.0;             // sigma(D) / E(D)
  double second_moment = 0.0;  // E(D^2), seconds^2

  static ModelMoments from_raw(double mean, double second_moment);
  static ModelMoments from_mean_cv(double mean, double cv);
};

/// Two-parameter Weibull call-duration law, CCDF exp(-(x/lambda)^k).
class WeibullModel {
 public:
  WeibullModel(double shape, double scale);

  static WeibullModel exponential(double mean) { return {1.0, mean}; }

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  double pdf(double x) const;
  double ccdf(double x) const;
  ModelMoments moments() const;

  /// Inverse of the CCDF: the x with ccdf(x) == survival, survival in (0, 1].
  double inverse_ccdf(double survival) const;

 private:
  double shape_;
  double scale_;
};

/// Renormalized, truncated form of the three-branch empirical VoIP fit:
/// lognormal-form on [0, 27.5], two-term exponential mix on (27.5, 66.5],
/// lognormal-form on (66.5, 455]. Zero beyond 455 s.
///
/// Construction integrates the raw branches once and keeps cumulative
/// mass and first-moment tables on a fine cell grid, so ccdf and tail
/// moments are a table lookup plus one fixed Gauss-Kronrod panel.
class EmpiricalPiecewiseModel {
 public:
  static constexpr double kFirstBreak = 27.5;
  static constexpr double kSecondBreak = 66.5;
  static constexpr double kSupportMax = 455.0;
  static constexpr std::size_t kQuantileKnots = 4096;

  EmpiricalPiecewiseModel();

  /// Raw branch value of the published fit, before renormalization.
  static double raw_density(double x);

  double normalization() const noexcept { return normalization_; }

  double pdf(double x) const;
  double ccdf(double x) const;
  ModelMoments moments() const noexcept { return moments_; }

  /// Integral of x * pdf(x) over [t, 455].
  double tail_first_moment(double t) const;

  /// Quantile by linear interpolation on the equiprobable knot table.
  double quantile(double p) const;

  const std::vector<double>& quantile_knots() const noexcept { return knots_; }

 private:
  std::size_t cell_of(double x) const;
  double partial_mass(std::size_t cell, double x) const;
  double partial_first(std::size_t cell, double x) const;
  double invert_cdf(double p) const;

  double normalization_ = 1.0;
  std::vector<double> edges_;      // cell edges, size cells + 1
  std::vector<double> cum_mass_;   // normalized mass on [0, edges_[i]]
  std::vector<double> cum_first_;  // normalized first moment on [0, edges_[i]]
  std::vector<double> knots_;      // kQuantileKnots + 1 quantile knots
  ModelMoments moments_;
};

enum class ModelKind { weibull, empirical };

/// Value-semantic handle over the supported duration laws. Copies share the
/// immutable empirical tables.
class DurationModel {
 public:
  static DurationModel weibull(double shape, double scale);
  static DurationModel exponential(double mean);
  static DurationModel empirical();

  ModelKind kind() const noexcept;
  const WeibullModel* as_weibull() const noexcept;
  const EmpiricalPiecewiseModel* as_empirical() const noexcept;
  std::string label() const;

  double pdf(double x) const;
  double ccdf(double x) const;
  double cdf(double x) const { return 1.0 - ccdf(x); }
  const ModelMoments& moments() const noexcept { return moments_; }

  /// Upper end of the support (infinity for Weibull).
  double support_max() const noexcept;

  /// Inverse-transform sample given a uniform draw u in (0, 1].
  double sample_at(double u) const;
  double sample(Rng& rng) const { return sample_at(uniform_open_closed(rng)); }
  double sample(std::uint64_t seed) const;

 private:
  using Impl = std::variant<WeibullModel, std::shared_ptr<const EmpiricalPiecewiseModel>>;
  explicit DurationModel(Impl impl);

  Impl impl_;
  ModelMoments moments_;
};

/// The eight (k, lambda) pairs of the reference table, all with mean 117.31 s,
/// together with the coefficient of variation printed next to them.
struct Table1Entry {
  double shape;
  double scale;
  double printed_cv;
};

const std::vector<Table1Entry>& table1();

inline constexpr double kReferenceMeanDuration = 117.31;

}  // namespace lacksim
