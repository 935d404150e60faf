#include "lacksim/duration_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "quadrature.hpp"

namespace lacksim {

namespace {

void require_nonnegative(double x) {
  if (!(x >= 0.0)) {
    throw DomainError(fmt::format("duration must be >= 0, got {}", x));
  }
}

// Lognormal-form branch of the empirical fit, mu = 3.8, sigma = 1.55
// (the printed exponent denominator 4.805 is 2 * 1.55^2).
double lognormal_branch(double x) {
  if (x <= 0.0) return 0.0;
  const double d = std::log(x) - 3.8;
  return std::exp(-(d * d) / 4.805) / (1.55 * x * std::sqrt(2.0 * std::numbers::pi));
}

double exponential_mix_branch(double x) {
  return 0.000114 * std::exp(-0.00114 * x) + 0.027252 * std::exp(-0.03028 * x);
}

constexpr double kCellWidth = 0.05;

}  // namespace

ModelMoments ModelMoments::from_raw(double mean, double second_moment) {
  ModelMoments m;
  m.mean = mean;
  m.second_moment = second_moment;
  m.std_dev = std::sqrt(std::max(0.0, second_moment - mean * mean));
  m.cv = m.std_dev / mean;
  return m;
}

ModelMoments ModelMoments::from_mean_cv(double mean, double cv) {
  ModelMoments m;
  m.mean = mean;
  m.cv = cv;
  m.std_dev = cv * mean;
  m.second_moment = m.std_dev * m.std_dev + mean * mean;
  return m;
}

// ---------------------------------------------------------------------------
// WeibullModel

WeibullModel::WeibullModel(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError(fmt::format("Weibull shape k must be > 0, got {}", shape));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError(fmt::format("Weibull scale lambda must be > 0, got {}", scale));
  }
}

double WeibullModel::pdf(double x) const {
  require_nonnegative(x);
  const double z = x / scale_;
  if (shape_ == 1.0) return std::exp(-z) / scale_;
  return shape_ / scale_ * std::pow(z, shape_ - 1.0) * std::exp(-std::pow(z, shape_));
}

double WeibullModel::ccdf(double x) const {
  require_nonnegative(x);
  if (shape_ == 1.0) return std::exp(-x / scale_);
  return std::exp(-std::pow(x / scale_, shape_));
}

ModelMoments WeibullModel::moments() const {
  const double mean = scale_ * boost::math::tgamma(1.0 + 1.0 / shape_);
  const double second = scale_ * scale_ * boost::math::tgamma(1.0 + 2.0 / shape_);
  return ModelMoments::from_raw(mean, second);
}

double WeibullModel::inverse_ccdf(double survival) const {
  if (!(survival > 0.0 && survival <= 1.0)) {
    throw DomainError(fmt::format("survival probability must be in (0, 1], got {}", survival));
  }
  return scale_ * std::pow(-std::log(survival), 1.0 / shape_);
}

// ---------------------------------------------------------------------------
// EmpiricalPiecewiseModel

double EmpiricalPiecewiseModel::raw_density(double x) {
  require_nonnegative(x);
  if (x <= kFirstBreak) return lognormal_branch(x);
  if (x <= kSecondBreak) return exponential_mix_branch(x);
  if (x <= kSupportMax) return lognormal_branch(x);
  return 0.0;
}

EmpiricalPiecewiseModel::EmpiricalPiecewiseModel() {
  // Cells never straddle a branch break, so every panel sees a smooth integrand.
  const double breaks[] = {0.0, kFirstBreak, kSecondBreak, kSupportMax};
  edges_.push_back(0.0);
  for (int b = 0; b < 3; ++b) {
    const double lo = breaks[b];
    const double hi = breaks[b + 1];
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / kCellWidth));
    for (std::size_t i = 1; i <= cells; ++i) {
      edges_.push_back(i == cells ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                                 static_cast<double>(cells));
    }
  }
  const std::size_t n = edges_.size() - 1;

  std::vector<double> mass(n);
  std::vector<double> first(n);
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = edges_[i];
    const double b = edges_[i + 1];
    // Evaluate the branch by cell midpoint so boundary nodes never flip branch.
    const bool lognormal = (a + b) / 2 < kFirstBreak || (a + b) / 2 > kSecondBreak;
    auto f = [lognormal](double x) {
      return lognormal ? lognormal_branch(x) : exponential_mix_branch(x);
    };
    mass[i] = detail::integrate_panel(f, a, b);
    first[i] = detail::integrate_panel([&](double x) { return x * f(x); }, a, b);
    second += detail::integrate_panel([&](double x) { return x * x * f(x); }, a, b);
  }

  double z = 0.0;
  for (double m : mass) z += m;
  normalization_ = z;

  // Tail-accumulated tables: value at edge i covers [edges_[i], 455].
  cum_mass_.assign(n + 1, 0.0);
  cum_first_.assign(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    cum_mass_[i] = cum_mass_[i + 1] + mass[i] / z;
    cum_first_[i] = cum_first_[i + 1] + first[i] / z;
  }
  moments_ = ModelMoments::from_raw(cum_first_[0], second / z);

  knots_.resize(kQuantileKnots + 1);
  knots_.front() = 0.0;
  knots_.back() = kSupportMax;
  for (std::size_t i = 1; i < kQuantileKnots; ++i) {
    knots_[i] = invert_cdf(static_cast<double>(i) / static_cast<double>(kQuantileKnots));
  }
}

std::size_t EmpiricalPiecewiseModel::cell_of(double x) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  auto idx = static_cast<std::size_t>(std::distance(edges_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, edges_.size() - 2);
}

double EmpiricalPiecewiseModel::partial_mass(std::size_t cell, double x) const {
  return detail::integrate_panel([](double s) { return raw_density(s); }, edges_[cell], x) /
         normalization_;
}

double EmpiricalPiecewiseModel::partial_first(std::size_t cell, double x) const {
  return detail::integrate_panel([](double s) { return s * raw_density(s); }, edges_[cell],
                                 x) /
         normalization_;
}

double EmpiricalPiecewiseModel::pdf(double x) const { return raw_density(x) / normalization_; }

double EmpiricalPiecewiseModel::ccdf(double x) const {
  require_nonnegative(x);
  if (x >= kSupportMax) return 0.0;
  const std::size_t c = cell_of(x);
  return std::clamp(cum_mass_[c] - partial_mass(c, x), 0.0, 1.0);
}

double EmpiricalPiecewiseModel::tail_first_moment(double t) const {
  require_nonnegative(t);
  if (t >= kSupportMax) return 0.0;
  const std::size_t c = cell_of(t);
  return std::max(0.0, cum_first_[c] - partial_first(c, t));
}

double EmpiricalPiecewiseModel::invert_cdf(double p) const {
  const double target = 1.0 - p;  // survival
  // cum_mass_ is decreasing; find the cell with cum_mass_[c] >= target > cum_mass_[c + 1].
  auto it = std::lower_bound(cum_mass_.begin(), cum_mass_.end(), target,
                             [](double lhs, double rhs) { return lhs > rhs; });
  auto idx = static_cast<std::size_t>(std::distance(cum_mass_.begin(), it));
  const std::size_t c = std::min(idx == 0 ? 0 : idx - 1, edges_.size() - 2);
  auto g = [&](double x) { return cum_mass_[c] - partial_mass(c, x) - target; };
  const double lo = edges_[c];
  const double hi = edges_[c + 1];
  const double glo = g(lo);
  const double ghi = g(hi);
  if (glo <= 0.0) return lo;
  if (ghi >= 0.0) return hi;
  std::uintmax_t iterations = 100;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iterations);
  return (a + b) / 2;
}

double EmpiricalPiecewiseModel::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(fmt::format("probability must be in [0, 1], got {}", p));
  }
  const double pos = p * static_cast<double>(kQuantileKnots);
  const auto i = std::min(static_cast<std::size_t>(pos), kQuantileKnots - 1);
  const double frac = pos - static_cast<double>(i);
  return knots_[i] + frac * (knots_[i + 1] - knots_[i]);
}

// ---------------------------------------------------------------------------
// DurationModel

DurationModel::DurationModel(Impl impl) : impl_(std::move(impl)) {
  moments_ = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, WeibullModel>) {
          return m.moments();
        } else {
          return m->moments();
        }
      },
      impl_);
}

DurationModel DurationModel::weibull(double shape, double scale) {
  return DurationModel(WeibullModel(shape, scale));
}

DurationModel DurationModel::exponential(double mean) {
  return DurationModel(WeibullModel::exponential(mean));
}

DurationModel DurationModel::empirical() {
  // The tables are identical for every instance; build them once.
  static const auto shared = std::make_shared<const EmpiricalPiecewiseModel>();
  return DurationModel(shared);
}

ModelKind DurationModel::kind() const noexcept {
  return std::holds_alternative<WeibullModel>(impl_) ? ModelKind::weibull
                                                     : ModelKind::empirical;
}

const WeibullModel* DurationModel::as_weibull() const noexcept {
  return std::get_if<WeibullModel>(&impl_);
}

const EmpiricalPiecewiseModel* DurationModel::as_empirical() const noexcept {
  const auto* p = std::get_if<std::shared_ptr<const EmpiricalPiecewiseModel>>(&impl_);
  return p ? p->get() : nullptr;
}

std::string DurationModel::label() const {
  if (const auto* w = as_weibull()) {
    return fmt::format("weibull(k={:g},lambda={:g})", w->shape(), w->scale());
  }
  return "empirical";
}

double DurationModel::pdf(double x) const {
  if (const auto* w = as_weibull()) return w->pdf(x);
  return as_empirical()->pdf(x);
}

double DurationModel::ccdf(double x) const {
  if (const auto* w = as_weibull()) return w->ccdf(x);
  return as_empirical()->ccdf(x);
}

double DurationModel::support_max() const noexcept {
  return as_weibull() ? std::numeric_limits<double>::infinity()
                      : EmpiricalPiecewiseModel::kSupportMax;
}

double DurationModel::sample_at(double u) const {
  if (const auto* w = as_weibull()) return w->inverse_ccdf(u);
  if (!(u > 0.0 && u <= 1.0)) {
    throw DomainError(fmt::format("uniform draw must be in (0, 1], got {}", u));
  }
  return as_empirical()->quantile(1.0 - u);
}

double DurationModel::sample(std::uint64_t seed) const {
  Rng rng(seed);
  return sample(rng);
}

const std::vector<Table1Entry>& table1() {
  static const std::vector<Table1Entry> entries = {
      {3.4, 130.57, 0.32}, {2.0, 132.37, 0.52}, {1.2, 124.71, 0.84}, {1.0, 117.31, 1.00},
      {0.8, 103.54, 1.26}, {0.6, 77.97, 1.76},  {0.5, 58.65, 2.23},  {0.4, 35.3, 3.14},
  };
  return entries;
}

}  // namespace lacksim
