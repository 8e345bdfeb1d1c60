#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tndp/objectives.hpp"

namespace tndp {

struct RatingScale {
  double min{1.0};
  double max{10.0};
  bool contains(double r) const { return r >= min && r <= max; }
};

struct RatingRecord {
  std::string network_id;
  std::string rater_id;
  double rating{0.0};
};

struct RatingSummary {
  double mean{0.0};
  std::size_t count{0};
};

// Mean rating per network. A later record from the same rater for the same
// network replaces the earlier one.
std::map<std::string, RatingSummary> aggregate_ratings(std::span<const RatingRecord> records);

// Intercept followed by one weight per objective.
struct WeightVector {
  std::array<double, kObjectiveCount + 1> w{};

  double intercept() const { return w[0]; }
  double operator[](std::size_t i) const { return w[i]; }
  double& operator[](std::size_t i) { return w[i]; }
  static constexpr std::size_t size() { return kObjectiveCount + 1; }
  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

struct FitSample {
  ObjectiveVector objectives;
  double avg_rating{0.0};
};

struct FitResult {
  WeightVector weights;
  std::vector<double> residuals;  // X w - t, per sample
  double residual_norm{0.0};
};

inline double rating_target(double avg_rating, double max_rating) { return max_rating - avg_rating; }

inline constexpr std::size_t kMinFitSamples = kObjectiveCount + 2;

// Least squares for X w = t with rows (1, TL, UD, IVT, ANT) and
// t_i = max_rating - avg_rating_i. Throws DataError with fewer than
// kMinFitSamples samples or a rank-deficient design matrix.
FitResult fit_weights(std::span<const FitSample> samples, double max_rating);

double scalarize_weighted(const ObjectiveVector& v, const WeightVector& w);

struct ObjectiveBounds {
  std::array<double, kObjectiveCount> min{};
  std::array<double, kObjectiveCount> max{};

  // Componentwise min/max over a non-empty set; throws DataError when empty.
  static ObjectiveBounds of(std::span<const ObjectiveVector> points);
};

// Sum of min-max normalized objectives; an objective with max == min adds 0.
double scalarize_uniform(const ObjectiveVector& v, const ObjectiveBounds& bounds);

}  // namespace tndp
