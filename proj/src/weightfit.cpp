#include "tndp/weightfit.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tndp/error.hpp"

namespace tndp {

std::map<std::string, RatingSummary> aggregate_ratings(std::span<const RatingRecord> records) {
  std::map<std::pair<std::string, std::string>, double> latest;
  for (const auto& r : records) latest[{r.network_id, r.rater_id}] = r.rating;
  std::map<std::string, RatingSummary> out;
  for (const auto& [key, rating] : latest) {
    auto& s = out[key.first];
    s.mean += rating;
    ++s.count;
  }
  for (auto& [id, s] : out) s.mean /= static_cast<double>(s.count);
  return out;
}

FitResult fit_weights(std::span<const FitSample> samples, double max_rating) {
  constexpr std::size_t p = WeightVector::size();
  const std::size_t n = samples.size();
  if (n < kMinFitSamples) {
    throw DataError("weight fitting needs at least " + std::to_string(kMinFitSamples) + " rated networks, got " +
                    std::to_string(n));
  }
  if (!std::isfinite(max_rating)) throw ConfigError("max rating must be finite");

  // Column-major design matrix and target.
  std::vector<std::vector<double>> a(p, std::vector<double>(n));
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[0][i] = 1.0;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) a[k + 1][i] = samples[i].objectives[k];
    t[i] = rating_target(samples[i].avg_rating, max_rating);
    for (std::size_t j = 0; j < p; ++j)
      if (!std::isfinite(a[j][i])) throw DataError("non-finite objective value in rated network");
    if (!std::isfinite(t[i])) throw DataError("non-finite rating");
  }
  const auto x = a;

  // TL and IVT are orders of magnitude larger than UD and ANT, so columns are
  // equilibrated before factorizing; the solution is mapped back afterwards.
  std::array<double, p> scale{};
  for (std::size_t j = 0; j < p; ++j) {
    double norm = 0.0;
    for (double v : a[j]) norm = std::hypot(norm, v);
    scale[j] = norm > 0.0 ? norm : 1.0;
    for (double& v : a[j]) v /= scale[j];
  }

  // Householder QR, applying each reflector to t as we go.
  std::array<double, p> diag{};
  for (std::size_t j = 0; j < p; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm = std::hypot(norm, a[j][i]);
    const double alpha = a[j][j] > 0.0 ? -norm : norm;
    diag[j] = alpha;
    if (norm == 0.0) continue;
    std::vector<double> v(a[j].begin() + static_cast<std::ptrdiff_t>(j), a[j].end());
    v[0] -= alpha;
    double vv = 0.0;
    for (double e : v) vv += e * e;
    if (vv == 0.0) continue;
    const auto reflect = [&](std::vector<double>& col) {
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += v[i - j] * col[i];
      const double f = 2.0 * dot / vv;
      for (std::size_t i = j; i < n; ++i) col[i] -= f * v[i - j];
    };
    for (std::size_t k = j + 1; k < p; ++k) reflect(a[k]);
    reflect(t);
  }

  double rmax = 0.0;
  for (double d : diag) rmax = std::max(rmax, std::abs(d));
  for (std::size_t j = 0; j < p; ++j) {
    if (!(std::abs(diag[j]) > 1e-10 * rmax)) {
      throw DataError("design matrix is rank-deficient (column " + std::to_string(j) +
                      "); rate more networks with varied objectives or normalize the objectives");
    }
  }

  std::array<double, p> z{};
  for (std::size_t jj = p; jj-- > 0;) {
    double s = t[jj];
    for (std::size_t k = jj + 1; k < p; ++k) s -= a[k][jj] * z[k];
    z[jj] = s / diag[jj];
  }

  FitResult res;
  for (std::size_t j = 0; j < p; ++j) res.weights[j] = z[j] / scale[j];
  res.residuals.resize(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < p; ++j) fit += x[j][i] * res.weights[j];
    res.residuals[i] = fit - rating_target(samples[i].avg_rating, max_rating);
    sq += res.residuals[i] * res.residuals[i];
  }
  res.residual_norm = std::sqrt(sq);
  return res;
}

double scalarize_weighted(const ObjectiveVector& v, const WeightVector& w) {
  double s = w[0];
  for (std::size_t k = 0; k < kObjectiveCount; ++k) s += w[k + 1] * v[k];
  return s;
}

ObjectiveBounds ObjectiveBounds::of(std::span<const ObjectiveVector> points) {
  if (points.empty()) throw DataError("normalization bounds need at least one objective vector");
  ObjectiveBounds b;
  b.min = b.max = points.front().values;
  for (const auto& p : points) {
    for (std::size_t k = 0; k < kObjectiveCount; ++k) {
      b.min[k] = std::min(b.min[k], p[k]);
      b.max[k] = std::max(b.max[k], p[k]);
    }
  }
  return b;
}

double scalarize_uniform(const ObjectiveVector& v, const ObjectiveBounds& bounds) {
  double s = 0.0;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    const double span = bounds.max[k] - bounds.min[k];
    if (span > 0.0) s += (v[k] - bounds.min[k]) / span;
  }
  return s;
}

}  // namespace tndp
