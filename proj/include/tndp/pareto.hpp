#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace tndp {

// Works with any vector-like type exposing size() and operator[] over doubles.
// All objectives are minimized.

// a dominates b: no worse everywhere and strictly better somewhere.
template <class Vec>
bool dominates(const Vec& a, const Vec& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

// Fast non-dominated sort. Returns fronts of indices into `pop`, each front in
// ascending index order.
template <class Vec>
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Vec> pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(pop[p], pop[q])) {
        dominated[p].push_back(q);
        ++count[q];
      } else if (dominates(pop[q], pop[p])) {
        dominated[q].push_back(p);
        ++count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    if (count[p] == 0) fronts[0].push_back(p);
  while (!fronts.back().empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts.back()) {
      for (std::size_t q : dominated[p])
        if (--count[q] == 0) next.push_back(q);
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

template <class Vec>
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Vec>& pop) {
  return nondominated_sort(std::span<const Vec>(pop));
}

// Crowding distance of each member of one front. Per objective, the extreme
// members get +inf and interior members add the gap between their neighbours
// normalized by that objective's range; an objective with zero range
// contributes nothing, boundaries included.
template <class Vec>
std::vector<double> crowding_distance(std::span<const Vec> front) {
  const std::size_t n = front.size();
  std::vector<double> d(n, 0.0);
  if (n == 0) return d;
  if (n <= 2) return std::vector<double>(n, std::numeric_limits<double>::infinity());
  const std::size_t m = front[0].size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
    const double lo = front[order.front()][k];
    const double hi = front[order.back()][k];
    if (!(hi > lo)) continue;
    d[order.front()] = std::numeric_limits<double>::infinity();
    d[order.back()] = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      d[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / (hi - lo);
    }
  }
  return d;
}

template <class Vec>
std::vector<double> crowding_distance(const std::vector<Vec>& front) {
  return crowding_distance(std::span<const Vec>(front));
}

// Indices of the non-dominated members of `pop`, ascending.
template <class Vec>
std::vector<std::size_t> nondominated_indices(std::span<const Vec> pop) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pop.size() && !dominated; ++j) dominated = j != i && dominates(pop[j], pop[i]);
    if (!dominated) out.push_back(i);
  }
  return out;
}

}  // namespace tndp
