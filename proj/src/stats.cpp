// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "humangan/errors.hpp"

namespace humangan {

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw UndefinedMetricError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles summarize(std::span<const double> values) {
    if (values.empty()) throw UndefinedMetricError("summary of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    Quartiles q;
    q.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    q.q1 = quantile_sorted(sorted, 0.25);
    q.median = quantile_sorted(sorted, 0.5);
    q.q3 = quantile_sorted(sorted, 0.75);
    return q;
}

double mean_pairwise_distance(std::span<const FeatureVector> points) {
    if (points.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) total += (points[i] - points[j]).norm();
    const double pairs = 0.5 * static_cast<double>(points.size()) * static_cast<double>(points.size() - 1);
    return total / pairs;
}

FeatureVector centroid(std::span<const FeatureVector> points) {
    if (points.empty()) throw UndefinedMetricError("centroid of an empty point set");
    FeatureVector c = FeatureVector::Zero(points.front().size());
    for (const auto& p : points) c += p;
    return c / static_cast<double>(points.size());
}

double rms_spread(std::span<const FeatureVector> points) {
    const FeatureVector c = centroid(points);
    double sq = 0.0;
    for (const auto& p : points) sq += (p - c).squaredNorm();
    return std::sqrt(sq / static_cast<double>(points.size()));
}

}  // namespace humangan
