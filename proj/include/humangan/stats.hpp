// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "humangan/types.hpp"

namespace humangan {

/// Quantile with linear interpolation between order statistics
/// (h = (n - 1) p). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);

struct Quartiles {
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

Quartiles summarize(std::span<const double> values);

double mean_pairwise_distance(std::span<const FeatureVector> points);

/// Root-mean-square distance to the centroid.
double rms_spread(std::span<const FeatureVector> points);

FeatureVector centroid(std::span<const FeatureVector> points);

}  // namespace humangan
