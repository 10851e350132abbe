// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Simulated discriminators. A PosteriorField is an analytic stand-in for
// the raters' acceptance probability D(x); simulated raters add Gaussian
// noise to the true value and snap it to the nearest answer level of a
// 5-point scale.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "humangan/nes.hpp"
#include "humangan/types.hpp"

namespace humangan {

/// exp(-|x - center|^2 / (2 scale^2)); an empty center means the origin.
struct GaussianBowl {
    double scale = 1.0;
    FeatureVector center;
};

/// exp(-(|x| - radius)^2 / (2 width^2))
struct Ring {
    double radius = 2.0;
    double width = 0.5;
};

/// `value` inside the closed box [lower, upper], 0 outside. Empty bounds
/// make the box unbounded, i.e. a constant field.
struct Plateau {
    double value = 1.0;
    FeatureVector lower;
    FeatureVector upper;
};

/// Pointwise max of two bowls.
struct Bimodal {
    GaussianBowl first;
    GaussianBowl second;
};

using PosteriorField = std::variant<GaussianBowl, Ring, Plateau, Bimodal>;

std::string describe(const PosteriorField& field);
void validate(const PosteriorField& field);

/// Field value in [0, 1]. Throws ValidationError for non-finite x.
double true_posterior(const PosteriorField& field, const FeatureVector& x);

struct RaterConfig {
    double noise_std = 0.1;
    std::size_t levels = 5;
    std::size_t rater_count = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Raters per grid cell in a survey unless configured otherwise.
inline constexpr std::size_t kSurveyRatersPerCell = 5;

/// Nearest of `levels` evenly spaced values on [lo, hi]; inputs outside the
/// range snap to the end levels; exact midpoints go to the level with the
/// smaller magnitude.
double quantize(double value, double lo, double hi, std::size_t levels);

// 5-point answer scales. Pairwise: 1 = first stimulus clearly more
// acceptable (+1.0) ... 3 = equal (0.0) ... 5 = second clearly more
// acceptable (-1.0). Absolute: 1 = very unacceptable (0.00) ... 5 = very
// acceptable (1.00).
double pairwise_score_to_delta(int score);
int delta_to_pairwise_score(double delta_d);
double absolute_score_to_posterior(int score);

/// Mean over cfg.rater_count simulated raters of quantize(true dD + noise).
/// Noise is drawn from a stream keyed by (cfg.seed, query_id) so results are
/// independent of evaluation order. Identical stimuli always yield 0.
RatingResponse rate_pairwise(const PosteriorField& field, const PairQuery& query, const RaterConfig& cfg);

/// Mean over raters of quantize(D(x) + noise) on the {0, .25, .5, .75, 1}
/// scale. `stream` selects the noise stream.
double rate_absolute(const PosteriorField& field, const FeatureVector& x, const RaterConfig& cfg,
                     std::uint64_t stream = 0);

struct Interval {
    double min = 0.0;
    double max = 0.0;
};

struct PosteriorGrid {
    std::array<Interval, 2> bounds;
    std::size_t resolution = 0;
    std::size_t raters_per_cell = 0;
    std::vector<double> values;  // index i * resolution + j; i along dim 0

    double center(std::size_t dim, std::size_t index) const;
    double at(std::size_t i, std::size_t j) const { return values[i * resolution + j]; }
};

PosteriorGrid grid_survey(const PosteriorField& field, const std::array<Interval, 2>& bounds,
                          std::size_t resolution, const RaterConfig& cfg);

/// Columns: dim0,dim1,posterior,raters
void write_grid_csv(std::ostream& out, const PosteriorGrid& grid);

}  // namespace humangan
