// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: an INI-style file with sections. Every key has
// a default, and the defaults reproduce the reference setup (N=100, R=5,
// 4 iterations, sigma=1.0, alpha=0.0015, 2-4-4-2 sigmoid generator,
// U(-1,1) prior) against a simulated gaussian_bowl field of scale 2.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "humangan/baseline_gan.hpp"
#include "humangan/generator.hpp"
#include "humangan/oracle.hpp"
#include "humangan/trainer.hpp"

namespace humangan {

/// How the initial generator is accepted.
struct InitConfig {
    std::string predicate = "coverage";  // coverage | none
    std::size_t max_attempts = 5000;
    double acceptable_posterior = 0.2;     // a point "is acceptable" at or above this posterior
    double min_acceptable_fraction = 0.9;  // share of points that must be acceptable
    double max_mean_posterior = 0.5;       // keeps the start away from the field's mode
    double min_spread = 1.0;               // rms distance to centroid
};

struct SurveyConfig {
    std::array<Interval, 2> bounds{{{-4.0, 4.0}, {-4.0, 4.0}}};
    std::size_t resolution = 20;
    RaterConfig rater{0.1, 5, kSurveyRatersPerCell, 0};
};

struct BaselineConfig {
    std::size_t real_count = 500;
    GanConfig gan;
    double g_init_scale = 2.0;         // baseline generator init scale
    double density_radius = 2.5;       // density threshold = N(0, I) density at this radius
    double posterior_threshold = 0.2;
};

struct ServeConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;              // default: <out>/service
    std::size_t raters_per_query = 1;
    double batch_timeout_s = 86400.0;
    double assignment_timeout_s = 600.0;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;  // master seed; component seeds derive from it unless set
    TrainConfig train;
    GeneratorConfig generator{2, {4, 4}, 2, 4.0, 0};
    InitConfig init;
    PosteriorField field = GaussianBowl{2.0, {}};
    RaterConfig rater{0.0, 5, 1, 0};        // pairwise raters during training
    RaterConfig eval_rater{0.0, 5, 1, 0};   // absolute raters for closed/open evaluation
    SurveyConfig survey;
    BaselineConfig baseline;
    ServeConfig serve;
    std::size_t threads = 1;

    void validate() const;
};

/// Parses INI text. Unknown sections or keys and malformed values raise
/// ConfigError naming the offending key. Seeds not given explicitly derive
/// from [run] seed (or `seed_override` when set).
ExperimentConfig parse_config(const std::string& ini_text, std::optional<std::uint64_t> seed_override = {});
ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = {});

/// Fully resolved configuration in the same format; parse_config of the
/// result reproduces the configuration exactly.
std::string format_config(const ExperimentConfig& cfg);

/// Acceptance predicate for init_params built from cfg.init and cfg.field.
AcceptancePredicate make_init_predicate(const ExperimentConfig& cfg);

}  // namespace humangan
