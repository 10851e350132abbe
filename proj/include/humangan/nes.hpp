// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Natural-evolution-strategies gradient estimation from antithetic pairwise
// judgments. For each generated sample x_n and perturbation d_nr ~ N(0, s^2 I)
// a rater compares x_n + d_nr against x_n - d_nr and answers
//   dD_nr = D(x_n + d_nr) - D(x_n - d_nr)  in [-1, 1].
// The data-space gradient of V = sum_n D(x_n) is then estimated as
//   dV/dx_n = 1 / (2 s R) * sum_r dD_nr * d_nr
// and chained into generator parameters through the generator Jacobian.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "humangan/types.hpp"

namespace humangan {

struct NesConfig {
    double sigma = 1.0;   // perturbation standard deviation, feature units
    std::size_t r = 5;    // perturbations per generated sample
    std::uint64_t seed = 0;

    void validate() const;
};

struct PerturbationSet {
    std::size_t n = 0;
    std::size_t r = 0;
    std::size_t d = 0;
    std::vector<Vector> deltas;  // index n * r + r_index

    const Vector& at(std::size_t sample, std::size_t pert) const { return deltas[sample * r + pert]; }
};

struct PairQuery {
    std::string query_id;
    std::size_t sample_index = 0;
    std::size_t perturbation_index = 0;
    FeatureVector plus_point;   // x_n + d_nr, presented first
    FeatureVector minus_point;  // x_n - d_nr, presented second
};

struct RatingResponse {
    std::string query_id;
    double delta_d = 0.0;
};

/// n * config.r vectors with i.i.d. Normal(0, sigma^2) components.
PerturbationSet sample_perturbations(std::size_t n, const NesConfig& config, std::size_t d_x);

/// "<prefix>n<sample>-r<perturbation>"
std::string make_query_id(std::string_view prefix, std::size_t sample, std::size_t perturbation);

std::vector<PairQuery> build_queries(std::span<const FeatureVector> samples, const PerturbationSet& perts,
                                     std::string_view id_prefix = "");

/// Per-sample data-space gradient estimates. Responses are matched to
/// queries by query_id; a missing or duplicated id raises
/// IncompleteBatchError.
std::vector<Vector> estimate_data_gradient(std::span<const FeatureVector> samples, const PerturbationSet& perts,
                                           std::span<const PairQuery> queries,
                                           std::span<const RatingResponse> responses, const NesConfig& config);

/// sum_n data_grads[n]^T * jacobians[n]
Vector chain_to_params(std::span<const Vector> data_grads, std::span<const Matrix> jacobians);

}  // namespace humangan
