// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// The feed-forward generator: d_z -> hidden... -> d_x with sigmoid hidden
// units and a linear output. Provides prior sampling, forward evaluation,
// the exact parameter Jacobian used to chain data-space gradients into
// parameter space, randomized initialization with an acceptance test, and
// the text checkpoint format.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "humangan/mlp.hpp"
#include "humangan/types.hpp"

namespace humangan {

struct GeneratorConfig {
    std::size_t d_z = 2;
    std::vector<std::size_t> hidden_sizes{4, 4};
    std::size_t d_x = 2;
    double init_scale = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
    std::vector<std::size_t> layer_sizes() const;
};

struct GeneratorParams {
    Mlp net;

    std::size_t d_z() const { return net.input_dim(); }
    std::size_t d_x() const { return net.output_dim(); }
    std::size_t parameter_count() const { return net.parameter_count(); }
    bool operator==(const GeneratorParams&) const = default;
};

/// n latent vectors with components i.i.d. uniform on [-1, 1).
std::vector<LatentVector> sample_prior(std::size_t n, std::size_t d_z, std::uint64_t seed);

FeatureVector forward(const GeneratorParams& params, const LatentVector& z);
std::vector<FeatureVector> forward(const GeneratorParams& params, std::span<const LatentVector> z);

/// d x_hat / d theta_G: d_x rows, one column per parameter in flat order.
Matrix jacobian(const GeneratorParams& params, const LatentVector& z);

/// One uniform draw on [-init_scale, init_scale] for every weight and bias.
GeneratorParams random_params(const GeneratorConfig& config, std::uint64_t seed);

using AcceptancePredicate = std::function<bool(const std::vector<FeatureVector>&)>;

struct InitResult {
    GeneratorParams params;
    std::size_t attempts = 0;
};

/// Draws random parameter sets (attempt a uses mix_seed(config.seed, a))
/// until the forward images of `prior` satisfy `accept`. Throws
/// InitializationError after max_attempts rejections.
InitResult init_params(const GeneratorConfig& config, const AcceptancePredicate& accept,
                       std::span<const LatentVector> prior, std::size_t max_attempts);

// -- checkpoints -------------------------------------------------------------

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct GeneratorCheckpoint {
    GeneratorParams params;
    std::uint64_t seed = 0;
    Metadata metadata;

    /// Value of a metadata key; throws ParseError if absent.
    const std::string& get(const std::string& key) const;
    bool has(const std::string& key) const;
};

std::string format_checkpoint(const GeneratorParams& params, std::uint64_t seed, const Metadata& metadata = {});
GeneratorCheckpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const GeneratorParams& params, std::uint64_t seed,
                     const Metadata& metadata = {});
GeneratorCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace humangan
