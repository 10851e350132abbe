// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace humangan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in the generator's latent (prior noise) space.
using LatentVector = Eigen::VectorXd;
/// A point in the normalized feature space the discriminator judges.
using FeatureVector = Eigen::VectorXd;

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (seed, salt); used to derive independent
/// streams (per iteration, per query id) from one user-facing seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// FNV-1a over the bytes of s.
std::uint64_t hash_string(std::string_view s);

/// Shortest round-trippable decimal form of v ("%.17g").
std::string format_double(double v);

bool all_finite(const Vector& v);

}  // namespace humangan
