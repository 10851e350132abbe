// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conventional GAN with a network discriminator, trained on real data only.
// It exists for contrast: whatever it learns stays inside the real-data
// distribution, which outside_mass makes measurable.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "humangan/generator.hpp"
#include "humangan/mlp.hpp"
#include "humangan/oracle.hpp"

namespace humangan {

/// Discriminator outputs are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-6;

struct DiscriminatorParams {
    Mlp net;  // d_x -> hidden... -> 1, sigmoid output
};

enum class GanOptimizer { sgd, adam };

struct GanConfig {
    double lr_g = 0.01;
    double lr_d = 0.01;
    std::size_t steps = 2000;
    std::size_t batch_size = 64;
    std::size_t d_steps_per_g_step = 1;
    std::vector<std::size_t> d_hidden{16, 16};
    double d_init_scale = 2.0;
    GanOptimizer optimizer = GanOptimizer::adam;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.9;
    /// Decay of an exponential moving average of the generator weights;
    /// 0 returns the last iterate.
    double generator_ema = 0.995;
    std::uint64_t seed = 0;

    void validate() const;
};

DiscriminatorParams random_discriminator(std::size_t d_x, const GanConfig& cfg, std::uint64_t seed);

double discriminate(const DiscriminatorParams& d, const FeatureVector& x);

/// sum_n log D(x_n) + sum_n log(1 - D(g_n)), natural log, D clamped.
double gan_objective(std::span<const FeatureVector> real_batch, std::span<const FeatureVector> gen_batch,
                     const DiscriminatorParams& d);

/// d gan_objective / d theta_D (flat order of d.net).
Vector discriminator_gradient(std::span<const FeatureVector> real_batch, std::span<const FeatureVector> gen_batch,
                              const DiscriminatorParams& d);

/// sum_n log(1 - D(G(z_n))), the generator's objective (minimized).
double generator_objective(const GeneratorParams& g, std::span<const LatentVector> z, const DiscriminatorParams& d);

/// d generator_objective / d theta_G (flat order of g.net).
Vector generator_gradient(const GeneratorParams& g, std::span<const LatentVector> z, const DiscriminatorParams& d);

struct GanStep {
    std::size_t step = 0;
    double d_loss = 0.0;  // -objective / batch, averaged over the step's D updates
    double g_loss = 0.0;  // generator_objective / batch
};

struct GanResult {
    GeneratorParams generator;
    DiscriminatorParams discriminator;
    std::vector<GanStep> history;
};

/// Alternating updates: d_steps_per_g_step ascent steps on the objective for
/// D, then one descent step on generator_objective for G. Gradients are
/// batch means. Deterministic given cfg.seed and g_cfg.seed.
GanResult train_basic_gan(std::span<const FeatureVector> real_data, const GeneratorConfig& g_cfg,
                          const GanConfig& cfg);

/// Fraction of held-out points the discriminator classifies correctly at 0.5.
double discriminator_accuracy(const DiscriminatorParams& d, std::span<const FeatureVector> real,
                              std::span<const FeatureVector> generated);

double standard_gaussian_density(const FeatureVector& x);

/// Fraction of samples that are unlikely under the standard Gaussian
/// (density < density_threshold) yet acceptable to the field
/// (posterior >= posterior_threshold).
double outside_mass(std::span<const FeatureVector> samples, const PosteriorField& field, double density_threshold,
                    double posterior_threshold);

/// Columns: step,d_loss,g_loss
void write_history_csv(std::ostream& out, std::span<const GanStep> history);

}  // namespace humangan
