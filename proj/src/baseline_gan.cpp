// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/baseline_gan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "humangan/errors.hpp"

namespace humangan {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

class Adam {
public:
    Adam(Eigen::Index n, double beta1, double beta2) : m_(Vector::Zero(n)), v_(Vector::Zero(n)), beta1_(beta1), beta2_(beta2) {}

    Vector step(const Vector& grad, double lr) {
        ++t_;
        m_ = beta1_ * m_ + (1 - beta1_) * grad;
        v_ = beta2_ * v_ + (1 - beta2_) * grad.cwiseProduct(grad);
        const double c1 = 1 - std::pow(beta1_, t_);
        const double c2 = 1 - std::pow(beta2_, t_);
        return lr * (m_ / c1).cwiseQuotient(((v_ / c2).cwiseSqrt().array() + eps_).matrix());
    }

private:
    Vector m_, v_;
    double beta1_, beta2_, eps_ = 1e-8;
    int t_ = 0;
};

}  // namespace

void GanConfig::validate() const {
    if (!(lr_g > 0) || !(lr_d > 0)) throw ConfigError("GAN learning rates must be > 0");
    if (batch_size < 1) throw ConfigError("GAN batch_size must be >= 1");
    if (d_steps_per_g_step < 1) throw ConfigError("GAN d_steps_per_g_step must be >= 1");
    if (!(d_init_scale > 0)) throw ConfigError("GAN d_init_scale must be > 0");
    for (std::size_t h : d_hidden)
        if (h < 1) throw ConfigError("discriminator hidden sizes must be >= 1");
    if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(generator_ema >= 0 && generator_ema < 1)) throw ConfigError("generator_ema must lie in [0, 1)");
}

DiscriminatorParams random_discriminator(std::size_t d_x, const GanConfig& cfg, std::uint64_t seed) {
    std::vector<std::size_t> sizes{d_x};
    sizes.insert(sizes.end(), cfg.d_hidden.begin(), cfg.d_hidden.end());
    sizes.push_back(1);
    return {Mlp::random(sizes, OutputActivation::sigmoid, cfg.d_init_scale, seed)};
}

double discriminate(const DiscriminatorParams& d, const FeatureVector& x) { return d.net.forward(x)[0]; }

double gan_objective(std::span<const FeatureVector> real_batch, std::span<const FeatureVector> gen_batch,
                     const DiscriminatorParams& d) {
    if (real_batch.empty() || gen_batch.empty()) throw ValidationError("gan_objective needs nonempty batches");
    double v = 0.0;
    for (const auto& x : real_batch) v += std::log(clamp_prob(discriminate(d, x)));
    for (const auto& x : gen_batch) v += std::log(1.0 - clamp_prob(discriminate(d, x)));
    return v;
}

Vector discriminator_gradient(std::span<const FeatureVector> real_batch, std::span<const FeatureVector> gen_batch,
                              const DiscriminatorParams& d) {
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(d.net.parameter_count()));
    Vector upstream(1);
    for (const auto& x : real_batch) {
        const auto t = d.net.trace(x);
        const double y = t.activations.back()[0];
        if (clamped(y)) continue;
        upstream[0] = 1.0 / y;
        grad += d.net.backward(t, upstream).params;
    }
    for (const auto& x : gen_batch) {
        const auto t = d.net.trace(x);
        const double y = t.activations.back()[0];
        if (clamped(y)) continue;
        upstream[0] = -1.0 / (1.0 - y);
        grad += d.net.backward(t, upstream).params;
    }
    return grad;
}

double generator_objective(const GeneratorParams& g, std::span<const LatentVector> z, const DiscriminatorParams& d) {
    double v = 0.0;
    for (const auto& zi : z) v += std::log(1.0 - clamp_prob(discriminate(d, forward(g, zi))));
    return v;
}

Vector generator_gradient(const GeneratorParams& g, std::span<const LatentVector> z, const DiscriminatorParams& d) {
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(g.parameter_count()));
    Vector upstream(1);
    for (const auto& zi : z) {
        const auto gt = g.net.trace(zi);
        const auto dt = d.net.trace(gt.activations.back());
        const double y = dt.activations.back()[0];
        if (clamped(y)) continue;
        upstream[0] = -1.0 / (1.0 - y);
        const Vector dx = d.net.backward(dt, upstream).input;
        grad += g.net.backward(gt, dx).params;
    }
    return grad;
}

GanResult train_basic_gan(std::span<const FeatureVector> real_data, const GeneratorConfig& g_cfg,
                          const GanConfig& cfg) {
    cfg.validate();
    g_cfg.validate();
    if (real_data.size() < cfg.batch_size)
        throw ValidationError("basic GAN needs at least batch_size (" + std::to_string(cfg.batch_size) +
                              ") real samples, got " + std::to_string(real_data.size()));
    for (const auto& x : real_data)
        if (static_cast<std::size_t>(x.size()) != g_cfg.d_x)
            throw ConfigError("real data dimension does not match generator d_x");

    GanResult result{random_params(g_cfg, g_cfg.seed), random_discriminator(g_cfg.d_x, cfg, mix_seed(cfg.seed, 1)), {}};
    Rng rng(mix_seed(cfg.seed, 2));
    std::uniform_int_distribution<std::size_t> pick(0, real_data.size() - 1);
    std::uniform_real_distribution<double> prior(-1.0, 1.0);
    const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);

    Adam d_adam(static_cast<Eigen::Index>(result.discriminator.net.parameter_count()), cfg.adam_beta1, cfg.adam_beta2);
    Adam g_adam(static_cast<Eigen::Index>(result.generator.parameter_count()), cfg.adam_beta1, cfg.adam_beta2);
    Vector g_average = result.generator.net.flatten();

    std::vector<FeatureVector> real_batch(cfg.batch_size);
    std::vector<LatentVector> z(cfg.batch_size, LatentVector(static_cast<Eigen::Index>(g_cfg.d_z)));
    auto draw_z = [&] {
        for (auto& zi : z)
            for (Eigen::Index i = 0; i < zi.size(); ++i) zi[i] = prior(rng);
    };

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        double d_loss = 0.0;
        for (std::size_t k = 0; k < cfg.d_steps_per_g_step; ++k) {
            for (auto& x : real_batch) x = real_data[pick(rng)];
            draw_z();
            const auto gen = forward(result.generator, z);
            auto& dnet = result.discriminator.net;
            d_loss += -gan_objective(real_batch, gen, result.discriminator) * inv_batch;
            const Vector grad = discriminator_gradient(real_batch, gen, result.discriminator) * inv_batch;
            const Vector update = cfg.optimizer == GanOptimizer::adam ? d_adam.step(grad, cfg.lr_d) : Vector(cfg.lr_d * grad);
            dnet.assign(dnet.flatten() + update);
        }
        d_loss /= static_cast<double>(cfg.d_steps_per_g_step);

        draw_z();
        const double g_loss = generator_objective(result.generator, z, result.discriminator) * inv_batch;
        const Vector grad = generator_gradient(result.generator, z, result.discriminator) * inv_batch;
        const Vector update = cfg.optimizer == GanOptimizer::adam ? g_adam.step(grad, cfg.lr_g) : Vector(cfg.lr_g * grad);
        result.generator.net.assign(result.generator.net.flatten() - update);

        if (!std::isfinite(d_loss) || !std::isfinite(g_loss) || !result.generator.net.finite() ||
            !result.discriminator.net.finite())
            throw DivergenceError("basic GAN diverged at step " + std::to_string(step), step);
        result.history.push_back({step, d_loss, g_loss});
        if (cfg.generator_ema > 0)
            g_average = cfg.generator_ema * g_average + (1 - cfg.generator_ema) * result.generator.net.flatten();
    }
    if (cfg.generator_ema > 0 && cfg.steps > 0) result.generator.net.assign(g_average);
    return result;
}

double discriminator_accuracy(const DiscriminatorParams& d, std::span<const FeatureVector> real,
                              std::span<const FeatureVector> generated) {
    if (real.empty() && generated.empty()) throw UndefinedMetricError("accuracy of an empty evaluation set");
    std::size_t correct = 0;
    for (const auto& x : real) correct += discriminate(d, x) >= 0.5;
    for (const auto& x : generated) correct += discriminate(d, x) < 0.5;
    return static_cast<double>(correct) / static_cast<double>(real.size() + generated.size());
}

double standard_gaussian_density(const FeatureVector& x) {
    const double d = static_cast<double>(x.size());
    return std::exp(-0.5 * x.squaredNorm()) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
}

double outside_mass(std::span<const FeatureVector> samples, const PosteriorField& field, double density_threshold,
                    double posterior_threshold) {
    if (samples.empty()) throw UndefinedMetricError("outside_mass of an empty sample set");
    if (!(density_threshold >= 0)) throw ValidationError("density_threshold must be >= 0");
    if (!(posterior_threshold >= 0 && posterior_threshold <= 1))
        throw ValidationError("posterior_threshold must lie in [0, 1]");
    std::size_t count = 0;
    for (const auto& x : samples)
        count += standard_gaussian_density(x) < density_threshold && true_posterior(field, x) >= posterior_threshold;
    return static_cast<double>(count) / static_cast<double>(samples.size());
}

void write_history_csv(std::ostream& out, std::span<const GanStep> history) {
    out << "step,d_loss,g_loss\n";
    for (const auto& h : history) out << h.step << ',' << format_double(h.d_loss) << ',' << format_double(h.g_loss) << '\n';
}

}  // namespace humangan
