// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "humangan/baseline_gan.hpp"
#include "humangan/errors.hpp"
#include "support/convert.hpp"
#include "support/oracles.hpp"

using namespace humangan;
using support::to_std;
using support::vec;

namespace {

const GeneratorConfig kGen{2, {4, 4}, 2, 1.0, 0};

double logit(double p) { return std::log(p / (1 - p)); }

// D(x) = sigmoid(w . x + b) with no hidden layer.
DiscriminatorParams linear_discriminator(double w0, double w1, double b) {
    DiscriminatorParams d{Mlp({2, 1}, OutputActivation::sigmoid)};
    d.net.layers()[0].weights << w0, w1;
    d.net.layers()[0].bias << b;
    return d;
}

template <typename T, typename In>
T oracle_d(const std::vector<T>& flat, const std::vector<std::size_t>& sizes, const std::vector<In>& x) {
    const T p = oracle::mlp_forward_t<T>(flat, sizes, x, true)[0];
    return std::clamp(p, T(kProbClamp), T(1) - T(kProbClamp));
}

std::vector<FeatureVector> gaussian_points(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0, scale);
    std::vector<FeatureVector> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(vec({normal(rng), normal(rng)}));
    return pts;
}

}  // namespace

TEST_CASE("objective examples", "[gan][objective]") {
    const auto half = linear_discriminator(0, 0, 0);
    const auto real = gaussian_points(7, 1), gen = gaussian_points(7, 2);
    CHECK(gan_objective(real, gen, half) == Catch::Approx(14 * std::log(0.5)));

    const auto sharp = linear_discriminator(logit(0.9), 0, 0);
    const std::vector<FeatureVector> r1{vec({1, 0})}, g1{vec({-1, 0})};
    CHECK(discriminate(sharp, r1[0]) == Catch::Approx(0.9));
    CHECK(discriminate(sharp, g1[0]) == Catch::Approx(0.1));
    CHECK(gan_objective(r1, g1, sharp) == Catch::Approx(2 * std::log(0.9)));
    CHECK(gan_objective(r1, g1, sharp) == Catch::Approx(-0.2107).margin(1e-4));
}

TEST_CASE("objective grows as D separates a fixed pair", "[gan][objective][property]") {
    const std::vector<FeatureVector> r1{vec({1, 0.5})}, g1{vec({-1, -0.5})};
    double previous = -INFINITY;
    for (int k = 0; k <= 40; ++k) {
        const double v = gan_objective(r1, g1, linear_discriminator(0.25 * k, 0.1 * k, 0));
        CHECK(v > previous);
        previous = v;
    }
}

TEST_CASE("objective is finite under saturation", "[gan][objective][property]") {
    const std::vector<FeatureVector> r1{vec({1, 0})}, g1{vec({-1, 0})};
    for (double w : {-1e6, -100.0, 100.0, 1e6}) {
        const double v = gan_objective(r1, g1, linear_discriminator(w, 0, 0));
        CHECK(std::isfinite(v));
        CHECK(v >= 2 * std::log(kProbClamp) - 1e-9);
    }
    CHECK(std::isfinite(generator_objective(random_params(kGen, 1), sample_prior(4, 2, 1), linear_discriminator(1e6, 1e6, 0))));
}

TEST_CASE("discriminator gradient matches central differences", "[gan][gradient][property]") {
    GanConfig cfg;
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto d = random_discriminator(2, cfg, mix_seed(3, s));
        const auto real = gaussian_points(6, s), gen = gaussian_points(6, s + 100, 2.0);
        const Vector grad = discriminator_gradient(real, gen, d);
        const auto flat = oracle::widen(to_std(d.net.flatten()));
        auto objective = [&](const oracle::PreciseVector& theta) {
            oracle::Precise v = 0;
            for (const auto& x : real) v += std::log(oracle_d(theta, d.net.sizes(), to_std(x)));
            for (const auto& x : gen) v += std::log(oracle::Precise(1) - oracle_d(theta, d.net.sizes(), to_std(x)));
            return v;
        };
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const double fd = oracle::central_difference(objective, flat, i, 1e-5);
            const double e = oracle::relative_error(grad[static_cast<Eigen::Index>(i)], fd);
            worst = std::max(worst, e);
        }
    }
    INFO("max relative error " << worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("generator gradient matches central differences", "[gan][gradient][property]") {
    GanConfig cfg;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto d = random_discriminator(2, cfg, mix_seed(5, s));
        const GeneratorParams g = random_params(kGen, mix_seed(6, s));
        const auto z = sample_prior(6, 2, s);
        const Vector grad = generator_gradient(g, z, d);
        const auto flat = oracle::widen(to_std(g.net.flatten()));
        const auto dflat = oracle::widen(to_std(d.net.flatten()));
        auto objective = [&](const oracle::PreciseVector& theta) {
            oracle::Precise v = 0;
            for (const auto& zz : z) {
                const auto x = oracle::mlp_forward_t<oracle::Precise>(theta, g.net.sizes(), to_std(zz), false);
                v += std::log(oracle::Precise(1) - oracle_d(dflat, d.net.sizes(), x));
            }
            return v;
        };
        CHECK(generator_objective(g, z, d) == Catch::Approx(static_cast<double>(objective(flat))).epsilon(1e-12));
        for (std::size_t i = 0; i < flat.size(); ++i)
            worst = std::max(worst, oracle::relative_error(grad[static_cast<Eigen::Index>(i)],
                                                           oracle::central_difference(objective, flat, i, 1e-5)));
    }
    INFO("max relative error " << worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("training plumbing", "[gan][train]") {
    const auto real = gaussian_points(100, 9);
    GanConfig cfg;
    cfg.steps = 0;
    const GanResult none = train_basic_gan(real, kGen, cfg);
    CHECK(none.generator == random_params(kGen, kGen.seed));
    CHECK(none.history.empty());

    cfg.steps = 25;
    const GanResult a = train_basic_gan(real, kGen, cfg);
    const GanResult b = train_basic_gan(real, kGen, cfg);
    REQUIRE(a.history.size() == 25);
    CHECK(a.generator == b.generator);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(a.history[i].step == i);
        CHECK(a.history[i].d_loss == b.history[i].d_loss);
        CHECK(a.history[i].g_loss == b.history[i].g_loss);
    }

    cfg.batch_size = 101;
    CHECK_THROWS_AS(train_basic_gan(real, kGen, cfg), ValidationError);

    GanConfig bad;
    bad.lr_d = 0;
    CHECK_THROWS_AS(train_basic_gan(real, kGen, bad), ConfigError);

    std::ostringstream os;
    write_history_csv(os, a.history);
    CHECK(os.str().rfind("step,d_loss,g_loss\n0,", 0) == 0);
}

TEST_CASE("runaway steps raise DivergenceError with the step index", "[gan][train]") {
    const auto real = gaussian_points(64, 9, 1e154);
    GanConfig cfg;
    cfg.steps = 50;
    cfg.optimizer = GanOptimizer::sgd;
    cfg.lr_d = cfg.lr_g = 1e300;
    try {
        train_basic_gan(real, kGen, cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.step() < 50);
    }
}

TEST_CASE("outside_mass examples", "[gan][outside_mass]") {
    const PosteriorField bowl = GaussianBowl{2.0, {}};
    const double threshold = standard_gaussian_density(vec({2.5, 0.0}));
    CHECK(threshold == Catch::Approx(std::exp(-3.125) / (2 * std::numbers::pi)));

    const std::vector<FeatureVector> origin(10, vec({0, 0}));
    CHECK(outside_mass(origin, bowl, threshold, 0.2) == 0.0);

    std::vector<FeatureVector> ring;
    for (int i = 0; i < 36; ++i) {
        const double a = i * std::numbers::pi / 18;
        ring.push_back(vec({3.5 * std::cos(a), 3.5 * std::sin(a)}));
    }
    // At radius 3.5 the density is below the radius-2.5 value and exp(-3.5^2 / 8) = 0.216 >= 0.2.
    CHECK(std::exp(-3.5 * 3.5 / 8) >= 0.2);
    CHECK(outside_mass(ring, bowl, threshold, 0.2) == 1.0);

    // For a 2-D standard Gaussian P(|x| > a) = exp(-a^2 / 2). The region is
    // 2.5 < |x| <= r_max with exp(-r_max^2 / 8) = 0.2.
    const double r_max2 = -8 * std::log(0.2);
    const double analytic = std::exp(-3.125) - std::exp(-r_max2 / 2);
    CHECK(analytic == Catch::Approx(0.0423).margin(1e-4));
    const auto normal = gaussian_points(10000, 77);
    const double mc_sd = std::sqrt(analytic * (1 - analytic) / 10000);
    CHECK(std::abs(outside_mass(normal, bowl, threshold, 0.2) - analytic) <= 4 * mc_sd);

    CHECK_THROWS_AS(outside_mass(std::vector<FeatureVector>{}, bowl, threshold, 0.2), UndefinedMetricError);
    CHECK_THROWS_AS(outside_mass(origin, bowl, threshold, 1.5), ValidationError);
}

TEST_CASE("outside_mass counts exactly the acceptable-but-unlikely points", "[gan][outside_mass][property]") {
    const PosteriorField bowl = GaussianBowl{2.0, {}};
    const double threshold = standard_gaussian_density(vec({2.5, 0.0}));
    const auto pts = gaussian_points(2000, 5, 2.0);
    std::size_t expected = 0;
    for (const auto& x : pts) {
        const double r2 = x.squaredNorm();
        expected += (r2 > 2.5 * 2.5 && std::exp(-r2 / 8) >= 0.2);
    }
    CHECK(outside_mass(pts, bowl, threshold, 0.2) == Catch::Approx(static_cast<double>(expected) / 2000.0));
}

TEST_CASE("accuracy metric", "[gan][accuracy]") {
    const auto d = linear_discriminator(10, 0, 0);
    const std::vector<FeatureVector> real{vec({1, 0}), vec({2, 0})}, gen{vec({-1, 0}), vec({0.5, 0})};
    CHECK(discriminator_accuracy(d, real, gen) == 0.75);
    CHECK_THROWS_AS(discriminator_accuracy(d, std::vector<FeatureVector>{}, std::vector<FeatureVector>{}), UndefinedMetricError);
}

namespace {

struct Moments {
    Eigen::Vector2d mean;
    Eigen::Vector2d var;
};

Moments moments(const std::vector<FeatureVector>& x) {
    Moments m{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    for (const auto& v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (const auto& v : x) m.var += (v - m.mean).cwiseAbs2();
    m.var /= static_cast<double>(x.size() - 1);
    return m;
}

struct BandResult {
    Moments generated;
    double held_out_accuracy = 0.0;
    bool within() const {
        return generated.mean.cwiseAbs().maxCoeff() <= 0.3 && generated.var.minCoeff() >= 0.5 &&
               generated.var.maxCoeff() <= 1.6 && held_out_accuracy <= 0.65;
    }
};

BandResult train_on_gaussian(std::uint64_t seed) {
    const auto real = gaussian_points(500, mix_seed(seed, 1));
    GanConfig cfg;
    cfg.seed = seed;
    const GeneratorConfig g_cfg{2, {4, 4}, 2, 2.0, mix_seed(seed, 2)};
    const GanResult r = train_basic_gan(real, g_cfg, cfg);
    const auto generated = forward(r.generator, sample_prior(2000, 2, mix_seed(seed, 3)));
    const auto held_out = gaussian_points(500, mix_seed(seed, 4));
    const std::vector<FeatureVector> gen_held(generated.begin(), generated.begin() + 500);
    return {moments(generated), discriminator_accuracy(r.discriminator, held_out, gen_held)};
}

}  // namespace

TEST_CASE("real-data moments of the training sample", "[gan][train]") {
    const Moments m = moments(gaussian_points(500, mix_seed(0, 1)));
    CHECK(m.mean.cwiseAbs().maxCoeff() < 0.15);
    CHECK(m.var.minCoeff() > 0.8);
    CHECK(m.var.maxCoeff() < 1.2);
}

TEST_CASE("basic GAN matches a standard Gaussian loosely", "[gan][train][slow]") {
    const BandResult seeded = train_on_gaussian(0);
    INFO("mean " << seeded.generated.mean.transpose() << " var " << seeded.generated.var.transpose() << " held-out accuracy "
                 << seeded.held_out_accuracy);
    CHECK(seeded.generated.mean.cwiseAbs().maxCoeff() <= 0.3);
    CHECK(seeded.generated.var.minCoeff() >= 0.5);
    CHECK(seeded.generated.var.maxCoeff() <= 1.6);
    CHECK(seeded.held_out_accuracy <= 0.65);

    // Robustness of the default hyperparameters across seeds.
    int within = 0;
    for (std::uint64_t s = 1; s <= 6; ++s) within += train_on_gaussian(s).within();
    CHECK(within >= 5);
}
