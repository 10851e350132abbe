// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "humangan/errors.hpp"

namespace humangan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double bowl_value(const GaussianBowl& b, const FeatureVector& x) {
    const double sq = b.center.size() == 0 ? x.squaredNorm() : (x - b.center).squaredNorm();
    return std::exp(-sq / (2.0 * b.scale * b.scale));
}

void validate_bowl(const GaussianBowl& b) {
    if (!(b.scale > 0)) throw ConfigError("gaussian_bowl scale must be > 0");
}

std::string vec_str(const FeatureVector& v) {
    std::ostringstream os;
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

}  // namespace

std::string describe(const PosteriorField& field) {
    return std::visit(overloaded{
                          [](const GaussianBowl& b) {
                              std::ostringstream os;
                              os << "gaussian_bowl(scale=" << b.scale;
                              if (b.center.size()) os << ", center=" << vec_str(b.center);
                              os << ')';
                              return os.str();
                          },
                          [](const Ring& r) {
                              std::ostringstream os;
                              os << "ring(radius=" << r.radius << ", width=" << r.width << ')';
                              return os.str();
                          },
                          [](const Plateau& p) {
                              std::ostringstream os;
                              os << "plateau(value=" << p.value;
                              if (p.lower.size()) os << ", box=" << vec_str(p.lower) << ".." << vec_str(p.upper);
                              os << ')';
                              return os.str();
                          },
                          [](const Bimodal& b) {
                              std::ostringstream os;
                              os << "bimodal(scale=" << b.first.scale << "/" << b.second.scale << ')';
                              return os.str();
                          },
                      },
                      field);
}

void validate(const PosteriorField& field) {
    std::visit(overloaded{
                   [](const GaussianBowl& b) { validate_bowl(b); },
                   [](const Ring& r) {
                       if (!(r.width > 0)) throw ConfigError("ring width must be > 0");
                       if (!(r.radius >= 0)) throw ConfigError("ring radius must be >= 0");
                   },
                   [](const Plateau& p) {
                       if (!(p.value >= 0 && p.value <= 1)) throw ConfigError("plateau value must lie in [0, 1]");
                       if (p.lower.size() != p.upper.size())
                           throw ConfigError("plateau lower/upper bounds differ in dimension");
                       if ((p.lower.array() > p.upper.array()).any())
                           throw ConfigError("plateau lower bound exceeds upper bound");
                   },
                   [](const Bimodal& b) {
                       validate_bowl(b.first);
                       validate_bowl(b.second);
                   },
               },
               field);
}

double true_posterior(const PosteriorField& field, const FeatureVector& x) {
    if (!x.allFinite()) throw ValidationError("posterior requested for a non-finite point");
    const double v = std::visit(
        overloaded{
            [&](const GaussianBowl& b) { return bowl_value(b, x); },
            [&](const Ring& r) {
                const double d = x.norm() - r.radius;
                return std::exp(-d * d / (2.0 * r.width * r.width));
            },
            [&](const Plateau& p) {
                if (p.lower.size() == 0) return p.value;
                if (p.lower.size() != x.size()) throw ConfigError("plateau dimension does not match point");
                const bool inside = (x.array() >= p.lower.array()).all() && (x.array() <= p.upper.array()).all();
                return inside ? p.value : 0.0;
            },
            [&](const Bimodal& b) { return std::max(bowl_value(b.first, x), bowl_value(b.second, x)); },
        },
        field);
    return std::clamp(v, 0.0, 1.0);
}

void RaterConfig::validate() const {
    if (!(noise_std >= 0)) throw ConfigError("rater noise_std must be >= 0");
    if (levels < 2) throw ConfigError("rater levels must be >= 2");
    if (rater_count < 1) throw ConfigError("rater_count must be >= 1");
}

double quantize(double value, double lo, double hi, std::size_t levels) {
    if (levels < 2 || !(hi > lo)) throw ConfigError("quantize needs levels >= 2 and hi > lo");
    const double step = (hi - lo) / static_cast<double>(levels - 1);
    const double pos = (std::clamp(value, lo, hi) - lo) / step;
    const double below = std::floor(pos);
    const double frac = pos - below;
    auto level = [&](double k) { return lo + std::min(k, static_cast<double>(levels - 1)) * step; };
    if (frac < 0.5) return level(below);
    if (frac > 0.5) return level(below + 1);
    const double a = level(below);
    const double b = level(below + 1);
    return std::abs(a) <= std::abs(b) ? a : b;
}

double pairwise_score_to_delta(int score) {
    if (score < 1 || score > 5) throw ValidationError("score must be an integer in 1..5, got " + std::to_string(score));
    return (3 - score) * 0.5;
}

int delta_to_pairwise_score(double delta_d) {
    return 3 - static_cast<int>(std::lround(quantize(delta_d, -1.0, 1.0, 5) * 2.0));
}

double absolute_score_to_posterior(int score) {
    if (score < 1 || score > 5) throw ValidationError("score must be an integer in 1..5, got " + std::to_string(score));
    return (score - 1) * 0.25;
}

RatingResponse rate_pairwise(const PosteriorField& field, const PairQuery& query, const RaterConfig& cfg) {
    cfg.validate();
    if (query.plus_point == query.minus_point) return {query.query_id, 0.0};
    const double truth = true_posterior(field, query.plus_point) - true_posterior(field, query.minus_point);
    Rng rng(mix_seed(cfg.seed, hash_string(query.query_id)));
    std::normal_distribution<double> noise(0.0, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.rater_count; ++i) {
        const double perceived = cfg.noise_std > 0 ? truth + cfg.noise_std * noise(rng) : truth;
        sum += quantize(perceived, -1.0, 1.0, cfg.levels);
    }
    return {query.query_id, sum / static_cast<double>(cfg.rater_count)};
}

double rate_absolute(const PosteriorField& field, const FeatureVector& x, const RaterConfig& cfg,
                     std::uint64_t stream) {
    cfg.validate();
    const double truth = true_posterior(field, x);
    Rng rng(mix_seed(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL, stream));
    std::normal_distribution<double> noise(0.0, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.rater_count; ++i) {
        const double perceived = cfg.noise_std > 0 ? truth + cfg.noise_std * noise(rng) : truth;
        sum += quantize(perceived, 0.0, 1.0, cfg.levels);
    }
    return sum / static_cast<double>(cfg.rater_count);
}

double PosteriorGrid::center(std::size_t dim, std::size_t index) const {
    const Interval& b = bounds[dim];
    const double width = (b.max - b.min) / static_cast<double>(resolution);
    return b.min + (static_cast<double>(index) + 0.5) * width;
}

PosteriorGrid grid_survey(const PosteriorField& field, const std::array<Interval, 2>& bounds,
                          std::size_t resolution, const RaterConfig& cfg) {
    if (resolution < 1) throw ConfigError("grid resolution must be >= 1");
    for (const auto& b : bounds)
        if (!(b.max > b.min)) throw ConfigError("grid bounds must satisfy min < max");
    cfg.validate();
    PosteriorGrid grid{bounds, resolution, cfg.rater_count, {}};
    grid.values.reserve(resolution * resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            FeatureVector x(2);
            x << grid.center(0, i), grid.center(1, j);
            grid.values.push_back(rate_absolute(field, x, cfg, i * resolution + j));
        }
    }
    return grid;
}

void write_grid_csv(std::ostream& out, const PosteriorGrid& grid) {
    out << "dim0,dim1,posterior,raters\n";
    for (std::size_t i = 0; i < grid.resolution; ++i)
        for (std::size_t j = 0; j < grid.resolution; ++j)
            out << format_double(grid.center(0, i)) << ',' << format_double(grid.center(1, j)) << ','
                << format_double(grid.at(i, j)) << ',' << grid.raters_per_cell << '\n';
}

}  // namespace humangan
