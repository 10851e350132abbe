// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/nes.hpp"

#include <unordered_map>

#include "humangan/errors.hpp"

namespace humangan {

void NesConfig::validate() const {
    if (!(sigma > 0)) throw ConfigError("nes sigma must be > 0");
    if (r < 1) throw ConfigError("nes r must be >= 1");
}

PerturbationSet sample_perturbations(std::size_t n, const NesConfig& config, std::size_t d_x) {
    config.validate();
    if (n < 1) throw ConfigError("sample_perturbations needs n >= 1");
    if (d_x < 1) throw ConfigError("sample_perturbations needs d_x >= 1");
    Rng rng(config.seed);
    std::normal_distribution<double> dist(0.0, config.sigma);
    PerturbationSet set{n, config.r, d_x, {}};
    set.deltas.assign(n * config.r, Vector(static_cast<Eigen::Index>(d_x)));
    for (auto& delta : set.deltas)
        for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = dist(rng);
    return set;
}

std::string make_query_id(std::string_view prefix, std::size_t sample, std::size_t perturbation) {
    std::string id(prefix);
    id += 'n';
    id += std::to_string(sample);
    id += "-r";
    id += std::to_string(perturbation);
    return id;
}

namespace {

void check_shapes(std::span<const FeatureVector> samples, const PerturbationSet& perts) {
    if (samples.size() != perts.n)
        throw ConfigError("perturbation set covers " + std::to_string(perts.n) + " samples, batch has " +
                          std::to_string(samples.size()));
    if (perts.deltas.size() != perts.n * perts.r) throw ConfigError("perturbation set is malformed");
    for (const auto& x : samples)
        if (static_cast<std::size_t>(x.size()) != perts.d)
            throw ConfigError("sample dimension " + std::to_string(x.size()) + " does not match perturbation dimension " +
                              std::to_string(perts.d));
}

}  // namespace

std::vector<PairQuery> build_queries(std::span<const FeatureVector> samples, const PerturbationSet& perts,
                                     std::string_view id_prefix) {
    check_shapes(samples, perts);
    std::vector<PairQuery> queries;
    queries.reserve(perts.n * perts.r);
    for (std::size_t n = 0; n < perts.n; ++n) {
        for (std::size_t r = 0; r < perts.r; ++r) {
            const Vector& delta = perts.at(n, r);
            queries.push_back({make_query_id(id_prefix, n, r), n, r, samples[n] + delta, samples[n] - delta});
        }
    }
    return queries;
}

std::vector<Vector> estimate_data_gradient(std::span<const FeatureVector> samples, const PerturbationSet& perts,
                                           std::span<const PairQuery> queries,
                                           std::span<const RatingResponse> responses, const NesConfig& config) {
    config.validate();
    check_shapes(samples, perts);
    if (perts.r != config.r)
        throw ConfigError("perturbation set has r=" + std::to_string(perts.r) + ", config has r=" +
                          std::to_string(config.r));

    std::unordered_map<std::string, const PairQuery*> by_id;
    for (const auto& q : queries) {
        if (q.sample_index >= perts.n || q.perturbation_index >= perts.r)
            throw ConfigError("query " + q.query_id + " indexes outside the perturbation set");
        if (!by_id.emplace(q.query_id, &q).second) throw ConfigError("duplicate query id " + q.query_id);
    }
    if (queries.size() != perts.n * perts.r)
        throw ConfigError("expected " + std::to_string(perts.n * perts.r) + " queries, got " +
                          std::to_string(queries.size()));

    std::unordered_map<std::string, double> answer;
    std::vector<std::string> duplicated;
    for (const auto& resp : responses) {
        if (!by_id.count(resp.query_id)) throw ValidationError("response for unknown query id " + resp.query_id);
        if (!(resp.delta_d >= -1.0 && resp.delta_d <= 1.0))
            throw ValidationError("response for " + resp.query_id + " is outside [-1, 1]");
        if (!answer.emplace(resp.query_id, resp.delta_d).second) duplicated.push_back(resp.query_id);
    }
    std::vector<std::string> missing;
    for (const auto& q : queries)
        if (!answer.count(q.query_id)) missing.push_back(q.query_id);
    if (!missing.empty() || !duplicated.empty()) {
        std::string what = "incomplete response batch";
        if (!missing.empty()) what += "; missing: " + join_ids(missing);
        if (!duplicated.empty()) what += "; duplicated: " + join_ids(duplicated);
        missing.insert(missing.end(), duplicated.begin(), duplicated.end());
        throw IncompleteBatchError(what, std::move(missing));
    }

    std::vector<double> delta_d(perts.n * perts.r, 0.0);
    std::vector<bool> seen(perts.n * perts.r, false);
    for (const auto& q : queries) {
        const std::size_t slot = q.sample_index * perts.r + q.perturbation_index;
        if (seen[slot]) throw ConfigError("two queries share sample/perturbation slot of " + q.query_id);
        seen[slot] = true;
        delta_d[slot] = answer.at(q.query_id);
    }

    std::vector<Vector> grads(perts.n, Vector::Zero(static_cast<Eigen::Index>(perts.d)));
    // Accumulate in (n, r) order so the result does not depend on response order.
    for (std::size_t n = 0; n < perts.n; ++n)
        for (std::size_t r = 0; r < perts.r; ++r) grads[n] += delta_d[n * perts.r + r] * perts.at(n, r);
    const double scale = 1.0 / (2.0 * config.sigma * static_cast<double>(config.r));
    for (auto& g : grads) g *= scale;
    return grads;
}

Vector chain_to_params(std::span<const Vector> data_grads, std::span<const Matrix> jacobians) {
    if (data_grads.size() != jacobians.size())
        throw ConfigError("chain_to_params: " + std::to_string(data_grads.size()) + " gradients but " +
                          std::to_string(jacobians.size()) + " jacobians");
    if (data_grads.empty()) throw ConfigError("chain_to_params needs at least one sample");
    const auto cols = jacobians.front().cols();
    Vector total = Vector::Zero(cols);
    for (std::size_t n = 0; n < data_grads.size(); ++n) {
        if (jacobians[n].cols() != cols || jacobians[n].rows() != data_grads[n].size())
            throw ConfigError("chain_to_params: shape mismatch at sample " + std::to_string(n));
        total.noalias() += jacobians[n].transpose() * data_grads[n];
    }
    return total;
}

}  // namespace humangan
