// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "humangan/errors.hpp"
#include "humangan/run_io.hpp"

namespace humangan {

void TrainConfig::validate() const {
    if (n < 1) throw ConfigError("train n must be >= 1");
    if (!(alpha > 0)) throw ConfigError("train alpha must be > 0");
    if (eval_open_count < 1) throw ConfigError("train eval_open_count must be >= 1");
    nes.validate();
}

std::size_t query_budget(std::size_t iterations, std::size_t n, std::size_t r) { return iterations * n * r; }

SimulatedDiscriminator::SimulatedDiscriminator(PosteriorField field, RaterConfig rater, std::size_t threads)
    : field_(std::move(field)), rater_(rater), threads_(std::max<std::size_t>(threads, 1)) {
    validate(field_);
    rater_.validate();
}

std::optional<std::vector<RatingResponse>> SimulatedDiscriminator::rate(std::size_t /*iteration*/,
                                                                        std::span<const PairQuery> queries) {
    std::vector<RatingResponse> out(queries.size());
    // Noise streams are keyed by query id, so splitting the batch across
    // threads does not change any answer.
    const std::size_t workers = std::min(threads_, std::max<std::size_t>(queries.size(), 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) out[i] = rate_pairwise(field_, queries[i], rater_);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < queries.size(); i += workers) out[i] = rate_pairwise(field_, queries[i], rater_);
            });
    }
    answered_ += queries.size();
    return out;
}

std::optional<double> SimulatedDiscriminator::objective(std::span<const FeatureVector> points) {
    double v = 0.0;
    for (const auto& p : points) v += true_posterior(field_, p);
    return v;
}

std::uint64_t perturbation_seed(const TrainConfig& cfg, std::size_t iteration) {
    return mix_seed(cfg.nes.seed, iteration);
}

std::string iteration_prefix(std::size_t iteration) { return "it" + std::to_string(iteration) + "-"; }

namespace {

double objective_or_nan(DiscriminatorSource& disc, std::span<const FeatureVector> points) {
    return disc.objective(points).value_or(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

TrainingRun start_run(const GeneratorParams& g_init, const TrainConfig& cfg, DiscriminatorSource& disc,
                      std::uint64_t generator_seed, const TrainOptions& opts) {
    cfg.validate();
    if (!g_init.net.finite()) throw ConfigError("initial generator has non-finite parameters");
    TrainingRun run;
    run.config = cfg;
    run.generator_seed = generator_seed;
    run.prior = sample_prior(cfg.n, g_init.d_z(), cfg.prior_seed);

    IterationRecord initial;
    initial.iteration = 0;
    initial.params = g_init;
    initial.points = forward(g_init, run.prior);
    initial.objective = objective_or_nan(disc, initial.points);
    run.snapshots.push_back(std::move(initial));
    if (opts.run_dir) write_snapshot(*opts.run_dir, run, run.snapshots.back());
    return run;
}

IterationBatch next_batch(const TrainingRun& run) {
    if (run.snapshots.empty()) throw ConfigError("run has no initial snapshot");
    const IterationRecord& current = run.snapshots.back();
    IterationBatch b;
    b.iteration = run.completed_iterations();
    b.nes = run.config.nes;
    b.nes.seed = perturbation_seed(run.config, b.iteration);
    b.perturbations = sample_perturbations(run.config.n, b.nes, current.params.d_x());
    b.queries = build_queries(current.points, b.perturbations, iteration_prefix(b.iteration));
    return b;
}

void continue_run(TrainingRun& run, DiscriminatorSource& disc, const TrainOptions& opts) {
    const TrainConfig& cfg = run.config;
    cfg.validate();
    if (run.snapshots.empty()) throw ConfigError("run has no initial snapshot");

    while (run.completed_iterations() < cfg.iterations) {
        const std::size_t t = run.completed_iterations();
        const IterationRecord& current = run.snapshots.back();

        const IterationBatch batch = next_batch(run);
        const NesConfig& nes = batch.nes;
        const PerturbationSet& perts = batch.perturbations;
        const std::vector<PairQuery>& queries = batch.queries;

        auto responses = disc.rate(t, queries);
        if (!responses)
            throw TrainingSuspended("discriminator source did not complete the batch of iteration " + std::to_string(t) +
                                        "; resume from snapshot " + std::to_string(t),
                                    t);

        const std::vector<Vector> data_grads = estimate_data_gradient(current.points, perts, queries, *responses, nes);
        std::vector<Matrix> jacobians;
        jacobians.reserve(run.prior.size());
        for (const auto& z : run.prior) jacobians.push_back(jacobian(current.params, z));
        const Vector param_grad = chain_to_params(data_grads, jacobians);

        IterationRecord next;
        next.iteration = t + 1;
        next.params = current.params;
        next.params.net.assign(current.params.net.flatten() + cfg.alpha * param_grad);
        if (!next.params.net.finite())
            throw DivergenceError("generator parameters became non-finite at iteration " + std::to_string(t), t);
        next.points = forward(next.params, run.prior);
        next.objective = objective_or_nan(disc, next.points);
        next.data_grad_norms.reserve(data_grads.size());
        for (const auto& g : data_grads) next.data_grad_norms.push_back(g.norm());
        next.param_grad_norm = param_grad.norm();
        next.query_count = current.query_count + queries.size();

        run.snapshots.push_back(std::move(next));
        if (opts.run_dir) write_snapshot(*opts.run_dir, run, run.snapshots.back());
    }
}

TrainingRun train_humangan(const GeneratorParams& g_init, const TrainConfig& cfg, DiscriminatorSource& disc,
                           const TrainOptions& opts) {
    TrainingRun run = start_run(g_init, cfg, disc, 0, opts);
    continue_run(run, disc, opts);
    return run;
}

namespace {

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(std::stod(tok));
    return out;
}

TrainConfig config_from(const GeneratorCheckpoint& ckpt) {
    TrainConfig cfg;
    cfg.n = std::stoull(ckpt.get("n"));
    cfg.iterations = std::stoull(ckpt.get("iterations"));
    cfg.alpha = std::stod(ckpt.get("alpha"));
    cfg.nes.sigma = std::stod(ckpt.get("sigma"));
    cfg.nes.r = std::stoull(ckpt.get("r"));
    cfg.nes.seed = std::stoull(ckpt.get("nes_seed"));
    cfg.prior_seed = std::stoull(ckpt.get("prior_seed"));
    cfg.eval_open_count = std::stoull(ckpt.get("eval_open_count"));
    return cfg;
}

}  // namespace

TrainingRun load_run(const std::filesystem::path& run_dir, std::optional<std::size_t> through_iteration) {
    if (!std::filesystem::exists(snapshot_path(run_dir, 0)))
        throw ParseError("no initial snapshot in run directory " + run_dir.string());
    std::size_t last = 0;
    if (through_iteration) {
        last = *through_iteration;
    } else {
        while (std::filesystem::exists(snapshot_path(run_dir, last + 1))) ++last;
    }

    TrainingRun run;
    for (std::size_t t = 0; t <= last; ++t) {
        const auto ckpt = load_checkpoint(snapshot_path(run_dir, t));
        if (t == 0) {
            run.config = config_from(ckpt);
            run.generator_seed = ckpt.seed;
            run.prior = sample_prior(run.config.n, ckpt.params.d_z(), run.config.prior_seed);
        }
        if (std::stoull(ckpt.get("completed_iterations")) != t)
            throw ParseError("snapshot " + std::to_string(t) + " records a different iteration count");
        IterationRecord rec;
        rec.iteration = t;
        rec.params = ckpt.params;
        rec.points = forward(rec.params, run.prior);
        rec.objective = std::stod(ckpt.get("objective"));
        rec.param_grad_norm = std::stod(ckpt.get("param_grad_norm"));
        rec.data_grad_norms = parse_doubles(ckpt.get("data_grad_norms"));
        rec.query_count = std::stoull(ckpt.get("query_count"));
        run.snapshots.push_back(std::move(rec));
    }
    return run;
}

std::uint64_t open_prior_seed(const TrainConfig& cfg) {
    std::uint64_t seed = mix_seed(cfg.prior_seed, 0x6f70656eULL);
    if (seed == cfg.prior_seed) ++seed;
    return seed;
}

std::vector<LatentVector> open_prior(const TrainConfig& cfg, std::size_t d_z) {
    return sample_prior(cfg.eval_open_count, d_z, open_prior_seed(cfg));
}

std::vector<SnapshotEval> evaluate_run(const TrainingRun& run, const PosteriorField& field,
                                       const std::optional<RaterConfig>& rater) {
    if (run.snapshots.empty()) throw ValidationError("evaluate_run needs at least one snapshot");
    if (rater) rater->validate();
    const auto open = open_prior(run.config, run.snapshots.front().params.d_z());

    auto score = [&](std::span<const FeatureVector> points, std::size_t snapshot, std::uint64_t kind) {
        EvalSummary s;
        s.posteriors.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::uint64_t stream = mix_seed(mix_seed(snapshot, kind), i);
            s.posteriors.push_back(rater ? rate_absolute(field, points[i], *rater, stream)
                                         : true_posterior(field, points[i]));
        }
        s.stats = summarize(s.posteriors);
        return s;
    };

    std::vector<SnapshotEval> out;
    out.reserve(run.snapshots.size());
    for (const auto& rec : run.snapshots) {
        SnapshotEval e;
        e.iteration = rec.iteration;
        e.closed = score(rec.points, rec.iteration, 1);
        const auto open_points = forward(rec.params, open);
        e.open = score(open_points, rec.iteration, 2);
        out.push_back(std::move(e));
    }
    return out;
}

std::string to_string(Pathology p) {
    switch (p) {
    case Pathology::gradient_vanishing:
        return "GRADIENT_VANISHING";
    case Pathology::mode_collapse:
        return "MODE_COLLAPSE";
    }
    return "UNKNOWN";
}

std::vector<PathologyWarning> detect_pathologies(const TrainingRun& run, const PathologyThresholds& thresholds) {
    std::vector<PathologyWarning> warnings;
    if (run.snapshots.size() < 2) return warnings;
    const double initial_spread = mean_pairwise_distance(run.snapshots.front().points);
    for (std::size_t s = 1; s < run.snapshots.size(); ++s) {
        const auto& rec = run.snapshots[s];
        if (rec.param_grad_norm < thresholds.gradient_tolerance) {
            std::ostringstream os;
            os << "parameter gradient norm " << rec.param_grad_norm << " below " << thresholds.gradient_tolerance;
            warnings.push_back({Pathology::gradient_vanishing, rec.iteration, os.str()});
        }
        const double spread = mean_pairwise_distance(rec.points);
        if (initial_spread > 0 && spread < thresholds.collapse_ratio * initial_spread) {
            std::ostringstream os;
            os << "mean pairwise distance " << spread << " fell below " << thresholds.collapse_ratio
               << " of its initial value " << initial_spread;
            warnings.push_back({Pathology::mode_collapse, rec.iteration, os.str()});
        }
    }
    return warnings;
}

}  // namespace humangan
