// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// The black-box-discriminator training loop. Each iteration generates the
// closed batch x_n = G(z_n) from a prior drawn once per run, asks the
// discriminator source for antithetic pairwise judgments, estimates dV/dx_n
// by NES, chains it through the generator Jacobian and takes one ascent
// step theta <- theta + alpha * dV/dtheta. Real data is never consulted.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "humangan/generator.hpp"
#include "humangan/nes.hpp"
#include "humangan/oracle.hpp"
#include "humangan/stats.hpp"

namespace humangan {

struct TrainConfig {
    std::size_t n = 100;
    std::size_t iterations = 4;
    double alpha = 0.0015;
    NesConfig nes{1.0, 5, 0};
    std::uint64_t prior_seed = 0;
    std::size_t eval_open_count = 100;

    void validate() const;
};

/// Number of pairwise judgments a run needs.
std::size_t query_budget(std::size_t iterations, std::size_t n, std::size_t r);

/// Anything that can answer a batch of pairwise queries: simulated raters or
/// the human query service.
class DiscriminatorSource {
public:
    virtual ~DiscriminatorSource() = default;

    /// One response per query, or nullopt when the batch cannot be completed
    /// now (e.g. human raters timed out).
    virtual std::optional<std::vector<RatingResponse>> rate(std::size_t iteration,
                                                            std::span<const PairQuery> queries) = 0;

    /// Sum of posteriors over `points` for objective logging, or nullopt if
    /// this source cannot score absolute posteriors.
    virtual std::optional<double> objective(std::span<const FeatureVector> points) = 0;
};

class SimulatedDiscriminator final : public DiscriminatorSource {
public:
    SimulatedDiscriminator(PosteriorField field, RaterConfig rater, std::size_t threads = 1);

    std::optional<std::vector<RatingResponse>> rate(std::size_t iteration,
                                                    std::span<const PairQuery> queries) override;
    std::optional<double> objective(std::span<const FeatureVector> points) override;

    std::size_t queries_answered() const { return answered_; }

private:
    PosteriorField field_;
    RaterConfig rater_;
    std::size_t threads_;
    std::size_t answered_ = 0;
};

struct IterationRecord {
    std::size_t iteration = 0;  // completed updates; 0 is the initial generator
    GeneratorParams params;
    std::vector<FeatureVector> points;     // G(z_n) over the training prior
    double objective = 0.0;                // sum_n D(x_n); NaN when the source cannot score
    std::vector<double> data_grad_norms;   // from the update that produced this snapshot
    double param_grad_norm = 0.0;
    std::size_t query_count = 0;
};

struct TrainingRun {
    TrainConfig config;
    std::uint64_t generator_seed = 0;
    std::vector<LatentVector> prior;
    std::vector<IterationRecord> snapshots;

    std::size_t completed_iterations() const { return snapshots.empty() ? 0 : snapshots.back().iteration; }
};

struct TrainOptions {
    /// When set, a snapshot checkpoint and points CSV are written after
    /// every completed iteration (and for the initial generator).
    std::optional<std::filesystem::path> run_dir;
};

/// The per-iteration seed of the perturbation sampler.
std::uint64_t perturbation_seed(const TrainConfig& cfg, std::size_t iteration);
/// Query id prefix for an iteration, e.g. "it3-".
std::string iteration_prefix(std::size_t iteration);

/// The perturbations and queries of the run's next iteration.
struct IterationBatch {
    std::size_t iteration = 0;
    NesConfig nes;
    PerturbationSet perturbations;
    std::vector<PairQuery> queries;
};
IterationBatch next_batch(const TrainingRun& run);

/// Creates the run (initial snapshot only).
TrainingRun start_run(const GeneratorParams& g_init, const TrainConfig& cfg, DiscriminatorSource& disc,
                      std::uint64_t generator_seed = 0, const TrainOptions& opts = {});

/// Runs the remaining iterations of `run`. Throws TrainingSuspended (state up
/// to the last completed iteration intact) when the source returns nullopt,
/// and DivergenceError on non-finite parameters.
void continue_run(TrainingRun& run, DiscriminatorSource& disc, const TrainOptions& opts = {});

TrainingRun train_humangan(const GeneratorParams& g_init, const TrainConfig& cfg, DiscriminatorSource& disc,
                           const TrainOptions& opts = {});

/// Rebuilds a run from the snapshot checkpoints in run_dir up to and
/// including `through_iteration` (default: the latest present).
TrainingRun load_run(const std::filesystem::path& run_dir, std::optional<std::size_t> through_iteration = {});

struct EvalSummary {
    std::vector<double> posteriors;
    Quartiles stats;
};

struct SnapshotEval {
    std::size_t iteration = 0;
    EvalSummary closed;
    EvalSummary open;
};

/// Prior used for open-data evaluation; seeded independently of the training prior.
std::vector<LatentVector> open_prior(const TrainConfig& cfg, std::size_t d_z);
std::uint64_t open_prior_seed(const TrainConfig& cfg);

/// Scores closed and open data of every snapshot with rate_absolute, or with
/// the true field when `rater` is nullopt.
std::vector<SnapshotEval> evaluate_run(const TrainingRun& run, const PosteriorField& field,
                                       const std::optional<RaterConfig>& rater);

enum class Pathology { gradient_vanishing, mode_collapse };
std::string to_string(Pathology p);

struct PathologyWarning {
    Pathology kind;
    std::size_t iteration = 0;
    std::string detail;
};

struct PathologyThresholds {
    double gradient_tolerance = 1e-9;
    double collapse_ratio = 0.1;
};

std::vector<PathologyWarning> detect_pathologies(const TrainingRun& run, const PathologyThresholds& thresholds = {});

}  // namespace humangan
