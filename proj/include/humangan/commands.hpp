// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator commands behind the `humangan` executable. Each command takes a
// resolved ExperimentConfig and an output directory and writes a
// manifest.txt plus config.ini there.

#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "humangan/baseline_gan.hpp"
#include "humangan/config.hpp"
#include "humangan/data_pipeline.hpp"
#include "humangan/query_service.hpp"
#include "humangan/trainer.hpp"

namespace humangan {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,      // config, parse and validation errors
    kExitDivergence = 3,
    kExitIncomplete = 4,  // suspended training or incomplete human batches
    kExitStartup = 5,     // service could not bind
};

int exit_code_for(const std::exception& e);

struct RunManifest {
    std::string command;
    std::string config_text;
    std::filesystem::path output_dir;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::string started_at;
    std::string finished_at;
};

std::vector<std::pair<std::string, std::uint64_t>> resolved_seeds(const ExperimentConfig& cfg);
std::string format_manifest(const RunManifest& manifest);
/// Writes manifest.txt and config.ini into manifest.output_dir.
void write_manifest(const RunManifest& manifest);
std::string utc_timestamp();

struct SimulateReport {
    TrainingRun run;
    std::vector<SnapshotEval> evals;
    std::vector<PathologyWarning> warnings;
    std::size_t init_attempts = 0;
};

/// Trains against the configured simulated field. With `resume`, an existing
/// run in `out` is continued from its last snapshot instead.
SimulateReport cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log,
                            bool resume = false);

/// Writes out/grid.csv.
PosteriorGrid cmd_survey(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);

struct BaselineReport {
    GanResult gan;
    std::vector<FeatureVector> real;
    std::vector<FeatureVector> samples;
    double density_threshold = 0.0;
    double outside_mass = 0.0;
    std::optional<double> humangan_outside_mass;
};

/// Standard-Gaussian real data for the baseline (cfg.baseline.real_count draws).
std::vector<FeatureVector> baseline_real_data(const ExperimentConfig& cfg);
/// The baseline generator's architecture and init.
GeneratorConfig baseline_generator_config(const ExperimentConfig& cfg);

/// Trains the basic GAN and writes samples.csv, history.csv and
/// outside_mass.csv. With `humangan_run`, its final snapshot is scored too.
BaselineReport cmd_baseline(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log,
                            const std::optional<std::filesystem::path>& humangan_run = {});

struct ServeOptions {
    /// Checkpoint file inside a run directory's snapshots/ or a run directory.
    std::optional<std::filesystem::path> resume;
    /// Called once the HTTP server is listening.
    std::function<void(int port)> on_ready;
};

/// Human-mode training: runs the query service and HTTP API while the
/// trainer blocks on each batch. Throws TrainingSuspended when a batch
/// times out; the run directory then resumes from its last snapshot.
TrainingRun cmd_serve(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log,
                      const ServeOptions& opts = {});

/// Service data directory: HUMANGAN_DATA_DIR, else [serve] data_dir, else out/service.
std::filesystem::path service_data_dir(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Writes the iteration's batch CSV for offline raters. The queries are
/// rebuilt from the run directory's latest snapshot.
std::filesystem::path cmd_export(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Appends an offline response CSV to the service log of `out`.
ImportReport cmd_import(const ExperimentConfig& cfg, const std::filesystem::path& out,
                        const std::filesystem::path& csv, std::ostream& log);

/// Fits a projection on a vector CSV and writes the projected data and model.
ProjectionModel cmd_project(const std::filesystem::path& input, std::size_t components,
                            const std::filesystem::path& out, std::ostream& log);

}  // namespace humangan
