// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run directory layout:
//   snapshots/snapshot_NNNN.ckpt   generator checkpoint after NNNN updates
//   points/iter_NNNN.csv           closed-data points of that snapshot
//   metrics.csv                    one row per snapshot

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "humangan/trainer.hpp"

namespace humangan {

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::size_t iteration);
std::filesystem::path points_path(const std::filesystem::path& run_dir, std::size_t iteration);

/// Columns dim0,dim1,...; header row included.
void write_points_csv(std::ostream& out, std::span<const FeatureVector> points);
std::vector<FeatureVector> read_points_csv(const std::filesystem::path& path);

/// Columns: iteration,query_count,objective,param_grad_norm,data_grad_norm_mean,
/// closed_mean,closed_q1,closed_median,closed_q3,open_mean,open_q1,open_median,open_q3.
/// Evaluation columns are left empty when `evals` is empty.
void write_metrics_csv(std::ostream& out, const TrainingRun& run, std::span<const SnapshotEval> evals);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Writes snapshot checkpoint and points CSV for one record.
void write_snapshot(const std::filesystem::path& run_dir, const TrainingRun& run, const IterationRecord& record);

}  // namespace humangan
