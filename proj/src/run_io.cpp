// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "humangan/errors.hpp"

namespace humangan {

namespace {

std::string numbered(const char* stem, std::size_t iteration, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%04zu%s", stem, iteration, ext);
    return buf;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::size_t iteration) {
    return run_dir / "snapshots" / numbered("snapshot_", iteration, ".ckpt");
}

std::filesystem::path points_path(const std::filesystem::path& run_dir, std::size_t iteration) {
    return run_dir / "points" / numbered("iter_", iteration, ".csv");
}

void write_points_csv(std::ostream& out, std::span<const FeatureVector> points) {
    const Eigen::Index d = points.empty() ? 2 : points.front().size();
    for (Eigen::Index i = 0; i < d; ++i) out << (i ? "," : "") << "dim" << i;
    out << '\n';
    for (const auto& p : points) {
        for (Eigen::Index i = 0; i < p.size(); ++i) out << (i ? "," : "") << format_double(p[i]);
        out << '\n';
    }
}

std::vector<FeatureVector> read_points_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<FeatureVector> points;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": not a number '" + cell + "'");
            }
        }
        points.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    return points;
}

void write_metrics_csv(std::ostream& out, const TrainingRun& run, std::span<const SnapshotEval> evals) {
    out << "iteration,query_count,objective,param_grad_norm,data_grad_norm_mean,"
           "closed_mean,closed_q1,closed_median,closed_q3,open_mean,open_q1,open_median,open_q3\n";
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        const auto& rec = run.snapshots[s];
        const double dmean =
            rec.data_grad_norms.empty()
                ? 0.0
                : std::accumulate(rec.data_grad_norms.begin(), rec.data_grad_norms.end(), 0.0) /
                      static_cast<double>(rec.data_grad_norms.size());
        out << rec.iteration << ',' << rec.query_count << ',' << format_double(rec.objective) << ','
            << format_double(rec.param_grad_norm) << ',' << format_double(dmean);
        if (s < evals.size()) {
            for (const auto* e : {&evals[s].closed, &evals[s].open})
                out << ',' << format_double(e->stats.mean) << ',' << format_double(e->stats.q1) << ','
                    << format_double(e->stats.median) << ',' << format_double(e->stats.q3);
        } else {
            out << ",,,,,,,,";
        }
        out << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    // Write-then-rename so a crash never leaves a torn checkpoint.
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_snapshot(const std::filesystem::path& run_dir, const TrainingRun& run, const IterationRecord& record) {
    const auto& cfg = run.config;
    const Metadata meta{
        {"completed_iterations", std::to_string(record.iteration)},
        {"query_count", std::to_string(record.query_count)},
        {"objective", format_double(record.objective)},
        {"param_grad_norm", format_double(record.param_grad_norm)},
        {"data_grad_norms", join_doubles(record.data_grad_norms)},
        {"n", std::to_string(cfg.n)},
        {"iterations", std::to_string(cfg.iterations)},
        {"alpha", format_double(cfg.alpha)},
        {"sigma", format_double(cfg.nes.sigma)},
        {"r", std::to_string(cfg.nes.r)},
        {"nes_seed", std::to_string(cfg.nes.seed)},
        {"prior_seed", std::to_string(cfg.prior_seed)},
        {"eval_open_count", std::to_string(cfg.eval_open_count)},
    };
    write_text_file(snapshot_path(run_dir, record.iteration), format_checkpoint(record.params, run.generator_seed, meta));
    std::ostringstream pts;
    write_points_csv(pts, record.points);
    write_text_file(points_path(run_dir, record.iteration), pts.str());
}

}  // namespace humangan
