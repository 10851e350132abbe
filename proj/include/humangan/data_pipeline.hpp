// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Real-data ingestion and reduction: CSV vectors -> top-k principal
// components -> zero-mean, unit-variance features. Only the baseline GAN and
// generator initialization consume real data.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "humangan/types.hpp"

namespace humangan {

struct Dataset {
    std::vector<Vector> rows;
    std::vector<std::string> labels;  // empty, or one per row
    std::vector<std::string> header;  // column names if the file had a header

    std::size_t dim() const { return rows.empty() ? 0 : static_cast<std::size_t>(rows.front().size()); }
};

/// Comma-separated numeric rows. A first line with any non-numeric cell is
/// treated as a header. Throws ParseError on ragged rows, non-numeric
/// cells, or an empty file.
Dataset load_vectors(const std::filesystem::path& path);
Dataset parse_vectors(const std::string& text, const std::string& source_name = "<memory>");

struct ProjectionModel {
    Vector mean;            // d_raw
    Matrix components;      // d_raw x k, orthonormal columns
    Vector eigenvalues;     // k, non-increasing (population covariance)
    Vector scales;          // k, multiply projected coordinates to get unit variance

    std::size_t raw_dim() const { return static_cast<std::size_t>(mean.size()); }
    std::size_t k() const { return static_cast<std::size_t>(components.cols()); }
};

/// Covariance eigendecomposition of the centered data; keeps the top k
/// components with the largest-magnitude entry of each made positive.
/// Throws DegenerateSpectrumError if fewer than k eigenvalues are nonzero.
ProjectionModel fit_projection(const Dataset& data, std::size_t k);

/// scales .* (components^T (v - mean))
FeatureVector project(const ProjectionModel& model, const Vector& v);
std::vector<FeatureVector> project(const ProjectionModel& model, const Dataset& data);

/// Minimum-norm preimage: mean + components (f ./ scales)
Vector inverse_hint(const ProjectionModel& model, const FeatureVector& f);

std::string format_projection(const ProjectionModel& model);
ProjectionModel parse_projection(const std::string& text);

}  // namespace humangan
