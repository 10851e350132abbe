// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/data_pipeline.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "humangan/errors.hpp"
#include "humangan/run_io.hpp"

namespace humangan {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

Dataset parse_vectors(const std::string& text, const std::string& source_name) {
    Dataset data;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> values;
        values.reserve(cells.size());
        bool numeric = true;
        for (const auto& c : cells) {
            const auto v = to_number(c);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (first && !numeric) {
            data.header = cells;
            width = cells.size();
            first = false;
            continue;
        }
        first = false;
        if (!numeric) {
            for (const auto& c : cells)
                if (!to_number(c))
                    throw ParseError(source_name + ":" + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
        }
        if (width == 0) width = values.size();
        if (values.size() != width)
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " columns, found " + std::to_string(values.size()));
        Vector row = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        if (!row.allFinite()) throw ParseError(source_name + ":" + std::to_string(line_no) + ": non-finite value");
        data.rows.push_back(std::move(row));
    }
    if (data.rows.empty()) throw ParseError(source_name + ": dataset is empty");
    return data;
}

Dataset load_vectors(const std::filesystem::path& path) { return parse_vectors(read_text_file(path), path.string()); }

ProjectionModel fit_projection(const Dataset& data, std::size_t k) {
    const std::size_t n = data.rows.size();
    const std::size_t d = data.dim();
    if (k < 1) throw ConfigError("projection needs k >= 1");
    if (n <= k) throw ConfigError("projection needs more rows (" + std::to_string(n) + ") than components (" +
                                  std::to_string(k) + ")");
    if (d < k) throw ConfigError("raw dimension " + std::to_string(d) + " is smaller than k=" + std::to_string(k));

    const auto dd = static_cast<Eigen::Index>(d);
    Vector mean = Vector::Zero(dd);
    for (const auto& r : data.rows) mean += r;
    mean /= static_cast<double>(n);

    Matrix cov = Matrix::Zero(dd, dd);
    for (const auto& r : data.rows) {
        const Vector c = r - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw DegenerateSpectrumError("covariance eigendecomposition failed");
    // Eigen returns ascending eigenvalues.
    const Vector& evals = solver.eigenvalues();
    const double largest = std::max(evals[dd - 1], 0.0);
    const double tol = largest * static_cast<double>(d) * 1e-12;

    ProjectionModel model;
    model.mean = mean;
    model.components.resize(dd, static_cast<Eigen::Index>(k));
    model.eigenvalues.resize(static_cast<Eigen::Index>(k));
    model.scales.resize(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const Eigen::Index src = dd - 1 - static_cast<Eigen::Index>(j);
        const double lambda = evals[src];
        if (!(lambda > tol))
            throw DegenerateSpectrumError("only " + std::to_string(j) + " nonzero eigenvalues, need " + std::to_string(k));
        Vector comp = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp[arg] < 0) comp = -comp;
        model.components.col(static_cast<Eigen::Index>(j)) = comp;
        model.eigenvalues[static_cast<Eigen::Index>(j)] = lambda;
    }

    // Scale from the empirical variance of the projected coordinates rather
    // than the eigenvalue, so the training set comes out at unit variance to
    // rounding precision.
    Vector sq = Vector::Zero(static_cast<Eigen::Index>(k));
    for (const auto& r : data.rows) sq += (model.components.transpose() * (r - mean)).cwiseAbs2();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j)
        model.scales[j] = 1.0 / std::sqrt(sq[j] / static_cast<double>(n));
    return model;
}

FeatureVector project(const ProjectionModel& model, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != model.raw_dim())
        throw ConfigError("vector dimension " + std::to_string(v.size()) + " does not match projection input " +
                          std::to_string(model.raw_dim()));
    return model.scales.cwiseProduct(model.components.transpose() * (v - model.mean));
}

std::vector<FeatureVector> project(const ProjectionModel& model, const Dataset& data) {
    std::vector<FeatureVector> out;
    out.reserve(data.rows.size());
    for (const auto& r : data.rows) out.push_back(project(model, r));
    return out;
}

Vector inverse_hint(const ProjectionModel& model, const FeatureVector& f) {
    if (static_cast<std::size_t>(f.size()) != model.k())
        throw ConfigError("feature dimension " + std::to_string(f.size()) + " does not match projection k " +
                          std::to_string(model.k()));
    return model.mean + model.components * f.cwiseQuotient(model.scales);
}

std::string format_projection(const ProjectionModel& model) {
    std::ostringstream os;
    os << "humangan-projection v1\n";
    os << "raw_dim = " << model.raw_dim() << "\nk = " << model.k() << '\n';
    auto row = [&](const char* key, const Vector& v) {
        os << key << " =";
        for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v[i]);
        os << '\n';
    };
    row("mean", model.mean);
    row("eigenvalues", model.eigenvalues);
    row("scales", model.scales);
    for (Eigen::Index j = 0; j < model.components.cols(); ++j) row("component", model.components.col(j));
    return os.str();
}

ProjectionModel parse_projection(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "humangan-projection v1") throw ParseError("not a projection model file");
    ProjectionModel m;
    std::size_t raw = 0, k = 0;
    std::vector<Vector> comps;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(' ') + 1);
        std::istringstream vs(line.substr(eq + 1));
        std::vector<double> vals;
        std::string tok;
        while (vs >> tok) vals.push_back(std::stod(tok));
        const Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        if (key == "raw_dim") raw = static_cast<std::size_t>(vals.at(0));
        else if (key == "k") k = static_cast<std::size_t>(vals.at(0));
        else if (key == "mean") m.mean = v;
        else if (key == "eigenvalues") m.eigenvalues = v;
        else if (key == "scales") m.scales = v;
        else if (key == "component") comps.push_back(v);
    }
    if (static_cast<std::size_t>(m.mean.size()) != raw || comps.size() != k ||
        static_cast<std::size_t>(m.scales.size()) != k)
        throw ParseError("projection model file is inconsistent");
    m.components.resize(static_cast<Eigen::Index>(raw), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        if (static_cast<std::size_t>(comps[j].size()) != raw) throw ParseError("projection component has wrong length");
        m.components.col(static_cast<Eigen::Index>(j)) = comps[j];
    }
    return m;
}

}  // namespace humangan
