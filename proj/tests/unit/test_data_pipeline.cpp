// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "humangan/data_pipeline.hpp"
#include "humangan/errors.hpp"
#include "support/convert.hpp"

using namespace humangan;
using support::vec;

namespace {

using Col = std::vector<double>;

double dot(const Col& a, const Col& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Gram-Schmidt on two columns.
std::pair<Col, Col> orthonormalize(Col a, Col b) {
    const double na = std::sqrt(dot(a, a));
    for (double& x : a) x /= na;
    const double p = dot(a, b);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= p * a[i];
    const double nb = std::sqrt(dot(b, b));
    for (double& x : b) x /= nb;
    return {a, b};
}

// Largest principal angle between two 2-D subspaces given orthonormal bases.
double largest_principal_angle(const std::pair<Col, Col>& u, const std::pair<Col, Col>& v) {
    const double m00 = dot(u.first, v.first), m01 = dot(u.first, v.second);
    const double m10 = dot(u.second, v.first), m11 = dot(u.second, v.second);
    // Smallest singular value of the 2x2 cross-Gram matrix.
    const double a = m00 * m00 + m10 * m10, d = m01 * m01 + m11 * m11, b = m00 * m01 + m10 * m11;
    const double tr = a + d, det = a * d - b * b;
    const double lo = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
    return std::acos(std::min(1.0, std::sqrt(std::max(0.0, lo))));
}

Col column(const Matrix& m, Eigen::Index j) {
    Col c(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) c[static_cast<std::size_t>(i)] = m(i, j);
    return c;
}

Dataset embedded_rank2(std::size_t n, std::uint64_t seed, const Col& a0, const Col& a1, const Col& m) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const double g0 = 3 * g(rng), g1 = g(rng);
        Vector row(5);
        for (int j = 0; j < 5; ++j) row(j) = a0[j] * g0 + a1[j] * g1 + m[j];
        d.rows.push_back(row);
    }
    return d;
}

const Col kA0{1, 2, 0, -1, 0.5};
const Col kA1{0, 1, 1, 1, -2};
const Col kM{10, -3, 0.5, 7, 2};

}  // namespace

TEST_CASE("CSV parsing", "[data]") {
    SECTION("plain rows") {
        const Dataset d = parse_vectors("1,2\n3,4\n5,6\n");
        REQUIRE(d.rows.size() == 3);
        CHECK(d.dim() == 2);
        CHECK(d.rows[2] == vec({5, 6}));
        CHECK(d.header.empty());
    }
    SECTION("header is detected and skipped") {
        const Dataset d = parse_vectors("pc1,pc2\n0.5,-1\n2,3e-2\n");
        CHECK(d.header == std::vector<std::string>{"pc1", "pc2"});
        REQUIRE(d.rows.size() == 2);
        CHECK(d.rows[1] == vec({2, 0.03}));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(parse_vectors(""), ParseError);
        CHECK_THROWS_AS(parse_vectors("a,b\n"), ParseError);
        CHECK_THROWS_WITH(parse_vectors("1,2\n3\n", "f.csv"), Catch::Matchers::ContainsSubstring("f.csv:2"));
        CHECK_THROWS_WITH(parse_vectors("1,2\n3,x\n", "f.csv"), Catch::Matchers::ContainsSubstring("non-numeric"));
        CHECK_THROWS_AS(parse_vectors("1,nan\n"), ParseError);
    }
}

TEST_CASE("CSV write-then-read round trip", "[data][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    const auto path = std::filesystem::temp_directory_path() / "humangan_data_roundtrip.csv";
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 1 + trial % 4;
        std::vector<Vector> rows(7, Vector(dim));
        std::ofstream os(path);
        os.precision(17);
        os << "c0";
        for (int j = 1; j < dim; ++j) os << ",c" << j;
        os << "\n";
        for (auto& r : rows) {
            for (int j = 0; j < dim; ++j) {
                r(j) = u(rng);
                os << (j ? "," : "") << r(j);
            }
            os << "\n";
        }
        os.close();
        const Dataset d = load_vectors(path);
        CHECK(d.header.size() == static_cast<std::size_t>(dim));
        CHECK(d.rows == rows);
    }
    CHECK_THROWS_AS(load_vectors(path.string() + ".missing"), ParseError);
}

TEST_CASE("principal subspace of embedded rank-2 data", "[data][pca]") {
    const Dataset d = embedded_rank2(100000, 11, kA0, kA1, kM);
    const ProjectionModel model = fit_projection(d, 2);
    const double angle = largest_principal_angle(orthonormalize(kA0, kA1),
                                                 {column(model.components, 0), column(model.components, 1)});
    INFO("largest principal angle " << angle);
    CHECK(angle < 1e-3);
    CHECK(model.eigenvalues(0) >= model.eigenvalues(1));
}

TEST_CASE("projected training data is standardized", "[data][pca]") {
    const Dataset d = embedded_rank2(100000, 12, kA0, kA1, kM);
    const ProjectionModel model = fit_projection(d, 2);
    const auto f = project(model, d);
    for (int j = 0; j < 2; ++j) {
        long double s = 0;
        for (const auto& x : f) s += x(j);
        const long double mean = s / f.size();
        long double ss = 0;
        for (const auto& x : f) ss += (x(j) - mean) * (x(j) - mean);
        const double var = static_cast<double>(ss / f.size());
        CHECK(std::abs(static_cast<double>(mean)) < 1e-10);
        CHECK(std::abs(var - 1) < 1e-10);
    }
}

TEST_CASE("projection model invariants", "[data][pca][property]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + trial % 5;
        const std::size_t k = 1 + static_cast<std::size_t>(trial) % static_cast<std::size_t>(dim);
        Dataset d;
        for (int i = 0; i < 60; ++i) {
            Vector r(dim);
            for (int j = 0; j < dim; ++j) r(j) = g(rng) * (j + 1) + j;
            d.rows.push_back(r);
        }
        const ProjectionModel m = fit_projection(d, k);
        REQUIRE(m.k() == k);
        const Matrix gram = m.components.transpose() * m.components;
        CHECK((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index j = 0; j < m.components.cols(); ++j) {
            Eigen::Index arg;
            m.components.col(j).cwiseAbs().maxCoeff(&arg);
            CHECK(m.components(arg, j) > 0);
            CHECK(m.scales(j) > 0);
            if (j + 1 < m.components.cols()) CHECK(m.eigenvalues(j) >= m.eigenvalues(j + 1));
        }
        CHECK(project(m, m.mean).norm() == 0.0);

        // project(inverse_hint(f)) == f
        Vector f(static_cast<Eigen::Index>(k));
        for (auto& x : f) x = g(rng);
        CHECK((project(m, inverse_hint(m, f)) - f).cwiseAbs().maxCoeff() < 1e-10);

        // Affine: project(a v + b w) = a project(v) + b project(w) + (1 - a - b) project(0-shift)
        const Vector v = d.rows[0], w = d.rows[1];
        const double a = g(rng), b = g(rng);
        const Vector lhs = project(m, a * v + b * w + (1 - a - b) * m.mean);
        const Vector rhs = a * project(m, v) + b * project(m, w);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8 * (1 + rhs.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("isotropic 2-D data scales to unit variance", "[data][pca]") {
    Dataset d;
    for (double x : {-1.0, 1.0})
        for (double y : {-1.0, 1.0}) d.rows.push_back(vec({x + 4, y}));
    const ProjectionModel m = fit_projection(d, 2);
    for (const auto& f : project(m, d)) CHECK(f.cwiseAbs().isApprox(vec({1, 1})));
}

TEST_CASE("degenerate and invalid fits", "[data][pca]") {
    Dataset line;
    for (int i = 0; i < 10; ++i) line.rows.push_back(vec({double(i), 2.0 * i, -1.0 * i}));
    CHECK_THROWS_AS(fit_projection(line, 2), DegenerateSpectrumError);
    CHECK_NOTHROW(fit_projection(line, 1));
    Dataset tiny;
    tiny.rows = {vec({1, 2}), vec({3, 5})};
    CHECK_THROWS_AS(fit_projection(tiny, 2), ConfigError);
    CHECK_THROWS_AS(fit_projection(line, 4), ConfigError);
    const ProjectionModel m = fit_projection(line, 1);
    CHECK_THROWS_AS(project(m, vec({1, 2})), ConfigError);
    CHECK_THROWS_AS(inverse_hint(m, vec({1, 2})), ConfigError);
}

TEST_CASE("projection model text round trip", "[data][io]") {
    const ProjectionModel m = fit_projection(embedded_rank2(500, 4, kA0, kA1, kM), 2);
    const ProjectionModel back = parse_projection(format_projection(m));
    CHECK(back.mean == m.mean);
    CHECK(back.components == m.components);
    CHECK(back.eigenvalues == m.eigenvalues);
    CHECK(back.scales == m.scales);
    CHECK_THROWS_AS(parse_projection("garbage"), ParseError);
}
