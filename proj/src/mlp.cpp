// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0

#include "humangan/mlp.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "humangan/errors.hpp"

namespace humangan {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    // Shortest text that parses back to the same double.
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

bool all_finite(const Vector& v) { return v.allFinite(); }

double sigmoid(double a) {
    // Split by sign so exp never overflows.
    if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

Mlp::Mlp(std::vector<std::size_t> sizes, OutputActivation output)
    : sizes_(std::move(sizes)), output_(output) {
    if (sizes_.size() < 2) throw ConfigError("network needs at least an input and an output layer");
    for (std::size_t s : sizes_)
        if (s == 0) throw ConfigError("layer sizes must be >= 1");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(sizes_[l]);
        const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
        layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
    }
}

Mlp Mlp::random(std::vector<std::size_t> sizes, OutputActivation output, double scale,
                std::uint64_t seed) {
    if (!(scale > 0)) throw ConfigError("init_scale must be > 0");
    Mlp net(std::move(sizes), output);
    Rng rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    Vector flat(static_cast<Eigen::Index>(net.parameter_count()));
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = dist(rng);
    net.assign(flat);
    return net;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    return n;
}

void Mlp::check_input(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim())
        throw ConfigError("input dimension " + std::to_string(x.size()) + " does not match network input " +
                          std::to_string(input_dim()));
}

Vector Mlp::forward(const Vector& x) const {
    check_input(x);
    Vector h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Vector a = layers_[l].weights * h + layers_[l].bias;
        const bool hidden = l + 1 < layers_.size();
        if (hidden || output_ == OutputActivation::sigmoid) a = a.unaryExpr(&sigmoid);
        h = std::move(a);
    }
    return h;
}

Mlp::Trace Mlp::trace(const Vector& x) const {
    check_input(x);
    Trace t;
    t.activations.reserve(layers_.size() + 1);
    t.activations.push_back(x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Vector a = layers_[l].weights * t.activations.back() + layers_[l].bias;
        const bool hidden = l + 1 < layers_.size();
        if (hidden || output_ == OutputActivation::sigmoid) a = a.unaryExpr(&sigmoid);
        t.activations.push_back(std::move(a));
    }
    return t;
}

Mlp::Gradients Mlp::backward(const Trace& trace, const Vector& output_grad) const {
    if (trace.activations.size() != layers_.size() + 1)
        throw ConfigError("trace does not belong to this network");
    if (static_cast<std::size_t>(output_grad.size()) != output_dim())
        throw ConfigError("output gradient has dimension " + std::to_string(output_grad.size()) +
                          ", expected " + std::to_string(output_dim()));

    Gradients g;
    g.params.resize(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index offset = g.params.size();

    Vector upstream = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Vector& out = trace.activations[l + 1];
        const Vector& in = trace.activations[l];
        const bool hidden = l + 1 < layers_.size();
        if (hidden || output_ == OutputActivation::sigmoid)
            upstream = upstream.cwiseProduct(out.cwiseProduct(Vector::Ones(out.size()) - out));

        const auto rows = layers_[l].weights.rows();
        const auto cols = layers_[l].weights.cols();
        offset -= rows * cols + rows;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) g.params[offset + r * cols + c] = upstream[r] * in[c];
        g.params.segment(offset + rows * cols, rows) = upstream;

        upstream = layers_[l].weights.transpose() * upstream;
    }
    g.input = std::move(upstream);
    return g;
}

Matrix Mlp::parameter_jacobian(const Vector& x) const {
    const Trace t = trace(x);
    const auto out = static_cast<Eigen::Index>(output_dim());
    Matrix jac(out, static_cast<Eigen::Index>(parameter_count()));
    for (Eigen::Index k = 0; k < out; ++k) jac.row(k) = backward(t, Vector::Unit(out, k)).params.transpose();
    return jac;
}

Vector Mlp::flatten() const {
    Vector flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index i = 0;
    for (const auto& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) flat[i++] = layer.weights(r, c);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat[i++] = layer.bias[r];
    }
    return flat;
}

void Mlp::assign(const Vector& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count())
        throw ConfigError("flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                          std::to_string(parameter_count()));
    Eigen::Index i = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = flat[i++];
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[i++];
    }
}

bool Mlp::finite() const {
    for (const auto& layer : layers_)
        if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
    return true;
}

bool Mlp::operator==(const Mlp& other) const {
    if (sizes_ != other.sizes_ || output_ != other.output_) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l)
        if (layers_[l].weights != other.layers_[l].weights || layers_[l].bias != other.layers_[l].bias) return false;
    return true;
}

}  // namespace humangan
