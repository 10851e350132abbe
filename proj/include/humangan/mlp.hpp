// Copyright (c) 2026, The humangan-trainer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small fully connected network with logistic-sigmoid hidden layers and
// either an identity or a sigmoid output. Shared by the generator and the
// baseline discriminator.
//
// Flat parameter order (checkpoints and Jacobian columns depend on it):
// layer by layer from the input side; within a layer the weight matrix
// row-major (row = output unit) followed by the bias vector.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "humangan/types.hpp"

namespace humangan {

enum class OutputActivation { identity, sigmoid };

struct DenseLayer {
    Matrix weights;  // out x in
    Vector bias;     // out
};

double sigmoid(double a);

class Mlp {
public:
    Mlp() = default;
    /// Zero-initialized network with layer widths sizes[0] -> ... -> sizes.back().
    Mlp(std::vector<std::size_t> sizes, OutputActivation output);

    /// Weights and biases i.i.d. uniform on [-scale, scale].
    static Mlp random(std::vector<std::size_t> sizes, OutputActivation output, double scale,
                      std::uint64_t seed);

    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    std::size_t parameter_count() const;
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    OutputActivation output_activation() const { return output_; }

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    /// activations[0] is the input, activations.back() the network output.
    struct Trace {
        std::vector<Vector> activations;
    };

    Vector forward(const Vector& x) const;
    Trace trace(const Vector& x) const;

    struct Gradients {
        Vector params;  // d(g . f)/d(theta), flat order
        Vector input;   // d(g . f)/dx
    };
    /// Reverse-mode product of output_grad with the network Jacobians.
    Gradients backward(const Trace& trace, const Vector& output_grad) const;

    /// d f / d theta, output_dim rows by parameter_count columns.
    Matrix parameter_jacobian(const Vector& x) const;

    Vector flatten() const;
    void assign(const Vector& flat);
    bool finite() const;

    bool operator==(const Mlp& other) const;

private:
    void check_input(const Vector& x) const;

    std::vector<std::size_t> sizes_;
    OutputActivation output_ = OutputActivation::identity;
    std::vector<DenseLayer> layers_;
};

}  // namespace humangan
