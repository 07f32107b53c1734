#pragma once

#include "cosen/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace cosen {

enum class Activation { kReLU, kIdentity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
    Matrix weights;  // out x in
    Vector bias;     // out
    Activation activation = Activation::kIdentity;
};

/// Feed-forward multi-layer perceptron. The last layer is always Identity so
/// its raw activations feed the cost-sensitive loss layer.
class Network {
public:
    /// Throws ShapeError if layer dimensions do not chain or the final layer
    /// is not Identity.
    explicit Network(std::vector<Layer> layers);

    std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().weights.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(layers_.back().weights.rows()); }
    std::size_t feature_dim() const { return static_cast<std::size_t>(layers_.back().weights.cols()); }
    std::size_t n_layers() const { return layers_.size(); }
    /// Layer widths, input first.
    std::vector<std::size_t> widths() const;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& mutable_layers() { return layers_; }

private:
    std::vector<Layer> layers_;
};

/// ReLU hidden layers, Identity output layer; weights uniform in
/// [-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases zero.
Network init_network(std::span<const std::size_t> dims, std::uint64_t seed);

struct ForwardCache {
    std::vector<Vector> inputs;          // input of each layer
    std::vector<Vector> pre_activations;  // W a + b of each layer
};

struct ForwardResult {
    Vector output;    // o, the final-layer activations
    Vector features;  // input of the final layer (penultimate representation)
    ForwardCache cache;
};

/// Throws ShapeError on a length mismatch, NumericError on non-finite input.
ForwardResult forward_pass(const Network& net, const Vector& x);

/// Parameter gradients with the same shapes as the network's layers.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static Gradients zeros_like(const Network& net);
    Gradients& operator+=(const Gradients& other);
    Gradients& operator*=(double factor);
};

/// Reverse-mode chain rule seeded by d loss / d o. Throws ShapeError when
/// grad_o has the wrong length and StateError when the cache does not match
/// the network.
Gradients backward_pass(const Network& net, const ForwardCache& cache, const Vector& grad_o);

struct SgdConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    std::size_t epochs = 30;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// theta <- theta - learning_rate * grad. Throws ShapeError on mismatch.
Network sgd_step(Network net, const Gradients& grads, const SgdConfig& config);
void apply_sgd_step(Network& net, const Gradients& grads, double learning_rate);

/// argmax of the raw output activations (lowest index on ties). No cost
/// matrix takes part in inference.
ClassIndex predict(const Network& net, const Vector& x);

/// Per-sample loss callback: returns (loss, d loss / d o) for output o and
/// label.
using SampleLossFn = std::function<std::pair<double, Vector>(const Vector& o, ClassIndex label)>;

struct EpochStats {
    double mean_loss = 0.0;
    double error_rate = 0.0;  // training error measured during the pass
};

/// One pass of mini-batch SGD over `order` (indices into the rows of
/// `features`). Batch gradients are averaged in a fixed summation order.
EpochStats train_epoch(Network& net, const Matrix& features, std::span<const ClassIndex> labels,
                       std::span<const std::size_t> order, double learning_rate,
                       std::size_t batch_size, const SampleLossFn& loss);

}  // namespace cosen
