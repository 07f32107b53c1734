#include "cosen/network.hpp"

#include "cosen/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace cosen {

std::string_view to_string(Activation a) {
    return a == Activation::kReLU ? "relu" : "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::kReLU;
    if (name == "identity") return Activation::kIdentity;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
            throw ShapeError("layer " + std::to_string(l) + " has an empty weight matrix");
        }
        if (layer.bias.size() != layer.weights.rows()) {
            throw ShapeError("layer " + std::to_string(l) + " bias length does not match its outputs");
        }
        if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
            std::ostringstream os;
            os << "layer " << l << " expects " << layer.weights.cols() << " inputs but layer " << l - 1
               << " produces " << layers_[l - 1].weights.rows();
            throw ShapeError(os.str());
        }
    }
    if (layers_.back().activation != Activation::kIdentity) {
        throw ShapeError("final layer must use the identity activation");
    }
}

std::vector<std::size_t> Network::widths() const {
    std::vector<std::size_t> w{input_dim()};
    for (const Layer& layer : layers_) w.push_back(static_cast<std::size_t>(layer.weights.rows()));
    return w;
}

Network init_network(std::span<const std::size_t> dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ShapeError("a network needs at least an input and an output width");
    for (std::size_t w : dims) {
        if (w == 0) throw ShapeError("layer widths must be positive");
    }
    std::mt19937_64 rng(seed);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(dims[l]);
        const auto fan_out = static_cast<Eigen::Index>(dims[l + 1]);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Layer layer;
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) layer.weights(r, c) = dist(rng);
        }
        layer.bias = Vector::Zero(fan_out);
        layer.activation = (l + 2 == dims.size()) ? Activation::kIdentity : Activation::kReLU;
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers));
}

ForwardResult forward_pass(const Network& net, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
        std::ostringstream os;
        os << "input length " << x.size() << " does not match network input " << net.input_dim();
        throw ShapeError(os.str());
    }
    if (!x.allFinite()) throw NumericError("non-finite network input");

    ForwardResult result;
    result.cache.inputs.reserve(net.n_layers());
    result.cache.pre_activations.reserve(net.n_layers());
    Vector a = x;
    for (const Layer& layer : net.layers()) {
        Vector z = layer.weights * a + layer.bias;
        result.cache.inputs.push_back(std::move(a));
        a = layer.activation == Activation::kReLU ? Vector(z.cwiseMax(0.0)) : z;
        result.cache.pre_activations.push_back(std::move(z));
    }
    result.features = result.cache.inputs.back();
    result.output = std::move(a);
    return result;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const Layer& layer : net.layers()) {
        g.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        g.biases.push_back(Vector::Zero(layer.bias.size()));
    }
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    if (weights.size() != other.weights.size()) throw ShapeError("gradient layer counts differ");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

Gradients& Gradients::operator*=(double factor) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] *= factor;
        biases[l] *= factor;
    }
    return *this;
}

Gradients backward_pass(const Network& net, const ForwardCache& cache, const Vector& grad_o) {
    if (static_cast<std::size_t>(grad_o.size()) != net.output_dim()) {
        throw ShapeError("output gradient length does not match network output");
    }
    const std::size_t n_layers = net.n_layers();
    if (cache.inputs.size() != n_layers || cache.pre_activations.size() != n_layers) {
        throw StateError("forward cache was produced by a network with a different depth");
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = net.layers()[l];
        if (cache.inputs[l].size() != layer.weights.cols() ||
            cache.pre_activations[l].size() != layer.weights.rows()) {
            throw StateError("forward cache does not match layer " + std::to_string(l));
        }
    }

    Gradients grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);
    Vector delta = grad_o;  // d loss / d (post-activation output of layer l)
    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = net.layers()[l];
        if (layer.activation == Activation::kReLU) {
            // Derivative taken as 0 at exactly 0.
            const Vector& z = cache.pre_activations[l];
            for (Eigen::Index i = 0; i < delta.size(); ++i) {
                if (!(z[i] > 0.0)) delta[i] = 0.0;
            }
        }
        grads.weights[l] = delta * cache.inputs[l].transpose();
        grads.biases[l] = delta;
        if (l > 0) delta = layer.weights.transpose() * delta;
    }
    return grads;
}

void SgdConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning rate must be positive");
    }
    if (batch_size == 0) throw ConfigError("batch size must be positive");
}

void apply_sgd_step(Network& net, const Gradients& grads, double learning_rate) {
    auto& layers = net.mutable_layers();
    if (grads.weights.size() != layers.size() || grads.biases.size() != layers.size()) {
        throw ShapeError("gradient layer count does not match network");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (grads.weights[l].rows() != layers[l].weights.rows() ||
            grads.weights[l].cols() != layers[l].weights.cols() ||
            grads.biases[l].size() != layers[l].bias.size()) {
            throw ShapeError("gradient shape does not match layer " + std::to_string(l));
        }
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= learning_rate * grads.weights[l];
        layers[l].bias -= learning_rate * grads.biases[l];
    }
}

Network sgd_step(Network net, const Gradients& grads, const SgdConfig& config) {
    config.validate();
    apply_sgd_step(net, grads, config.learning_rate);
    return net;
}

ClassIndex predict(const Network& net, const Vector& x) { return argmax(forward_pass(net, x).output); }

EpochStats train_epoch(Network& net, const Matrix& features, std::span<const ClassIndex> labels,
                       std::span<const std::size_t> order, double learning_rate,
                       std::size_t batch_size, const SampleLossFn& loss) {
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw ShapeError("feature rows and labels differ in count");
    }
    EpochStats stats;
    if (order.empty()) return stats;

    double loss_sum = 0.0;
    std::size_t errors = 0;
    Gradients batch = Gradients::zeros_like(net);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        for (auto& w : batch.weights) w.setZero();
        for (auto& b : batch.biases) b.setZero();
        for (std::size_t i = start; i < end; ++i) {
            const std::size_t row = order[i];
            if (row >= labels.size()) throw ShapeError("sample index out of range");
            const Vector x = features.row(static_cast<Eigen::Index>(row)).transpose();
            ForwardResult fr = forward_pass(net, x);
            if (argmax(fr.output) != labels[row]) ++errors;
            auto [value, grad_o] = loss(fr.output, labels[row]);
            loss_sum += value;
            batch += backward_pass(net, fr.cache, grad_o);
        }
        batch *= 1.0 / static_cast<double>(end - start);
        apply_sgd_step(net, batch, learning_rate);
    }
    stats.mean_loss = loss_sum / static_cast<double>(order.size());
    stats.error_rate = static_cast<double>(errors) / static_cast<double>(order.size());
    return stats;
}

}  // namespace cosen
