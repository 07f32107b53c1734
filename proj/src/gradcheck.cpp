#include "cosen/gradcheck.hpp"

#include "cosen/error.hpp"
#include "cosen/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cosen {

double relative_error(double analytic, double numeric, double floor) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / scale;
}

namespace {

struct Draw {
    Network net;
    CostMatrix costs;
    Vector x;
    ClassIndex label;
};

double loss_value(LossKind kind, const Draw& d, const Network& net) {
    const ForwardResult fr = forward_pass(net, d.x);
    return forward(kind, d.costs, TargetVector::one_hot(d.label, net.output_dim()), fr.output).value;
}

bool near_kink(LossKind kind, const Draw& d, double margin) {
    const ForwardResult fr = forward_pass(d.net, d.x);
    for (std::size_t l = 0; l + 1 < fr.cache.pre_activations.size(); ++l) {
        if ((fr.cache.pre_activations[l].array().abs() < margin).any()) return true;
    }
    const std::size_t n = d.net.output_dim();
    const LossEvaluation ev = forward(kind, d.costs, TargetVector::one_hot(d.label, n), fr.output);
    if (ev.log_floored) return true;
    if (kind == LossKind::kHinge) {
        for (std::size_t k = 0; k < n; ++k) {
            const double sign = k == d.label ? 1.0 : -1.0;
            if (std::abs(1.0 - sign * ev.squashed[static_cast<Eigen::Index>(k)]) < margin) return true;
        }
    }
    return false;
}

Draw draw_configuration(std::mt19937_64& rng, const GradCheckOptions& options) {
    std::uniform_int_distribution<std::size_t> n_layers(1, options.max_layers);
    std::uniform_int_distribution<std::size_t> width(2, options.max_width);
    std::vector<std::size_t> dims(n_layers(rng) + 1);
    for (auto& w : dims) w = width(rng);

    Network net = init_network(dims, rng());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& layer : net.mutable_layers()) {
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.1 * normal(rng);
    }

    const std::size_t n = dims.back();
    std::uniform_real_distribution<double> cost(0.05, 1.0);
    Matrix xi(n, n);
    for (Eigen::Index i = 0; i < xi.rows(); ++i) {
        for (Eigen::Index j = 0; j < xi.cols(); ++j) xi(i, j) = cost(rng);
    }
    Vector x(dims.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
    std::uniform_int_distribution<std::size_t> label(0, n - 1);
    return Draw{std::move(net), CostMatrix(std::move(xi)), std::move(x), label(rng)};
}

}  // namespace

GradCheckSummary check_loss_gradients(LossKind kind, const GradCheckOptions& options) {
    if (options.configurations == 0 || options.max_layers == 0 || options.max_width < 2 || !(options.step > 0.0)) {
        throw ConfigError("invalid gradient check options");
    }
    GradCheckSummary summary;
    summary.loss = kind;
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(kind) * 0x9E3779B97F4A7C15ULL);
    const double h = options.step;

    while (summary.configurations < options.configurations) {
        Draw d = draw_configuration(rng, options);
        if (near_kink(kind, d, options.kink_margin)) {
            ++summary.rejected_draws;
            continue;
        }
        ++summary.configurations;
        const std::size_t n = d.net.output_dim();
        const ForwardResult fr = forward_pass(d.net, d.x);
        const Vector grad_o = backward(kind, d.costs, TargetVector::one_hot(d.label, n), fr.output);
        const Gradients analytic = backward_pass(d.net, fr.cache, grad_o);

        Network probe = d.net;
        auto check = [&](double& param, double analytic_value) {
            const double saved = param;
            param = saved + h;
            const double plus = loss_value(kind, d, probe);
            param = saved - h;
            const double minus = loss_value(kind, d, probe);
            param = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            summary.max_relative_error = std::max(summary.max_relative_error,
                                                  relative_error(analytic_value, numeric, options.error_floor));
            ++summary.parameters_checked;
        };
        auto& layers = probe.mutable_layers();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            Matrix& w = layers[l].weights;
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                for (Eigen::Index j = 0; j < w.cols(); ++j) check(w(i, j), analytic.weights[l](i, j));
            }
            Vector& b = layers[l].bias;
            for (Eigen::Index i = 0; i < b.size(); ++i) check(b[i], analytic.biases[l][i]);
        }
    }
    summary.passed = summary.max_relative_error < options.tolerance;
    return summary;
}

std::vector<GradCheckSummary> run_gradient_checks(const GradCheckOptions& options) {
    std::vector<GradCheckSummary> out;
    for (LossKind kind : {LossKind::kMse, LossKind::kHinge, LossKind::kCrossEntropy}) {
        out.push_back(check_loss_gradients(kind, options));
    }
    return out;
}

}  // namespace cosen
