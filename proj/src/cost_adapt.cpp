#include "cosen/cost_adapt.hpp"

#include "cosen/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace cosen {

SeparabilityMatrix class_separability(const Matrix& features, std::span<const ClassIndex> labels,
                                      std::size_t n_classes) {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw ShapeError("feature rows and labels differ in count");
    }
    if (n_classes == 0) throw ShapeError("separability needs at least one class");
    const auto n = static_cast<Eigen::Index>(labels.size());
    for (ClassIndex c : labels) {
        if (c >= n_classes) throw ShapeError("label out of range");
    }

    // Pairwise squared distances, computed once.
    Matrix dist2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (features.row(i) - features.row(j)).squaredNorm();
            dist2(i, j) = d;
            dist2(j, i) = d;
        }
    }
    std::vector<std::size_t> counts(n_classes, 0);
    for (ClassIndex c : labels) ++counts[c];

    const auto nc = static_cast<Eigen::Index>(n_classes);
    const double inf = std::numeric_limits<double>::infinity();
    Matrix ratio_sum = Matrix::Zero(nc, nc);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ClassIndex p = labels[static_cast<std::size_t>(i)];
        if (counts[p] < 2) continue;
        // Nearest squared distance from sample i to each class (self excluded).
        Vector nearest = Vector::Constant(nc, inf);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto q = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)]);
            nearest[q] = std::min(nearest[q], dist2(i, j));
        }
        const double intra = std::sqrt(nearest[static_cast<Eigen::Index>(p)]);
        for (Eigen::Index q = 0; q < nc; ++q) {
            if (q == static_cast<Eigen::Index>(p) || counts[static_cast<std::size_t>(q)] == 0) continue;
            const double inter = std::sqrt(nearest[q]);
            double ratio;
            if (inter > 0.0) {
                ratio = std::min(intra / inter, kMaxSeparabilityRatio);
            } else {
                ratio = intra > 0.0 ? kMaxSeparabilityRatio : 1.0;
            }
            ratio_sum(static_cast<Eigen::Index>(p), q) += ratio;
        }
    }

    SeparabilityMatrix s;
    s.values = Matrix::Ones(nc, nc);
    std::vector<std::vector<bool>> measured(n_classes, std::vector<bool>(n_classes, false));
    double measured_sum = 0.0;
    std::size_t measured_count = 0;
    for (std::size_t p = 0; p < n_classes; ++p) {
        for (std::size_t q = 0; q < n_classes; ++q) {
            if (p == q || counts[p] < 2 || counts[q] == 0) continue;
            const double v = ratio_sum(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) /
                             static_cast<double>(counts[p]);
            s.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
            measured[p][q] = true;
            measured_sum += v;
            ++measured_count;
        }
    }
    const double fill = measured_count > 0 ? measured_sum / static_cast<double>(measured_count) : 1.0;
    for (std::size_t p = 0; p < n_classes; ++p) {
        if (counts[p] < 2) {
            s.degenerate = true;
            s.degenerate_classes.push_back(p);
        }
        for (std::size_t q = 0; q < n_classes; ++q) {
            if (p != q && !measured[p][q]) {
                s.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = fill;
                s.degenerate = true;
            }
        }
    }
    return s;
}

HistogramMatrix histogram_matrix(const Vector& h) {
    if (h.size() == 0) throw ShapeError("empty class histogram");
    if ((h.array() < 0.0).any() || !h.allFinite()) throw ValidityError("class fractions must be non-negative");
    if (std::abs(h.sum() - 1.0) > 1e-9) throw ValidityError("class fractions must sum to 1");
    const Eigen::Index n = h.size();
    HistogramMatrix out;
    out.h = h;
    out.H.resize(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) out.H(p, q) = p == q ? h[p] : std::max(h[p], h[q]);
    }
    return out;
}

void CostObjectiveParams::validate() const {
    if (sigma1 && !(*sigma1 > 0.0)) throw ConfigError("sigma1 must be positive");
    if (sigma2 && !(*sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(gamma_xi >= 0.0) || !std::isfinite(gamma_xi)) throw ConfigError("gamma_xi must be >= 0");
}

namespace {

std::pair<double, double> off_diagonal_stats(const Matrix& m) {
    const Eigen::Index n = m.rows();
    if (n < 2) return {m(0, 0), CostObjectiveParams::kMinSigma};
    double sum = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            if (p != q) sum += m(p, q);
        }
    }
    const double count = static_cast<double>(n * (n - 1));
    const double mean = sum / count;
    double var = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            if (p != q) var += (m(p, q) - mean) * (m(p, q) - mean);
        }
    }
    return {mean, std::max(std::sqrt(var / count), CostObjectiveParams::kMinSigma)};
}

}  // namespace

ResolvedGaussians resolve_gaussians(const Matrix& S, const Matrix& M, const CostObjectiveParams& params) {
    params.validate();
    const auto [s_mean, s_std] = off_diagonal_stats(S);
    const auto [m_mean, m_std] = off_diagonal_stats(M);
    return {params.mu1.value_or(s_mean), params.sigma1.value_or(s_std), params.mu2.value_or(m_mean),
            params.sigma2.value_or(m_std)};
}

Matrix build_target(const HistogramMatrix& H, const SeparabilityMatrix& S, const ConfusionMatrix& M,
                    const CostObjectiveParams& params) {
    const Eigen::Index n = H.H.rows();
    if (H.H.cols() != n || S.values.rows() != n || S.values.cols() != n || M.row_normalized.rows() != n ||
        M.row_normalized.cols() != n) {
        throw ShapeError("H, S and M must all be " + std::to_string(n) + "x" + std::to_string(n));
    }
    const ResolvedGaussians g = resolve_gaussians(S.values, M.row_normalized, params);
    Matrix T(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            const double ds = S.values(p, q) - g.mu1;
            const double dm = M.row_normalized(p, q) - g.mu2;
            const double v = H.H(p, q) * std::exp(-ds * ds / (2.0 * g.sigma1 * g.sigma1)) *
                             std::exp(-dm * dm / (2.0 * g.sigma2 * g.sigma2));
            T(p, q) = std::clamp(v, kMinCost, 1.0);
        }
    }
    return T;
}

Matrix cost_gradient(const Matrix& T, const CostMatrix& xi) {
    if (T.rows() != xi.entries().rows() || T.cols() != xi.entries().cols()) {
        throw ShapeError("target and cost matrix differ in shape");
    }
    return -(T - xi.entries());
}

CostMatrix update_costs(const CostMatrix& xi, const Matrix& direction, double gamma_xi) {
    if (direction.rows() != xi.entries().rows() || direction.cols() != xi.entries().cols()) {
        throw ShapeError("direction and cost matrix differ in shape");
    }
    if (!direction.allFinite()) throw NumericError("non-finite cost update direction");
    if (!std::isfinite(gamma_xi)) throw NumericError("non-finite cost learning rate");
    Matrix next = xi.entries() - gamma_xi * direction;
    next = next.cwiseMax(kMinCost).cwiseMin(1.0);
    return validate_cost_matrix(next);
}

std::string_view to_string(FixedCostSource source) {
    switch (source) {
        case FixedCostSource::kHistogram:
            return "h";
        case FixedCostSource::kSeparability:
            return "s";
        case FixedCostSource::kConfusion:
            return "m";
    }
    return "?";
}

FixedCostSource parse_fixed_cost_source(std::string_view name) {
    if (name == "h" || name == "H") return FixedCostSource::kHistogram;
    if (name == "s" || name == "S") return FixedCostSource::kSeparability;
    if (name == "m" || name == "M") return FixedCostSource::kConfusion;
    throw ConfigError("fixed cost source must be one of h, s, m; got '" + std::string(name) + "'");
}

FixedCosts fixed_cost_matrix(const Matrix& source) {
    if (source.rows() == 0 || source.rows() != source.cols()) throw ShapeError("fixed cost source must be square");
    if (!source.allFinite()) throw NumericError("non-finite fixed cost source");
    const double hi = source.maxCoeff();
    const double lo = source.minCoeff();
    const auto n = static_cast<std::size_t>(source.rows());
    if (hi == lo) return {CostMatrix::all_ones(n), true};
    Matrix m = source;
    if (hi > 1.0) m /= hi;
    m = m.cwiseMax(kMinCost).cwiseMin(1.0);
    return {CostMatrix(std::move(m)), false};
}

std::string_view to_string(ValidationMetric metric) {
    return metric == ValidationMetric::kBalancedError ? "balanced" : "overall";
}

ValidationMetric parse_validation_metric(std::string_view name) {
    if (name == "balanced") return ValidationMetric::kBalancedError;
    if (name == "overall") return ValidationMetric::kOverallError;
    throw ConfigError("validation metric must be 'balanced' or 'overall'");
}

NetworkOutputs run_network(const Network& net, const LabeledDataset& data) {
    NetworkOutputs out;
    out.predictions.reserve(data.size());
    out.features.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(net.feature_dim()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        ForwardResult fr = forward_pass(net, data.sample(i));
        out.predictions.push_back(argmax(fr.output));
        out.features.row(static_cast<Eigen::Index>(i)) = fr.features.transpose();
    }
    return out;
}

double validation_error(const ConfusionMatrix& confusion, ValidationMetric metric) {
    const Eigen::Index n = confusion.counts.rows();
    if (metric == ValidationMetric::kOverallError) {
        const long total = confusion.total();
        if (total == 0) return 0.0;
        return 1.0 - static_cast<double>(confusion.counts.trace()) / static_cast<double>(total);
    }
    double err = 0.0;
    std::size_t rows = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
        if (confusion.empty_rows[static_cast<std::size_t>(p)]) continue;
        err += 1.0 - confusion.row_normalized(p, p);
        ++rows;
    }
    return rows == 0 ? 0.0 : err / static_cast<double>(rows);
}

namespace {

void check_training_inputs(const LabeledDataset& train, const LabeledDataset& val, const Network& net,
                           const TrainingOptions& options) {
    options.sgd.validate();
    if (train.empty()) throw ConfigError("training set is empty");
    if (val.empty()) throw ConfigError("validation set is empty");
    if (train.dim() != net.input_dim() || val.dim() != net.input_dim()) {
        throw ShapeError("dataset dimension does not match network input");
    }
    if (train.n_classes() != net.output_dim() || val.n_classes() != net.output_dim()) {
        throw ShapeError("class count does not match network output");
    }
    if (options.separability_interval == 0) throw ConfigError("separability interval must be positive");
}

// Shared epoch driver. With `params` unset the cost matrix stays frozen.
TrainingResult run_training(const LabeledDataset& train, const LabeledDataset& val, Network net,
                            const CostMatrix& initial_costs, const TrainingOptions& options,
                            const CostObjectiveParams* params) {
    check_training_inputs(train, val, net, options);
    const std::size_t n_classes = net.output_dim();
    if (initial_costs.n_classes() != n_classes) throw ShapeError("cost matrix does not match network output");

    TrainingResult result{std::move(net), initial_costs, {}};
    CostMatrix candidate = initial_costs;
    const CostMatrix* active = &result.costs;

    const LossKind kind = options.loss;
    const SampleLossFn loss = [&active, kind, n_classes](const Vector& o, ClassIndex label) {
        LossEvaluation ev = forward(kind, *active, TargetVector::one_hot(label, n_classes), o);
        return std::pair<double, Vector>{ev.value, std::move(ev.gradient)};
    };

    std::mt19937_64 shuffle_rng(options.sgd.seed);
    std::vector<std::size_t> order(train.size());

    double gamma = params ? params->gamma_xi : 0.0;
    double best_val_error = 1.0;
    HistogramMatrix hist;
    SeparabilityMatrix separability;
    ConfusionMatrix confusion;
    if (params) {
        params->validate();
        hist = histogram_matrix(train.class_frequencies());
        NetworkOutputs initial = run_network(result.network, val);
        confusion = ConfusionMatrix::from_predictions(val.labels(), initial.predictions, n_classes);
        separability = class_separability(initial.features, val.labels(), n_classes);
    }

    for (std::size_t epoch = 1; epoch <= options.sgd.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        EpochRecord record;
        record.epoch = epoch;

        if (params) {
            const Matrix target = build_target(hist, separability, confusion, *params);
            candidate = update_costs(result.costs, cost_gradient(target, result.costs), gamma);
            active = &candidate;
        }

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const EpochStats stats = train_epoch(result.network, train.features(), train.labels(), order,
                                             options.sgd.learning_rate, options.sgd.batch_size, loss);
        record.train_loss = stats.mean_loss;
        record.train_error = stats.error_rate;

        const bool refresh_separability = params && epoch % options.separability_interval == 0;
        NetworkOutputs outputs = run_network(result.network, val);
        confusion = ConfusionMatrix::from_predictions(val.labels(), outputs.predictions, n_classes);
        record.val_error = validation_error(confusion, options.val_metric);

        if (params) {
            if (record.val_error <= best_val_error) {
                result.costs = candidate;
                best_val_error = record.val_error;
                record.accepted = true;
            } else {
                gamma *= 0.01;
            }
            active = &result.costs;
            if (refresh_separability) {
                separability = class_separability(outputs.features, val.labels(), n_classes);
            }
        }
        record.gamma_xi = gamma;
        record.xi = result.costs.entries();
        record.xi_min = result.costs.min();
        record.xi_max = result.costs.max();
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(std::move(record));
    }
    return result;
}

}  // namespace

TrainingResult train_fixed_costs(const LabeledDataset& train, const LabeledDataset& val, Network net,
                                 const CostMatrix& costs, const TrainingOptions& options) {
    return run_training(train, val, std::move(net), costs, options, nullptr);
}

TrainingResult alternating_optimize(const LabeledDataset& train, const LabeledDataset& val, Network net,
                                    const TrainingOptions& options, const CostObjectiveParams& params) {
    const std::size_t n = net.output_dim();
    return run_training(train, val, std::move(net), CostMatrix::all_ones(n), options, &params);
}

}  // namespace cosen
