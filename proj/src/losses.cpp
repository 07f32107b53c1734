#include "cosen/losses.hpp"

#include "cosen/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace cosen {
namespace {

void check_dims(const CostMatrix& costs, ClassIndex true_class, const Vector& o) {
    const std::size_t n = costs.n_classes();
    if (static_cast<std::size_t>(o.size()) != n) {
        std::ostringstream os;
        os << "activation length " << o.size() << " does not match " << n << " classes";
        throw ShapeError(os.str());
    }
    if (true_class >= n) throw ShapeError("true class " + std::to_string(true_class) + " out of range");
}

double max_entry(const Vector& o) {
    double m = o[0];
    for (Eigen::Index i = 1; i < o.size(); ++i) m = std::max(m, o[i]);
    return m;
}

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::kMse:
            return "mse";
        case LossKind::kHinge:
            return "hinge";
        case LossKind::kCrossEntropy:
            return "ce";
    }
    return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "mse") return LossKind::kMse;
    if (name == "hinge") return LossKind::kHinge;
    if (name == "ce" || name == "cross-entropy") return LossKind::kCrossEntropy;
    throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

TargetVector::TargetVector(Vector one_hot) : d_(std::move(one_hot)) {
    int ones = 0;
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
        if (d_[i] == 1.0) {
            ++ones;
            true_class_ = static_cast<ClassIndex>(i);
        } else if (d_[i] != 0.0) {
            throw ValidityError("target vector entries must be 0 or 1");
        }
    }
    if (ones != 1) throw ValidityError("target vector must have exactly one entry equal to 1");
}

TargetVector TargetVector::one_hot(ClassIndex true_class, std::size_t n_classes) {
    if (true_class >= n_classes) throw ShapeError("true class out of range");
    Vector d = Vector::Zero(static_cast<Eigen::Index>(n_classes));
    d[static_cast<Eigen::Index>(true_class)] = 1.0;
    return TargetVector(std::move(d));
}

Vector cost_softmax(const CostMatrix& costs, ClassIndex true_class, const Vector& o) {
    check_dims(costs, true_class, o);
    const auto p = static_cast<Eigen::Index>(true_class);
    const double shift = max_entry(o);
    Vector y(o.size());
    double total = 0.0;
    for (Eigen::Index k = 0; k < o.size(); ++k) {
        y[k] = costs.entries()(p, k) * std::exp(o[k] - shift);
        total += y[k];
    }
    for (Eigen::Index k = 0; k < o.size(); ++k) y[k] /= total;
    return y;
}

Vector softmax(const Vector& o) {
    if (o.size() == 0) throw ShapeError("softmax of an empty vector");
    const double shift = max_entry(o);
    Vector y(o.size());
    double total = 0.0;
    for (Eigen::Index k = 0; k < o.size(); ++k) {
        y[k] = std::exp(o[k] - shift);
        total += y[k];
    }
    for (Eigen::Index k = 0; k < o.size(); ++k) y[k] /= total;
    return y;
}

LossEvaluation forward(LossKind kind, const CostMatrix& costs, const TargetVector& target,
                       const Vector& o) {
    if (target.size() != costs.n_classes()) throw ShapeError("target length does not match cost matrix");
    const ClassIndex truth = target.true_class();
    check_dims(costs, truth, o);
    const auto p = static_cast<Eigen::Index>(truth);
    const Eigen::Index n = o.size();
    const Vector& d = target.values();

    LossEvaluation out;
    out.gradient.resize(n);
    switch (kind) {
        case LossKind::kMse: {
            out.squashed.resize(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double xi = costs.entries()(p, k);
                const double y = logistic(o[k] * xi);
                const double diff = d[k] - y;
                out.squashed[k] = y;
                out.value += 0.5 * diff * diff;
                out.gradient[k] = -xi * diff * y * (1.0 - y);
            }
            break;
        }
        case LossKind::kHinge: {
            out.squashed.resize(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double xi = costs.entries()(p, k);
                const double y = o[k] * xi;
                const double sign = 2.0 * d[k] - 1.0;
                const double margin = 1.0 - sign * y;
                out.squashed[k] = y;
                // Subgradient 0 at the kink (margin exactly 0).
                if (margin > 0.0) {
                    out.value += margin;
                    out.gradient[k] = -sign * xi;
                } else {
                    out.gradient[k] = 0.0;
                }
            }
            break;
        }
        case LossKind::kCrossEntropy: {
            out.squashed = cost_softmax(costs, truth, o);
            double y_true = out.squashed[p];
            if (y_true < kLogFloor) {
                y_true = kLogFloor;
                out.log_floored = true;
            }
            out.value = -std::log(y_true);
            for (Eigen::Index k = 0; k < n; ++k) out.gradient[k] = out.squashed[k] - d[k];
            break;
        }
    }
    return out;
}

Vector backward(LossKind kind, const CostMatrix& costs, const TargetVector& target, const Vector& o) {
    return forward(kind, costs, target, o).gradient;
}

bool check_guess_aversion(const CostMatrix& costs, const TargetVector& target, const Vector& o) {
    const ClassIndex truth = target.true_class();
    check_dims(costs, truth, o);
    const auto p = static_cast<Eigen::Index>(truth);
    for (Eigen::Index k = 0; k < o.size(); ++k) {
        if (k != p && !(o[p] > o[k])) {
            throw PreconditionError("guess aversion requires the true class to hold the largest activation");
        }
    }
    const double at_o = forward(LossKind::kCrossEntropy, costs, target, o).value;
    const double at_guess =
        forward(LossKind::kCrossEntropy, costs, target, Vector::Zero(o.size())).value;
    return at_o < at_guess;
}

namespace {

void check_calibration_inputs(const CostMatrix& costs, const PosteriorVector& posterior,
                              const Vector& o) {
    if (posterior.size() != costs.n_classes() || static_cast<std::size_t>(o.size()) != costs.n_classes()) {
        throw ShapeError("cost matrix, posterior and activations must agree in length");
    }
}

// log sum_k xi_{p,k} exp(o_k - shift) for every row p.
Vector row_log_partitions(const CostMatrix& costs, const Vector& o, double shift) {
    const Eigen::Index n = o.size();
    Vector log_z(n);
    for (Eigen::Index p = 0; p < n; ++p) {
        double z = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) z += costs.entries()(p, k) * std::exp(o[k] - shift);
        log_z[p] = std::log(z);
    }
    return log_z;
}

}  // namespace

double calibration_risk(const CostMatrix& costs, const PosteriorVector& posterior, const Vector& o) {
    check_calibration_inputs(costs, posterior, o);
    const double shift = max_entry(o);
    const Vector log_z = row_log_partitions(costs, o, shift);
    double risk = 0.0;
    for (Eigen::Index p = 0; p < o.size(); ++p) {
        const double log_y = std::log(costs.entries()(p, p)) + (o[p] - shift) - log_z[p];
        risk -= posterior.values()[p] * log_y;
    }
    return risk;
}

Vector calibration_risk_gradient(const CostMatrix& costs, const PosteriorVector& posterior,
                                 const Vector& o) {
    check_calibration_inputs(costs, posterior, o);
    const Eigen::Index n = o.size();
    const double shift = max_entry(o);
    const Vector log_z = row_log_partitions(costs, o, shift);
    Vector grad(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double model_mass = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            model_mass += posterior.values()[p] * costs.entries()(p, t) *
                          std::exp(o[t] - shift - log_z[p]);
        }
        grad[t] = model_mass - posterior.values()[t];
    }
    return grad;
}

Vector calibration_stationary_output(const CostMatrix& costs, const PosteriorVector& posterior,
                                     const CalibrationOptions& options) {
    const std::size_t n = costs.n_classes();
    if (n < 2) throw PreconditionError("calibration needs at least two classes");
    if (posterior.size() != n) throw ShapeError("posterior length does not match cost matrix");
    for (std::size_t t = 0; t < n; ++t) {
        if (!(posterior[t] > 0.0)) {
            throw PreconditionError("calibration needs a strictly positive posterior; class " +
                                    std::to_string(t) + " has probability 0");
        }
    }
    const auto size = static_cast<Eigen::Index>(n);
    const Vector log_posterior = posterior.values().array().log();

    Vector o = log_posterior.array() - log_posterior.mean();
    double residual = 0.0;
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        residual = calibration_risk_gradient(costs, posterior, o).cwiseAbs().maxCoeff();
        if (residual < options.tolerance) return o;
        if (iter == options.max_iterations) break;

        const double shift = max_entry(o);
        const Vector log_z = row_log_partitions(costs, o, shift);
        Vector target(size);
        for (Eigen::Index t = 0; t < size; ++t) {
            double weight = 0.0;
            for (Eigen::Index p = 0; p < size; ++p) {
                weight += posterior.values()[p] * costs.entries()(p, t) * std::exp(-log_z[p]);
            }
            target[t] = log_posterior[t] - std::log(weight) + shift;
        }
        o = (1.0 - options.damping) * o + options.damping * target;
        o.array() -= o.mean();
    }
    std::ostringstream os;
    os << "calibration fixed point did not converge in " << options.max_iterations
       << " iterations (gradient max-norm " << residual << ")";
    throw ConvergenceError(os.str(), residual);
}

}  // namespace cosen
