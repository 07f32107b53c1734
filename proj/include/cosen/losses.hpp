#pragma once

#include "cosen/cost_matrix.hpp"
#include "cosen/types.hpp"

#include <cstddef>
#include <string_view>

namespace cosen {

enum class LossKind { kMse, kHinge, kCrossEntropy };

std::string_view to_string(LossKind kind);
/// Accepts "mse", "hinge", "ce" (also "cross-entropy"). Throws ConfigError.
LossKind parse_loss_kind(std::string_view name);

/// One-hot desired output d.
class TargetVector {
public:
    /// Throws ValidityError unless exactly one entry is 1 and the rest 0.
    explicit TargetVector(Vector one_hot);

    static TargetVector one_hot(ClassIndex true_class, std::size_t n_classes);

    ClassIndex true_class() const { return true_class_; }
    std::size_t size() const { return static_cast<std::size_t>(d_.size()); }
    double operator[](std::size_t i) const { return d_[static_cast<Eigen::Index>(i)]; }
    const Vector& values() const { return d_; }

private:
    Vector d_;
    ClassIndex true_class_ = 0;
};

struct LossEvaluation {
    /// MSE and CE values are non-negative. For the hinge loss this is the
    /// non-negative margin loss sum_n max(0, 1 - (2 d_n - 1) y_n).
    double value = 0.0;
    /// y: logistic outputs (MSE), cost-scaled scores (hinge) or the
    /// cost-weighted softmax (CE).
    Vector squashed;
    /// d loss / d o.
    Vector gradient;
    /// Set when the CE log argument was floored at kLogFloor.
    bool log_floored = false;
};

inline constexpr double kLogFloor = 1e-12;

/// y_n = xi_{p,n} exp(o_n) / sum_k xi_{p,k} exp(o_k), evaluated with the
/// max activation subtracted from every exponent.
Vector cost_softmax(const CostMatrix& costs, ClassIndex true_class, const Vector& o);

/// Plain softmax (the cost-free special case), same evaluation order as
/// cost_softmax().
Vector softmax(const Vector& o);

/// Loss value, squashed outputs and gradient for one sample. The true class
/// selects the cost row. Throws ShapeError on dimension mismatch.
LossEvaluation forward(LossKind kind, const CostMatrix& costs, const TargetVector& target,
                       const Vector& o);

/// d loss / d o:
///   MSE:   -xi_{p,n} (d_n - y_n) y_n (1 - y_n)
///   hinge: -(2 d_n - 1) xi_{p,n} [1 > y_n (2 d_n - 1)]
///   CE:    y_n - d_n
Vector backward(LossKind kind, const CostMatrix& costs, const TargetVector& target, const Vector& o);

/// True iff the cost-sensitive CE loss at `o` is below its value at the
/// all-zero guess point. Requires the true class to hold the strictly
/// largest activation; throws PreconditionError otherwise.
bool check_guess_aversion(const CostMatrix& costs, const TargetVector& target, const Vector& o);

/// Expected CE risk over the posterior:
///   R(o) = -sum_p P(p) log(xi_{p,p} exp(o_p) / sum_k xi_{p,k} exp(o_k)).
double calibration_risk(const CostMatrix& costs, const PosteriorVector& posterior, const Vector& o);

/// dR/do_t = -P(t) + sum_p P(p) xi_{p,t} exp(o_t) / sum_k xi_{p,k} exp(o_k).
Vector calibration_risk_gradient(const CostMatrix& costs, const PosteriorVector& posterior,
                                 const Vector& o);

struct CalibrationOptions {
    double damping = 0.5;
    int max_iterations = 10000;
    double tolerance = 1e-8;
};

/// Stationary point of calibration_risk(), normalized to sum to zero. Uses
/// damped fixed-point iteration on
///   o_t = log P(t) - log(sum_p P(p) xi_{p,t} / sum_k xi_{p,k} exp(o_k)).
/// Requires >= 2 classes and a strictly positive posterior
/// (PreconditionError); throws ConvergenceError carrying the final
/// gradient max-norm if the tolerance is not met.
Vector calibration_stationary_output(const CostMatrix& costs, const PosteriorVector& posterior,
                                     const CalibrationOptions& options = {});

}  // namespace cosen
