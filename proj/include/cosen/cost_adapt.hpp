#pragma once

#include "cosen/confusion.hpp"
#include "cosen/cost_matrix.hpp"
#include "cosen/dataset.hpp"
#include "cosen/losses.hpp"
#include "cosen/network.hpp"
#include "cosen/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cosen {

/// Lower clip applied to every learned cost so it stays strictly positive.
inline constexpr double kMinCost = 1e-4;

/// Class-to-class separability. S(p, q) is the mean, over samples of class
/// p, of (distance to nearest other sample of p) / (distance to nearest
/// sample of q). The diagonal is 1.
struct SeparabilityMatrix {
    Matrix values;
    /// Set when some entries could not be measured (a class with fewer than
    /// two samples, or an empty class) and were filled with the mean of the
    /// measured off-diagonal entries.
    bool degenerate = false;
    std::vector<ClassIndex> degenerate_classes;
};

/// Cap on a single per-sample distance ratio, reached only when the
/// nearest sample of the other class coincides with the query point.
inline constexpr double kMaxSeparabilityRatio = 1e3;

/// Euclidean nearest neighbours over the rows of `features`, brute force.
SeparabilityMatrix class_separability(const Matrix& features, std::span<const ClassIndex> labels,
                                      std::size_t n_classes);

struct HistogramMatrix {
    Vector h;  // class fractions
    Matrix H;  // H(p, q) = max(h_p, h_q) off the diagonal, h_p on it
};

/// Throws ValidityError unless `h` is non-negative and sums to 1 (1e-9).
HistogramMatrix histogram_matrix(const Vector& h);

/// Gaussian shaping parameters of the cost target. Unset means or widths
/// are derived from the current matrices: the mean and standard deviation
/// (floored at kMinSigma) of the off-diagonal entries.
struct CostObjectiveParams {
    std::optional<double> mu1;
    std::optional<double> sigma1;
    std::optional<double> mu2;
    std::optional<double> sigma2;
    double gamma_xi = 0.5;

    static constexpr double kMinSigma = 0.05;

    /// Throws ConfigError for non-positive widths or a negative rate.
    void validate() const;
};

struct ResolvedGaussians {
    double mu1, sigma1, mu2, sigma2;
};

ResolvedGaussians resolve_gaussians(const Matrix& S, const Matrix& M, const CostObjectiveParams& params);

/// T = H o exp(-(S - mu1)^2 / 2 sigma1^2) o exp(-(M - mu2)^2 / 2 sigma2^2),
/// using the row-normalized confusion matrix, clipped into [kMinCost, 1].
/// Throws ShapeError on non-conformable inputs.
Matrix build_target(const HistogramMatrix& H, const SeparabilityMatrix& S, const ConfusionMatrix& M,
                    const CostObjectiveParams& params);

/// Descent direction of ||T - xi||^2 in elementwise form: -(T - xi).
Matrix cost_gradient(const Matrix& T, const CostMatrix& xi);

/// clip(xi - gamma * direction, kMinCost, 1). Throws NumericError for a
/// non-finite direction, ShapeError on mismatch.
CostMatrix update_costs(const CostMatrix& xi, const Matrix& direction, double gamma_xi);

enum class FixedCostSource { kHistogram, kSeparability, kConfusion };
std::string_view to_string(FixedCostSource source);
/// "h", "s" or "m".
FixedCostSource parse_fixed_cost_source(std::string_view name);

struct FixedCosts {
    CostMatrix costs;
    /// All entries of the source were equal; costs fall back to all-ones.
    bool degenerate = false;
};

/// Maps a source matrix into [kMinCost, 1]: divide by the largest entry if
/// it exceeds 1, then clip from below.
FixedCosts fixed_cost_matrix(const Matrix& source);

/// Error measure used for the validation gate.
enum class ValidationMetric { kBalancedError, kOverallError };
std::string_view to_string(ValidationMetric metric);
ValidationMetric parse_validation_metric(std::string_view name);

struct TrainingOptions {
    LossKind loss = LossKind::kCrossEntropy;
    SgdConfig sgd;
    ValidationMetric val_metric = ValidationMetric::kBalancedError;
    /// Epoch cadence of the separability recomputation.
    std::size_t separability_interval = 10;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_error = 0.0;
    double val_error = 0.0;
    double gamma_xi = 0.0;
    bool accepted = false;
    double xi_min = 1.0;
    double xi_max = 1.0;
    Matrix xi;
    double seconds = 0.0;  // wall time of the epoch
};

struct TrainingResult {
    Network network;
    CostMatrix costs;
    std::vector<EpochRecord> history;
};

/// Plain SGD training with a frozen cost matrix (all-ones gives the
/// cost-insensitive baseline).
TrainingResult train_fixed_costs(const LabeledDataset& train, const LabeledDataset& val, Network net,
                                 const CostMatrix& costs, const TrainingOptions& options);

/// Alternating optimization of network parameters and class costs. Each
/// epoch steps xi toward the target T built from the class histogram of
/// `train`, the separability of the validation features (recomputed every
/// `separability_interval` epochs) and the current validation confusion
/// matrix, then runs one SGD epoch with the tentative costs. The cost step
/// is kept only if the validation error did not increase over the best
/// accepted value; otherwise the costs are reverted and gamma_xi shrinks by
/// a factor of 100.
TrainingResult alternating_optimize(const LabeledDataset& train, const LabeledDataset& val, Network net,
                                    const TrainingOptions& options, const CostObjectiveParams& params);

/// Val-set predictions and penultimate features of a network.
struct NetworkOutputs {
    std::vector<ClassIndex> predictions;
    Matrix features;
};
NetworkOutputs run_network(const Network& net, const LabeledDataset& data);

double validation_error(const ConfusionMatrix& confusion, ValidationMetric metric);

}  // namespace cosen
