#pragma once

#include "cosen/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace cosen {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    /// Per-class target count; unset means match the majority class.
    std::optional<std::size_t> target_count;
    std::uint64_t seed = 1;
    /// Test hook: use this interpolation factor instead of drawing it.
    std::optional<double> fixed_lambda;
};

struct SyntheticSample {
    std::size_t row;     // row in the output dataset
    std::size_t base;    // row of x_i in the input dataset
    std::size_t partner; // row of the chosen neighbour in the input dataset
    double lambda;
};

struct SmoteResult {
    LabeledDataset dataset;  // input rows first, synthetic rows appended
    std::vector<SyntheticSample> synthetic;
};

/// Over-samples every class below the target: x_i + lambda (x_nn - x_i),
/// with x_i a random class member, x_nn one of its k nearest same-class
/// neighbours (Euclidean, k clamped to class size - 1) and lambda ~ U[0, 1).
/// Throws SamplingError for a class that needs samples but has fewer than
/// two, ConfigError for k = 0.
SmoteResult smote_oversample(const LabeledDataset& dataset, const SmoteConfig& config);

struct UndersampleResult {
    LabeledDataset dataset;
    /// Retained input rows, ascending.
    std::vector<std::size_t> retained;
};

/// Reduces every class above `target` (unset: the smallest non-empty class)
/// to `target` rows drawn without replacement. Throws ConfigError for a
/// target below 1.
UndersampleResult random_undersample(const LabeledDataset& dataset, std::optional<std::size_t> target,
                                     std::uint64_t seed);

}  // namespace cosen
