#pragma once

#include "cosen/losses.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cosen {

struct GradCheckOptions {
    std::size_t configurations = 200;
    std::uint64_t seed = 1;
    double step = 1e-5;
    double tolerance = 1e-5;
    /// Denominator floor of the relative error, so that two near-zero
    /// derivatives are compared absolutely.
    double error_floor = 1e-6;
    std::size_t max_layers = 4;
    std::size_t max_width = 16;
    /// Minimum distance of every ReLU input and hinge margin from its kink;
    /// closer draws are rejected and redrawn.
    double kink_margin = 1e-3;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

struct GradCheckSummary {
    LossKind loss = LossKind::kCrossEntropy;
    std::size_t configurations = 0;
    std::size_t parameters_checked = 0;
    std::size_t rejected_draws = 0;
    double max_relative_error = 0.0;
    bool passed = false;
};

/// Compares backpropagated parameter gradients of `loss` composed with
/// random MLPs and random cost matrices against central finite differences
/// of the forward loss, over every weight and bias.
GradCheckSummary check_loss_gradients(LossKind loss, const GradCheckOptions& options);

/// One summary per loss kind.
std::vector<GradCheckSummary> run_gradient_checks(const GradCheckOptions& options);

}  // namespace cosen
