#pragma once

#include "cosen/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cosen {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    IndexMatrix counts;
    /// Each row sums to 1. Rows with no samples are uniform and listed in
    /// `empty_rows`.
    Matrix row_normalized;
    std::vector<bool> empty_rows;

    std::size_t n_classes() const { return static_cast<std::size_t>(counts.rows()); }
    long total() const { return counts.sum(); }
    bool has_empty_rows() const;

    /// Throws ShapeError if the spans differ in length or a label is out of
    /// range.
    static ConfusionMatrix from_predictions(std::span<const ClassIndex> truth,
                                            std::span<const ClassIndex> predicted,
                                            std::size_t n_classes);
};

}  // namespace cosen
