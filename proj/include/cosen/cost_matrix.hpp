#pragma once

#include "cosen/types.hpp"

#include <cstddef>

namespace cosen {

/// Classical misclassification-cost matrix. Entry (p, q) is the cost of
/// predicting p when the truth is q, so the expected risk of predicting p is
/// sum_q C(p, q) P(q | x).
///
/// Invariants: all entries are non-negative, and for every class j the
/// diagonal entry does not exceed the mean of its column.
class TraditionalCostMatrix {
public:
    /// Throws ShapeError (non-square / empty), PositivityViolation (negative
    /// entry) or ValidityError (diagonal above its column mean).
    explicit TraditionalCostMatrix(Matrix entries);

    /// 0 on the diagonal, 1 elsewhere.
    static TraditionalCostMatrix zero_one(std::size_t n_classes);

    std::size_t n_classes() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    double operator()(std::size_t p, std::size_t q) const {
        return entries_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }

    /// Tolerance of the diagonal-vs-column-mean check.
    static constexpr double kColumnBoundTolerance = 1e-12;

private:
    Matrix entries_;
};

/// A probability vector over classes (entries in [0, 1], summing to 1).
class PosteriorVector {
public:
    explicit PosteriorVector(Vector probabilities);

    std::size_t size() const { return static_cast<std::size_t>(p_.size()); }
    double operator[](std::size_t i) const { return p_[static_cast<Eigen::Index>(i)]; }
    const Vector& values() const { return p_; }

    static constexpr double kSumTolerance = 1e-9;

private:
    Vector p_;
};

/// Score-level multiplicative cost matrix with entries in (0, 1]. Row p is
/// applied to the activations of every sample whose true class is p.
class CostMatrix {
public:
    /// Same checks as validate_cost_matrix().
    explicit CostMatrix(Matrix entries);

    static CostMatrix all_ones(std::size_t n_classes);

    std::size_t n_classes() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    double operator()(std::size_t p, std::size_t q) const {
        return entries_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
    double min() const { return entries_.minCoeff(); }
    double max() const { return entries_.maxCoeff(); }

    /// True when every entry is exactly 1, i.e. training is cost-insensitive.
    bool is_cost_insensitive() const;

private:
    Matrix entries_;
};

/// R(p | x) = sum_q C(p, q) P(q | x).
double expected_risk(const TraditionalCostMatrix& costs, const PosteriorVector& posterior,
                     ClassIndex predicted_class);

/// argmin_p R(p | x), lowest index on ties.
ClassIndex bayes_decision(const TraditionalCostMatrix& costs, const PosteriorVector& posterior);

/// Adds `c` to every entry. Throws PositivityViolation if an entry would go
/// negative.
TraditionalCostMatrix offset_columns(const TraditionalCostMatrix& costs, double c);

/// Checks the score-level cost invariants: square (ShapeError), every entry
/// > 0 (PositivityViolation), every entry <= 1 (RangeViolation), finite
/// (NumericError).
CostMatrix validate_cost_matrix(const Matrix& entries);

/// s = xi_p o (elementwise), for the row of the true class.
Vector apply_score_costs(const CostMatrix& costs, ClassIndex true_class, const Vector& activations);

/// Elementwise product of an arbitrary (unvalidated) cost row with the
/// activations. Used where the row may fall outside (0, 1], e.g. offset
/// matrices.
Vector hadamard_row(const Vector& row, const Vector& activations);

}  // namespace cosen
