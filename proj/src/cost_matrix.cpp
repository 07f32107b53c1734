#include "cosen/cost_matrix.hpp"

#include "cosen/error.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace cosen {
namespace {

std::string cell(Eigen::Index r, Eigen::Index c) {
    std::ostringstream os;
    os << "(" << r << ", " << c << ")";
    return os.str();
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        std::ostringstream os;
        os << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw ShapeError(os.str());
    }
}

}  // namespace

TraditionalCostMatrix::TraditionalCostMatrix(Matrix entries) : entries_(std::move(entries)) {
    require_square(entries_, "traditional cost matrix");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double v = entries_(r, c);
            if (!std::isfinite(v)) throw NumericError("non-finite cost at " + cell(r, c));
            if (v < 0.0) throw PositivityViolation("negative cost at " + cell(r, c));
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        double column_sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) column_sum += entries_(i, j);
        const double mean = column_sum / static_cast<double>(n);
        if (entries_(j, j) > mean + kColumnBoundTolerance) {
            std::ostringstream os;
            os << "diagonal cost " << entries_(j, j) << " of class " << j
               << " exceeds its column mean " << mean;
            throw ValidityError(os.str());
        }
    }
}

TraditionalCostMatrix TraditionalCostMatrix::zero_one(std::size_t n_classes) {
    const auto n = static_cast<Eigen::Index>(n_classes);
    Matrix m = Matrix::Ones(n, n);
    m.diagonal().setZero();
    return TraditionalCostMatrix(std::move(m));
}

PosteriorVector::PosteriorVector(Vector probabilities) : p_(std::move(probabilities)) {
    if (p_.size() == 0) throw ShapeError("posterior vector is empty");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
        if (!(p_[i] >= 0.0 && p_[i] <= 1.0)) {
            std::ostringstream os;
            os << "posterior entry " << i << " = " << p_[i] << " outside [0, 1]";
            throw RangeViolation(os.str());
        }
        sum += p_[i];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os << "posterior sums to " << sum << ", expected 1";
        throw ValidityError(os.str());
    }
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
    require_square(entries_, "cost matrix");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double v = entries_(r, c);
            if (std::isnan(v)) throw NumericError("NaN cost at " + cell(r, c));
            if (!(v > 0.0)) throw PositivityViolation("cost at " + cell(r, c) + " is not positive");
            if (v > 1.0) throw RangeViolation("cost at " + cell(r, c) + " exceeds 1");
        }
    }
    // Implied by the entrywise checks, asserted on its own.
    for (Eigen::Index p = 0; p < n; ++p) {
        if (!(entries_(p, p) > 0.0)) throw PositivityViolation("diagonal cost of class " +
                                                               std::to_string(p) + " is not positive");
    }
}

CostMatrix CostMatrix::all_ones(std::size_t n_classes) {
    const auto n = static_cast<Eigen::Index>(n_classes);
    return CostMatrix(Matrix::Ones(n, n));
}

bool CostMatrix::is_cost_insensitive() const { return (entries_.array() == 1.0).all(); }

double expected_risk(const TraditionalCostMatrix& costs, const PosteriorVector& posterior,
                     ClassIndex predicted_class) {
    const std::size_t n = costs.n_classes();
    if (posterior.size() != n) {
        std::ostringstream os;
        os << "posterior has " << posterior.size() << " classes, cost matrix has " << n;
        throw ShapeError(os.str());
    }
    if (predicted_class >= n) throw ShapeError("predicted class out of range");
    double risk = 0.0;
    for (std::size_t q = 0; q < n; ++q) risk += costs(predicted_class, q) * posterior[q];
    return risk;
}

ClassIndex bayes_decision(const TraditionalCostMatrix& costs, const PosteriorVector& posterior) {
    ClassIndex best = 0;
    double best_risk = expected_risk(costs, posterior, 0);
    for (ClassIndex p = 1; p < costs.n_classes(); ++p) {
        const double r = expected_risk(costs, posterior, p);
        if (r < best_risk) {
            best_risk = r;
            best = p;
        }
    }
    return best;
}

TraditionalCostMatrix offset_columns(const TraditionalCostMatrix& costs, double c) {
    if (!std::isfinite(c)) throw NumericError("non-finite column offset");
    Matrix shifted = costs.entries().array() + c;
    if (shifted.minCoeff() < 0.0) {
        std::ostringstream os;
        os << "offset " << c << " drives a cost below zero (min entry " << costs.entries().minCoeff()
           << ")";
        throw PositivityViolation(os.str());
    }
    return TraditionalCostMatrix(std::move(shifted));
}

CostMatrix validate_cost_matrix(const Matrix& entries) { return CostMatrix(entries); }

Vector apply_score_costs(const CostMatrix& costs, ClassIndex true_class, const Vector& activations) {
    const std::size_t n = costs.n_classes();
    if (true_class >= n) throw ShapeError("true class " + std::to_string(true_class) + " out of range");
    if (static_cast<std::size_t>(activations.size()) != n) {
        throw ShapeError("activation length " + std::to_string(activations.size()) +
                         " does not match " + std::to_string(n) + " classes");
    }
    return hadamard_row(costs.entries().row(static_cast<Eigen::Index>(true_class)).transpose(),
                        activations);
}

Vector hadamard_row(const Vector& row, const Vector& activations) {
    if (row.size() != activations.size()) throw ShapeError("cost row and activations differ in length");
    Vector s(row.size());
    for (Eigen::Index i = 0; i < row.size(); ++i) s[i] = row[i] * activations[i];
    return s;
}

}  // namespace cosen
