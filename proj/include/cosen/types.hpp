#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace cosen {

/// Dense row-major matrix; class counts are small so nothing sparse is needed.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IndexMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ClassIndex = std::size_t;

/// Index of the largest entry, lowest index on ties.
inline ClassIndex argmax(const Vector& v) {
    ClassIndex best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<ClassIndex>(i);
    }
    return best;
}

}  // namespace cosen
