#pragma once

#include "cosen/cost_matrix.hpp"
#include "cosen/types.hpp"

#include <cstddef>
#include <random>

namespace cosen::testing {

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    }
    return m;
}

inline CostMatrix random_costs(std::mt19937_64& rng, std::size_t n, double lo = 0.05) {
    return CostMatrix(random_matrix(rng, n, n, lo, 1.0));
}

/// Random probability vector with every entry at least `floor` before
/// normalization.
inline PosteriorVector random_posterior(std::mt19937_64& rng, std::size_t n, double floor = 0.01) {
    Vector v = random_vector(rng, n, floor, 1.0);
    return PosteriorVector(v / v.sum());
}

inline std::size_t random_index(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace cosen::testing
