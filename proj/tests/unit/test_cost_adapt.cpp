#include "cosen/cost_adapt.hpp"
#include "cosen/error.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace cosen {
namespace {

using testing::random_index;
using testing::random_matrix;

// O(n^2) nearest-neighbour oracle written directly from the definition.
Matrix separability_oracle(const Matrix& f, const std::vector<ClassIndex>& labels, std::size_t n_classes) {
    Matrix s = Matrix::Ones(static_cast<Eigen::Index>(n_classes), static_cast<Eigen::Index>(n_classes));
    for (std::size_t p = 0; p < n_classes; ++p) {
        for (std::size_t q = 0; q < n_classes; ++q) {
            if (p == q) continue;
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] != p) continue;
                double intra = std::numeric_limits<double>::infinity();
                double inter = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < labels.size(); ++j) {
                    if (j == i) continue;
                    const double d = (f.row(static_cast<Eigen::Index>(i)) - f.row(static_cast<Eigen::Index>(j))).norm();
                    if (labels[j] == p) intra = std::min(intra, d);
                    if (labels[j] == q) inter = std::min(inter, d);
                }
                sum += intra / inter;
                ++count;
            }
            s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = sum / static_cast<double>(count);
        }
    }
    return s;
}

ConfusionMatrix confusion_from_rows(const Matrix& normalized) {
    ConfusionMatrix m;
    m.counts = IndexMatrix::Zero(normalized.rows(), normalized.cols());
    m.row_normalized = normalized;
    m.empty_rows.assign(static_cast<std::size_t>(normalized.rows()), false);
    return m;
}

TEST(Separability, TwoColumnsTenApart) {
    Matrix f(4, 2);
    f << 0, 0,
         0, 1,
         10, 0,
         10, 1;
    const std::vector<ClassIndex> labels{0, 0, 1, 1};
    const SeparabilityMatrix s = class_separability(f, labels, 2);
    EXPECT_NEAR(s.values(0, 1), 0.1, 1e-15);
    EXPECT_NEAR(s.values(1, 0), 0.1, 1e-15);
    EXPECT_EQ(s.values(0, 0), 1.0);
    EXPECT_FALSE(s.degenerate);
}

TEST(Separability, EqualNeighbourDistancesGiveOne) {
    // Every class-0 point has its nearest class-0 and class-1 neighbours at
    // the same distance 4.
    Matrix f(4, 1);
    f << 0, 4, -4, 8;
    const SeparabilityMatrix s = class_separability(f, std::vector<ClassIndex>{0, 0, 1, 1}, 2);
    EXPECT_DOUBLE_EQ(s.values(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(s.values(1, 0), 3.0);
}

TEST(Separability, CoincidentPointsHitTheRatioCap) {
    Matrix f(4, 1);
    f << 0, 3, 0, 3;
    const SeparabilityMatrix s = class_separability(f, std::vector<ClassIndex>{0, 0, 1, 1}, 2);
    EXPECT_EQ(s.values(0, 1), kMaxSeparabilityRatio);
}

TEST(Separability, MatchesBruteForceOracle) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix f = random_matrix(rng, 60, 2, -3, 3);
        std::vector<ClassIndex> labels(60);
        for (std::size_t i = 0; i < 60; ++i) {
            labels[i] = i / 20;
            f(static_cast<Eigen::Index>(i), 0) += 2.0 * static_cast<double>(labels[i]);
        }
        const SeparabilityMatrix s = class_separability(f, labels, 3);
        EXPECT_TRUE(s.values.isApprox(separability_oracle(f, labels, 3), 1e-12));
    }
}

TEST(Separability, SingletonClassIsDegenerate) {
    Matrix f(5, 1);
    f << 0, 1, 5, 6, 20;
    const std::vector<ClassIndex> labels{0, 0, 1, 1, 2};
    const SeparabilityMatrix s = class_separability(f, labels, 3);
    EXPECT_TRUE(s.degenerate);
    ASSERT_EQ(s.degenerate_classes.size(), 1u);
    EXPECT_EQ(s.degenerate_classes[0], 2u);
    // Row 2 holds the mean of the measured off-diagonal entries.
    const double mean = (s.values(0, 1) + s.values(0, 2) + s.values(1, 0) + s.values(1, 2)) / 4.0;
    EXPECT_NEAR(s.values(2, 0), mean, 1e-15);
    EXPECT_NEAR(s.values(2, 1), mean, 1e-15);
}

TEST(HistogramMatrix, Construction) {
    const HistogramMatrix h = histogram_matrix(Eigen::Vector3d(0.5, 0.3, 0.2));
    Matrix expected(3, 3);
    expected << 0.5, 0.5, 0.5,
                0.5, 0.3, 0.3,
                0.5, 0.3, 0.2;
    EXPECT_EQ(h.H, expected);
    EXPECT_THROW(histogram_matrix(Eigen::Vector2d(0.5, 0.6)), ValidityError);
    EXPECT_THROW(histogram_matrix(Eigen::Vector2d(1.2, -0.2)), ValidityError);
}

TEST(BuildTarget, GaussiansAtTheirMeansGiveH) {
    const HistogramMatrix h = histogram_matrix(Eigen::Vector3d(0.6, 0.3, 0.1));
    SeparabilityMatrix s;
    s.values = Matrix::Constant(3, 3, 0.4);
    CostObjectiveParams params;
    params.mu1 = 0.4;
    params.sigma1 = 0.2;
    params.mu2 = 0.25;
    params.sigma2 = 0.1;
    const Matrix T = build_target(h, s, confusion_from_rows(Matrix::Constant(3, 3, 0.25)), params);
    EXPECT_TRUE(T.isApprox(h.H, 1e-15));
}

TEST(BuildTarget, FarTailsHitTheClip) {
    HistogramMatrix h{Vector::Ones(2), Matrix::Ones(2, 2)};
    SeparabilityMatrix s;
    s.values = Matrix::Constant(2, 2, 10.0);
    CostObjectiveParams params;
    params.mu1 = 0.0;
    params.sigma1 = 0.1;
    params.mu2 = 0.0;
    params.sigma2 = 0.1;
    const Matrix T = build_target(h, s, confusion_from_rows(Matrix::Constant(2, 2, 0.5)), params);
    EXPECT_TRUE((T.array() == kMinCost).all());
}

TEST(BuildTarget, MatchesScalarLoop) {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + random_index(rng, 5);
        const auto post = testing::random_posterior(rng, n);
        const HistogramMatrix h = histogram_matrix(post.values());
        SeparabilityMatrix s;
        s.values = random_matrix(rng, n, n, 0.0, 2.0);
        Matrix m = random_matrix(rng, n, n, 0.0, 1.0);
        for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) /= m.row(r).sum();
        CostObjectiveParams params;  // data-derived Gaussians
        const Matrix T = build_target(h, s, confusion_from_rows(m), params);

        // Oracle: mean and population std of the off-diagonal entries.
        auto stats = [&](const Matrix& x) {
            double sum = 0.0, sq = 0.0, k = 0.0;
            for (Eigen::Index p = 0; p < x.rows(); ++p) {
                for (Eigen::Index q = 0; q < x.cols(); ++q) {
                    if (p == q) continue;
                    sum += x(p, q);
                    k += 1.0;
                }
            }
            const double mean = sum / k;
            for (Eigen::Index p = 0; p < x.rows(); ++p) {
                for (Eigen::Index q = 0; q < x.cols(); ++q) {
                    if (p != q) sq += (x(p, q) - mean) * (x(p, q) - mean);
                }
            }
            return std::pair{mean, std::max(std::sqrt(sq / k), CostObjectiveParams::kMinSigma)};
        };
        const auto [mu1, s1] = stats(s.values);
        const auto [mu2, s2] = stats(m);
        for (Eigen::Index p = 0; p < T.rows(); ++p) {
            for (Eigen::Index q = 0; q < T.cols(); ++q) {
                double v = h.H(p, q) * std::exp(-std::pow(s.values(p, q) - mu1, 2) / (2 * s1 * s1)) *
                           std::exp(-std::pow(m(p, q) - mu2, 2) / (2 * s2 * s2));
                v = std::min(1.0, std::max(kMinCost, v));
                EXPECT_NEAR(T(p, q), v, 1e-14);
            }
        }
    }
}

TEST(BuildTarget, ShapeMismatch) {
    const HistogramMatrix h = histogram_matrix(Eigen::Vector2d(0.5, 0.5));
    SeparabilityMatrix s;
    s.values = Matrix::Ones(3, 3);
    EXPECT_THROW(build_target(h, s, confusion_from_rows(Matrix::Constant(2, 2, 0.5)), {}), ShapeError);
}

TEST(CostGradient, Examples) {
    const CostMatrix half(Matrix::Constant(2, 2, 0.5));
    EXPECT_TRUE(cost_gradient(half.entries(), half).isZero(0.0));
    EXPECT_TRUE((cost_gradient(Matrix::Ones(2, 2), half).array() == -0.5).all());
}

TEST(CostGradient, CollinearWithFiniteDifferenceOfSquaredNorm) {
    std::mt19937_64 rng(63);
    const Matrix T = random_matrix(rng, 3, 3, 0.1, 1.0);
    const CostMatrix xi = testing::random_costs(rng, 3, 0.1);
    const Matrix dir = cost_gradient(T, xi);
    Matrix fd(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            Matrix plus = xi.entries(), minus = xi.entries();
            plus(i, j) += 1e-6;
            minus(i, j) -= 1e-6;
            fd(i, j) = ((T - plus).squaredNorm() - (T - minus).squaredNorm()) / 2e-6;
        }
    }
    EXPECT_TRUE(fd.isApprox(2.0 * (xi.entries() - T), 1e-6));
    EXPECT_TRUE(fd.isApprox(2.0 * dir, 1e-6));
}

TEST(UpdateCosts, ClipsAndRejects) {
    const CostMatrix xi(Matrix::Constant(1, 1, 0.5));
    EXPECT_EQ(update_costs(xi, Matrix::Zero(1, 1), 0.7).entries(), xi.entries());
    EXPECT_EQ(update_costs(xi, Matrix::Constant(1, 1, -1.0), 0.6)(0, 0), 1.0);
    EXPECT_EQ(update_costs(CostMatrix(Matrix::Constant(1, 1, 0.2)), Matrix::Constant(1, 1, 1.0), 0.5)(0, 0), kMinCost);
    EXPECT_THROW(update_costs(xi, Matrix::Constant(1, 1, std::numeric_limits<double>::quiet_NaN()), 0.5), NumericError);
    EXPECT_THROW(update_costs(xi, Matrix::Zero(2, 2), 0.5), ShapeError);
}

TEST(UpdateCosts, MonotoneApproachToFixedTarget) {
    std::mt19937_64 rng(64);
    const Matrix T = random_matrix(rng, 4, 4, 0.01, 1.0);
    CostMatrix xi = CostMatrix::all_ones(4);
    double previous = (T - xi.entries()).squaredNorm();
    for (int step = 0; step < 50; ++step) {
        xi = update_costs(xi, cost_gradient(T, xi), 0.1);
        const double now = (T - xi.entries()).squaredNorm();
        EXPECT_LE(now, previous);
        previous = now;
    }
}

TEST(FixedCostMatrix, HistogramSource) {
    const FixedCosts f = fixed_cost_matrix(histogram_matrix(Eigen::Vector2d(0.9, 0.1)).H);
    EXPECT_FALSE(f.degenerate);
    EXPECT_DOUBLE_EQ(f.costs(0, 1), 0.9);
    EXPECT_DOUBLE_EQ(f.costs(1, 0), 0.9);
    EXPECT_DOUBLE_EQ(f.costs(0, 0), 0.9);
    EXPECT_DOUBLE_EQ(f.costs(1, 1), 0.1);

    const FixedCosts flat = fixed_cost_matrix(histogram_matrix(Vector::Constant(3, 1.0 / 3.0)).H);
    EXPECT_TRUE(flat.degenerate);
    EXPECT_TRUE(flat.costs.is_cost_insensitive());
}

TEST(FixedCostMatrix, ScalesLargeSources) {
    Matrix s(2, 2);
    s << 1.0, 4.0,
         2.0, 1.0;
    const FixedCosts f = fixed_cost_matrix(s);
    EXPECT_DOUBLE_EQ(f.costs(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(f.costs(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(f.costs(0, 0), 0.25);
}

TEST(FixedCostMatrix, RandomHistogramsMatchFormula) {
    std::mt19937_64 rng(65);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + random_index(rng, 5);
        const Vector h = testing::random_posterior(rng, n).values();
        const FixedCosts f = fixed_cost_matrix(histogram_matrix(h).H);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
                const double raw = p == q ? h[static_cast<Eigen::Index>(p)]
                                          : std::max(h[static_cast<Eigen::Index>(p)], h[static_cast<Eigen::Index>(q)]);
                EXPECT_DOUBLE_EQ(f.costs(p, q), std::max(raw, kMinCost));
            }
        }
    }
}

// Small well-conditioned task shared by the training tests.
struct Task {
    LabeledDataset train;
    LabeledDataset val;
};

Task make_task(std::uint64_t seed) {
    GaussianTaskConfig config;
    config.n_classes = 3;
    config.samples_per_class = {200, 40, 200};
    config.radius = 2.0;
    config.seed = seed;
    const LabeledDataset all = generate_gaussian_task(config);
    SplitSpec spec;
    spec.train_fraction = 1.0;
    spec.val_fraction_of_train = 0.2;
    spec.seed = seed + 1;
    DatasetSplit split = apply_imbalance_protocol(all, spec);
    return {std::move(split.train), std::move(split.val)};
}

TrainingOptions small_options(std::size_t epochs) {
    TrainingOptions options;
    options.sgd = SgdConfig{0.05, 16, epochs, 3};
    return options;
}

TEST(AlternatingOptimize, ZeroRateMatchesBaselineExactly) {
    const Task task = make_task(71);
    const std::vector<std::size_t> dims{2, 8, 3};
    CostObjectiveParams params;
    params.gamma_xi = 0.0;
    const TrainingResult cosen =
        alternating_optimize(task.train, task.val, init_network(dims, 5), small_options(6), params);
    const TrainingResult base = train_fixed_costs(task.train, task.val, init_network(dims, 5),
                                                  CostMatrix::all_ones(3), small_options(6));
    EXPECT_TRUE(cosen.costs.is_cost_insensitive());
    for (std::size_t l = 0; l < 2; ++l) {
        EXPECT_EQ(cosen.network.layers()[l].weights, base.network.layers()[l].weights);
        EXPECT_EQ(cosen.network.layers()[l].bias, base.network.layers()[l].bias);
    }
    for (std::size_t e = 0; e < 6; ++e) {
        EXPECT_EQ(cosen.history[e].train_loss, base.history[e].train_loss);
        EXPECT_EQ(cosen.history[e].val_error, base.history[e].val_error);
    }
}

TEST(AlternatingOptimize, ZeroEpochsReturnsInitialState) {
    const Task task = make_task(72);
    const std::vector<std::size_t> dims{2, 4, 3};
    const Network start = init_network(dims, 9);
    const TrainingResult r = alternating_optimize(task.train, task.val, start, small_options(0), {});
    EXPECT_TRUE(r.history.empty());
    EXPECT_TRUE(r.costs.is_cost_insensitive());
    EXPECT_EQ(r.network.layers()[0].weights, start.layers()[0].weights);
}

TEST(AlternatingOptimize, GatingInvariants) {
    for (std::uint64_t seed : {73u, 74u, 75u}) {
        const Task task = make_task(seed);
        const std::vector<std::size_t> dims{2, 8, 3};
        TrainingOptions options = small_options(15);
        options.separability_interval = 4;
        CostObjectiveParams params;
        params.mu1 = 1.0;
        params.sigma1 = 0.3;
        params.mu2 = 1.0;
        params.sigma2 = 0.2;
        const TrainingResult r = alternating_optimize(task.train, task.val, init_network(dims, seed), options, params);
        ASSERT_EQ(r.history.size(), 15u);
        double last_accepted = 1.0;
        double gamma = params.gamma_xi;
        Matrix xi = Matrix::Ones(3, 3);
        for (const auto& rec : r.history) {
            if (rec.accepted) {
                EXPECT_LE(rec.val_error, last_accepted);
                last_accepted = rec.val_error;
                EXPECT_EQ(rec.gamma_xi, gamma);
            } else {
                gamma *= 0.01;
                EXPECT_DOUBLE_EQ(rec.gamma_xi, gamma);
                EXPECT_EQ(rec.xi, xi);  // reverted
            }
            xi = rec.xi;
            EXPECT_GE(rec.xi_min, kMinCost);
            EXPECT_LE(rec.xi_max, 1.0);
        }
        EXPECT_EQ(r.costs.entries(), r.history.back().xi);
        EXPECT_TRUE(r.history.front().accepted);
    }
}

TEST(AlternatingOptimize, InputChecks) {
    const Task task = make_task(76);
    const std::vector<std::size_t> wrong_dims{3, 4, 3};
    EXPECT_THROW(alternating_optimize(task.train, task.val, init_network(wrong_dims, 1), small_options(1), {}),
                 ShapeError);
    const std::vector<std::size_t> dims{2, 4, 3};
    EXPECT_THROW(alternating_optimize(task.train, LabeledDataset(Matrix::Zero(0, 2), {}, 3), init_network(dims, 1),
                                      small_options(1), {}),
                 ConfigError);
}

TEST(ValidationError, Metrics) {
    const std::vector<ClassIndex> truth{0, 0, 0, 1};
    const std::vector<ClassIndex> pred{0, 0, 0, 0};
    const ConfusionMatrix m = ConfusionMatrix::from_predictions(truth, pred, 2);
    EXPECT_DOUBLE_EQ(validation_error(m, ValidationMetric::kOverallError), 0.25);
    EXPECT_DOUBLE_EQ(validation_error(m, ValidationMetric::kBalancedError), 0.5);
    EXPECT_EQ(parse_validation_metric("overall"), ValidationMetric::kOverallError);
    EXPECT_THROW(parse_validation_metric("f1"), ConfigError);
}

}  // namespace
}  // namespace cosen
