#include "cosen/sampling.hpp"

#include "cosen/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>

namespace cosen {

SmoteResult smote_oversample(const LabeledDataset& dataset, const SmoteConfig& config) {
    if (config.k_neighbors == 0) throw ConfigError("SMOTE needs k >= 1");
    if (config.fixed_lambda && !(*config.fixed_lambda >= 0.0 && *config.fixed_lambda <= 1.0)) {
        throw ConfigError("SMOTE lambda must lie in [0, 1]");
    }
    const auto histogram = dataset.class_histogram();
    const std::size_t target =
        config.target_count.value_or(*std::max_element(histogram.begin(), histogram.end()));

    std::vector<std::vector<std::size_t>> members(dataset.n_classes());
    for (std::size_t i = 0; i < dataset.size(); ++i) members[dataset.labels()[i]].push_back(i);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SyntheticSample> synthetic;
    std::vector<Vector> new_rows;
    std::vector<ClassIndex> new_labels;
    std::vector<std::size_t> new_sources;
    const Matrix& x = dataset.features();

    for (std::size_t c = 0; c < members.size(); ++c) {
        const auto& rows = members[c];
        if (rows.size() >= target) continue;
        if (rows.size() < 2) {
            throw SamplingError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                                " sample(s); SMOTE needs at least 2");
        }
        const std::size_t k = std::min(config.k_neighbors, rows.size() - 1);

        // k nearest same-class neighbours of every member (ties by row order).
        std::vector<std::vector<std::size_t>> neighbours(rows.size());
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t a = 0; a < rows.size(); ++a) {
            dist.clear();
            for (std::size_t b = 0; b < rows.size(); ++b) {
                if (a == b) continue;
                dist.emplace_back((x.row(static_cast<Eigen::Index>(rows[a])) -
                                   x.row(static_cast<Eigen::Index>(rows[b])))
                                      .squaredNorm(),
                                  rows[b]);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            for (std::size_t j = 0; j < k; ++j) neighbours[a].push_back(dist[j].second);
        }

        std::uniform_int_distribution<std::size_t> pick_member(0, rows.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_neighbour(0, k - 1);
        for (std::size_t s = rows.size(); s < target; ++s) {
            const std::size_t a = pick_member(rng);
            const std::size_t base = rows[a];
            const std::size_t partner = neighbours[a][pick_neighbour(rng)];
            const double lambda = config.fixed_lambda ? *config.fixed_lambda : unit(rng);
            const Vector xb = x.row(static_cast<Eigen::Index>(base)).transpose();
            const Vector xp = x.row(static_cast<Eigen::Index>(partner)).transpose();
            new_rows.push_back(xb + lambda * (xp - xb));
            new_labels.push_back(c);
            new_sources.push_back(dataset.source_indices()[base]);
            synthetic.push_back({dataset.size() + new_rows.size() - 1, base, partner, lambda});
        }
    }

    const auto total = static_cast<Eigen::Index>(dataset.size() + new_rows.size());
    Matrix features(total, static_cast<Eigen::Index>(dataset.dim()));
    features.topRows(static_cast<Eigen::Index>(dataset.size())) = x;
    std::vector<ClassIndex> labels = dataset.labels();
    std::vector<std::size_t> sources = dataset.source_indices();
    for (std::size_t i = 0; i < new_rows.size(); ++i) {
        features.row(static_cast<Eigen::Index>(dataset.size() + i)) = new_rows[i].transpose();
    }
    labels.insert(labels.end(), new_labels.begin(), new_labels.end());
    sources.insert(sources.end(), new_sources.begin(), new_sources.end());

    LabeledDataset out(std::move(features), std::move(labels), dataset.n_classes());
    out.set_source_indices(std::move(sources));
    out.set_label_names(dataset.label_names());
    return {std::move(out), std::move(synthetic)};
}

UndersampleResult random_undersample(const LabeledDataset& dataset, std::optional<std::size_t> target,
                                     std::uint64_t seed) {
    const auto histogram = dataset.class_histogram();
    std::size_t goal = 0;
    if (target) {
        goal = *target;
    } else {
        goal = std::numeric_limits<std::size_t>::max();
        for (std::size_t count : histogram) {
            if (count > 0) goal = std::min(goal, count);
        }
        if (goal == std::numeric_limits<std::size_t>::max()) goal = 0;
    }
    if (goal < 1) throw ConfigError("under-sampling target must be at least 1");

    std::vector<std::vector<std::size_t>> members(dataset.n_classes());
    for (std::size_t i = 0; i < dataset.size(); ++i) members[dataset.labels()[i]].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> retained;
    for (auto& rows : members) {
        if (rows.size() > goal) {
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(goal);
        }
        retained.insert(retained.end(), rows.begin(), rows.end());
    }
    std::sort(retained.begin(), retained.end());
    return {dataset.subset(retained), std::move(retained)};
}

}  // namespace cosen
