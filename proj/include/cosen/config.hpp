#pragma once

#include "cosen/cost_adapt.hpp"
#include "cosen/dataset.hpp"
#include "cosen/losses.hpp"
#include "cosen/network.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosen {

enum class DataSource { kSynthetic, kIdx, kCsv };

enum class TrainingMode { kBaseline, kCoSen, kFixedH, kFixedS, kFixedM, kSmote, kRus };
std::string_view to_string(TrainingMode mode);
TrainingMode parse_training_mode(std::string_view name);

struct ExperimentConfig {
    // [data]
    DataSource source = DataSource::kSynthetic;
    std::size_t n_classes = 5;
    std::size_t dim = 2;
    std::vector<std::size_t> samples_per_class{1000};  // one value applies to every class
    double radius = 3.0;
    std::filesystem::path images;
    std::filesystem::path labels;
    std::filesystem::path csv;
    std::string label_column = "label";
    std::size_t max_per_class = 0;  // 0 = keep all loaded samples

    // [protocol]
    double train_fraction = 0.7;
    double val_fraction = 0.05;
    std::map<ClassIndex, double> retention;
    std::optional<double> retention_odd;
    std::optional<double> retention_even;

    // [model]
    std::vector<std::size_t> hidden{32, 32};
    LossKind loss = LossKind::kCrossEntropy;

    // [sgd]
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    std::size_t epochs = 30;

    // [costs]
    CostObjectiveParams costs;
    std::size_t separability_interval = 10;
    ValidationMetric val_metric = ValidationMetric::kBalancedError;

    // [run]
    TrainingMode mode = TrainingMode::kCoSen;
    std::size_t smote_k = 5;
    std::filesystem::path output = "run";
    std::optional<std::uint64_t> seed;

    /// Throws ConfigError.
    void validate() const;
};

/// Sets one key from its text value. Throws ConfigError for unknown keys or
/// malformed values.
void apply_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Every recognised key, in file order.
const std::vector<std::string>& config_keys();

/// Flat `key = value` text; `[section]` headers group keys for the reader
/// and `#` starts a comment. Throws ConfigError with the line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form (all keys, including defaults).
std::string format_config(const ExperimentConfig& config);

/// Independent RNG stream derived from the run seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace cosen
