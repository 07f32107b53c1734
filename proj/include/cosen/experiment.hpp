#pragma once

#include "cosen/config.hpp"
#include "cosen/cost_adapt.hpp"
#include "cosen/dataset.hpp"
#include "cosen/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace cosen {

/// Seed streams derived from the run seed.
enum class SeedStream : std::uint64_t { kData = 0, kSplit = 1, kInit = 2, kShuffle = 3, kSampling = 4 };

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream);

/// Loads or generates the full dataset described by the config.
LabeledDataset load_dataset(const ExperimentConfig& config, std::uint64_t seed);

SplitSpec split_spec(const ExperimentConfig& config, std::size_t n_classes, std::uint64_t seed);

/// Loads the data and applies the imbalance protocol. Needs config.seed.
DatasetSplit prepare_split(const ExperimentConfig& config);

/// Layer widths: input, hidden..., classes.
std::vector<std::size_t> network_dims(const ExperimentConfig& config, std::size_t input_dim,
                                      std::size_t n_classes);

/// Frozen cost matrix for the fixed-h/s/m modes, built from the initial
/// network's view of the validation set.
FixedCosts initial_fixed_costs(FixedCostSource source, const LabeledDataset& train, const LabeledDataset& val,
                               const Network& initial);

struct ExperimentResult {
    MetricsReport report;
    TrainingResult training;
    DatasetSplit split;
    /// Training set after optional re-sampling.
    std::size_t n_train_used = 0;
};

/// ingest, protocol, optional re-sampling, training, evaluation. Needs
/// config.seed; throws ConfigError on an invalid config and propagates any
/// module error.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes report.txt, confusion.csv, history.jsonl, curves.csv,
/// timing.csv, model.ckpt and config.txt into config.output. Everything
/// except timing.csv is a deterministic function of config and seed.
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result);

void write_history_jsonl(std::ostream& out, const std::vector<EpochRecord>& history);
void write_curves_csv(std::ostream& out, const std::vector<EpochRecord>& history);
void write_timing_csv(std::ostream& out, const std::vector<EpochRecord>& history);

/// Per-class sizes of each split part.
void write_protocol_table(std::ostream& out, const DatasetSplit& split, std::size_t n_classes);

}  // namespace cosen
