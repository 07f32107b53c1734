#include "cosen/experiment.hpp"

#include "cosen/checkpoint.hpp"
#include "cosen/error.hpp"
#include "cosen/sampling.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <limits>

namespace cosen {

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

namespace {

LabeledDataset cap_per_class(const LabeledDataset& data, std::size_t max_per_class) {
    if (max_per_class == 0) return data;
    std::vector<std::size_t> taken(data.n_classes(), 0);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (taken[data.labels()[i]]++ < max_per_class) rows.push_back(i);
    }
    return data.subset(rows);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

LabeledDataset load_dataset(const ExperimentConfig& config, std::uint64_t seed) {
    switch (config.source) {
        case DataSource::kSynthetic: {
            GaussianTaskConfig task;
            task.n_classes = config.n_classes;
            task.dim = config.dim;
            task.samples_per_class = config.samples_per_class.size() == 1
                                         ? std::vector<std::size_t>(config.n_classes, config.samples_per_class[0])
                                         : config.samples_per_class;
            task.radius = config.radius;
            task.seed = stream_seed(seed, SeedStream::kData);
            return generate_gaussian_task(task);
        }
        case DataSource::kIdx:
            return cap_per_class(load_idx(config.images, config.labels), config.max_per_class);
        case DataSource::kCsv:
            return cap_per_class(load_csv(config.csv, config.label_column), config.max_per_class);
    }
    throw ConfigError("unknown data source");
}

SplitSpec split_spec(const ExperimentConfig& config, std::size_t n_classes, std::uint64_t seed) {
    SplitSpec spec;
    spec.train_fraction = config.train_fraction;
    spec.val_fraction_of_train = config.val_fraction;
    spec.seed = stream_seed(seed, SeedStream::kSplit);
    for (ClassIndex c = 0; c < n_classes; ++c) {
        const auto& parity = c % 2 == 1 ? config.retention_odd : config.retention_even;
        if (parity) spec.retention[c] = *parity;
    }
    for (const auto& [c, r] : config.retention) spec.retention[c] = r;
    return spec;
}

DatasetSplit prepare_split(const ExperimentConfig& config) {
    if (!config.seed) throw ConfigError("a seed is required");
    config.validate();
    const LabeledDataset data = load_dataset(config, *config.seed);
    return apply_imbalance_protocol(data, split_spec(config, data.n_classes(), *config.seed));
}

std::vector<std::size_t> network_dims(const ExperimentConfig& config, std::size_t input_dim,
                                      std::size_t n_classes) {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(n_classes);
    return dims;
}

FixedCosts initial_fixed_costs(FixedCostSource source, const LabeledDataset& train, const LabeledDataset& val,
                               const Network& initial) {
    const std::size_t n = train.n_classes();
    switch (source) {
        case FixedCostSource::kHistogram:
            return fixed_cost_matrix(histogram_matrix(train.class_frequencies()).H);
        case FixedCostSource::kSeparability: {
            const NetworkOutputs out = run_network(initial, val);
            return fixed_cost_matrix(class_separability(out.features, val.labels(), n).values);
        }
        case FixedCostSource::kConfusion: {
            const NetworkOutputs out = run_network(initial, val);
            return fixed_cost_matrix(ConfusionMatrix::from_predictions(val.labels(), out.predictions, n).row_normalized);
        }
    }
    throw ConfigError("unknown fixed cost source");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    DatasetSplit split = prepare_split(config);
    const std::uint64_t seed = *config.seed;
    const std::size_t n_classes = split.train.n_classes();

    LabeledDataset train = split.train;
    if (config.mode == TrainingMode::kSmote) {
        SmoteConfig smote;
        smote.k_neighbors = config.smote_k;
        smote.seed = stream_seed(seed, SeedStream::kSampling);
        train = smote_oversample(train, smote).dataset;
    } else if (config.mode == TrainingMode::kRus) {
        train = random_undersample(train, std::nullopt, stream_seed(seed, SeedStream::kSampling)).dataset;
    }

    Network net = init_network(network_dims(config, train.dim(), n_classes), stream_seed(seed, SeedStream::kInit));

    TrainingOptions options;
    options.loss = config.loss;
    options.sgd = SgdConfig{config.learning_rate, config.batch_size, config.epochs,
                            stream_seed(seed, SeedStream::kShuffle)};
    options.val_metric = config.val_metric;
    options.separability_interval = config.separability_interval;

    TrainingResult training = [&] {
        switch (config.mode) {
            case TrainingMode::kCoSen:
                return alternating_optimize(train, split.val, std::move(net), options, config.costs);
            case TrainingMode::kFixedH:
            case TrainingMode::kFixedS:
            case TrainingMode::kFixedM: {
                const FixedCostSource source = config.mode == TrainingMode::kFixedH   ? FixedCostSource::kHistogram
                                               : config.mode == TrainingMode::kFixedS ? FixedCostSource::kSeparability
                                                                                      : FixedCostSource::kConfusion;
                const FixedCosts fixed = initial_fixed_costs(source, train, split.val, net);
                return train_fixed_costs(train, split.val, std::move(net), fixed.costs, options);
            }
            default:
                return train_fixed_costs(train, split.val, std::move(net), CostMatrix::all_ones(n_classes), options);
        }
    }();

    MetricsReport report = evaluate(training.network, split.test);
    report.name = std::string(to_string(config.mode));
    const std::size_t n_train_used = train.size();
    return ExperimentResult{std::move(report), std::move(training), std::move(split), n_train_used};
}

void write_history_jsonl(std::ostream& out, const std::vector<EpochRecord>& history) {
    for (const auto& r : history) {
        nlohmann::ordered_json j;
        j["epoch"] = r.epoch;
        j["train_loss"] = r.train_loss;
        j["train_error"] = r.train_error;
        j["val_error"] = r.val_error;
        j["gamma_xi"] = r.gamma_xi;
        j["accepted"] = r.accepted;
        j["xi_min"] = r.xi_min;
        j["xi_max"] = r.xi_max;
        out << j.dump() << '\n';
    }
}

void write_curves_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "epoch,train_error,val_error\n";
    for (const auto& r : history) out << r.epoch << ',' << r.train_error << ',' << r.val_error << '\n';
}

void write_timing_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "epoch,seconds\n";
    for (const auto& r : history) out << r.epoch << ',' << r.seconds << '\n';
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
    std::filesystem::create_directories(config.output);
    const auto& dir = config.output;
    save_report(dir / "report.txt", result.report);
    {
        auto out = open_output(dir / "confusion.csv");
        write_confusion_csv(out, result.report.confusion);
    }
    {
        auto out = open_output(dir / "history.jsonl");
        write_history_jsonl(out, result.training.history);
    }
    {
        auto out = open_output(dir / "curves.csv");
        write_curves_csv(out, result.training.history);
    }
    {
        auto out = open_output(dir / "timing.csv");
        write_timing_csv(out, result.training.history);
    }
    {
        auto out = open_output(dir / "config.txt");
        out << format_config(config);
    }
    save_checkpoint(dir / "model.ckpt", Checkpoint{result.training.network, result.training.costs});
}

void write_protocol_table(std::ostream& out, const DatasetSplit& split, std::size_t n_classes) {
    const auto train = split.train.class_histogram();
    const auto val = split.val.class_histogram();
    const auto test = split.test.class_histogram();
    out << "class,train,val,test\n";
    for (std::size_t c = 0; c < n_classes; ++c) {
        out << c << ',' << train[c] << ',' << val[c] << ',' << test[c] << '\n';
    }
    out << "discarded," << split.discarded.size() << ",,\n";
}

}  // namespace cosen
