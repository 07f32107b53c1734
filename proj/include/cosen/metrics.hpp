#pragma once

#include "cosen/confusion.hpp"
#include "cosen/dataset.hpp"
#include "cosen/network.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cosen {

struct MetricsReport {
    std::string name;  // run label, e.g. the training mode
    double overall_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    /// Mean of the row-normalized diagonal over classes present in the test set.
    double average_class_accuracy = 0.0;
    ConfusionMatrix confusion;
    std::size_t n_test = 0;
    std::string test_fingerprint;
};

MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion);

/// Throws ConfigError for an empty test set.
MetricsReport evaluate(const Network& net, const LabeledDataset& test);

/// `key = value` lines; numbers use round-trip precision so a report read
/// back compares equal to the one written.
void write_report(std::ostream& out, const MetricsReport& report);
/// Throws ParseError.
MetricsReport read_report(std::istream& in);
void save_report(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport load_report(const std::filesystem::path& path);

/// Counts, one CSV row per true class.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion);

struct ComparisonRow {
    std::string name;
    double overall_accuracy;
    double average_class_accuracy;
    std::vector<double> per_class_accuracy;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;  // best average-class accuracy first
};

/// Throws ConfigError for fewer than two reports or reports over different
/// test splits.
ComparisonTable compare_runs(const std::vector<MetricsReport>& reports);

void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
void write_comparison_text(std::ostream& out, const ComparisonTable& table);

}  // namespace cosen
