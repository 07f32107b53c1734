#pragma once

#include "cosen/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cosen {

/// Feature rows with dense integer labels in [0, n_classes).
class LabeledDataset {
public:
    LabeledDataset() = default;

    /// Throws ShapeError (row/label count mismatch), ValidityError (label out
    /// of range) or NumericError (non-finite feature).
    LabeledDataset(Matrix features, std::vector<ClassIndex> labels, std::size_t n_classes);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
    std::size_t n_classes() const { return n_classes_; }

    const Matrix& features() const { return features_; }
    const std::vector<ClassIndex>& labels() const { return labels_; }
    Vector sample(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Counts per class; sums to size().
    std::vector<std::size_t> class_histogram() const;
    /// Counts normalized to fractions (zeros when the dataset is empty).
    Vector class_frequencies() const;

    /// Position of each row in the dataset it was derived from. Identity for
    /// freshly loaded data.
    const std::vector<std::size_t>& source_indices() const { return source_indices_; }
    void set_source_indices(std::vector<std::size_t> indices);

    /// Original label text per dense class index (empty when labels were
    /// dense to begin with).
    const std::vector<std::string>& label_names() const { return label_names_; }
    void set_label_names(std::vector<std::string> names) { label_names_ = std::move(names); }

    /// Rows `rows` in the given order; source indices are carried through.
    LabeledDataset subset(std::span<const std::size_t> rows) const;

private:
    Matrix features_;
    std::vector<ClassIndex> labels_;
    std::size_t n_classes_ = 0;
    std::vector<std::size_t> source_indices_;
    std::vector<std::string> label_names_;
};

struct GaussianTaskConfig {
    std::size_t n_classes = 5;
    std::size_t dim = 2;
    std::vector<std::size_t> samples_per_class;
    double radius = 3.0;
    std::uint64_t seed = 1;
};

/// Class c ~ N(m_c, I) with m_c on a circle of `radius` in the first two
/// coordinates at angle 2 pi c / n_classes. Rows are grouped by class.
/// Throws ConfigError for fewer than 2 classes, dim < 2, or a count list
/// that is the wrong length or holds a zero.
LabeledDataset generate_gaussian_task(const GaussianTaskConfig& config);

/// IDX (MNIST) images + labels. Pixels scale to [0, 1], images flatten row
/// major. Throws ParseError with the byte offset of the problem.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

/// Header row required. Labels are re-indexed densely in order of first
/// appearance; the original text is kept in label_names(). Throws
/// ConfigError when the label column is missing, ParseError (with row and
/// column) on ragged rows or non-numeric cells.
LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Writes `f0..f{d-1},label` with round-trip precision.
void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

struct SplitSpec {
    double train_fraction = 0.7;
    double val_fraction_of_train = 0.05;
    std::uint64_t seed = 1;
    /// class -> retention fraction in (0, 1]; absent classes keep everything.
    std::map<ClassIndex, double> retention;

    double retention_for(ClassIndex c) const;
    /// Throws ConfigError.
    void validate() const;
};

struct DatasetSplit {
    LabeledDataset train;
    LabeledDataset val;
    LabeledDataset test;
    /// Train-pool rows dropped by retention (source indices).
    std::vector<std::size_t> discarded;
};

/// Per class: shuffle, send round(train_fraction * n) rows to the train pool
/// and the rest to test; keep ceil(retention * pool) of the pool; carve a
/// stratified validation share from what was kept. Test data is never
/// touched by retention. Throws ProtocolError when a class ends up with no
/// training rows.
DatasetSplit apply_imbalance_protocol(const LabeledDataset& dataset, const SplitSpec& spec);

/// FNV-1a over (source index, label) pairs, as 16 hex digits.
std::string dataset_fingerprint(const LabeledDataset& dataset);

}  // namespace cosen
