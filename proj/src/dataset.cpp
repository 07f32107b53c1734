#include "cosen/dataset.hpp"

#include "cosen/confusion.hpp"
#include "cosen/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace cosen {

// ---------------------------------------------------------------------------
// LabeledDataset

LabeledDataset::LabeledDataset(Matrix features, std::vector<ClassIndex> labels, std::size_t n_classes)
    : features_(std::move(features)), labels_(std::move(labels)), n_classes_(n_classes) {
    if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
        std::ostringstream os;
        os << features_.rows() << " feature rows but " << labels_.size() << " labels";
        throw ShapeError(os.str());
    }
    if (n_classes_ == 0) throw ValidityError("dataset needs at least one class");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= n_classes_) {
            throw ValidityError("label " + std::to_string(labels_[i]) + " at row " + std::to_string(i) +
                                " outside [0, " + std::to_string(n_classes_) + ")");
        }
    }
    if (!features_.allFinite()) throw NumericError("dataset contains non-finite feature values");
    source_indices_.resize(labels_.size());
    std::iota(source_indices_.begin(), source_indices_.end(), std::size_t{0});
}

std::vector<std::size_t> LabeledDataset::class_histogram() const {
    std::vector<std::size_t> counts(n_classes_, 0);
    for (ClassIndex c : labels_) ++counts[c];
    return counts;
}

Vector LabeledDataset::class_frequencies() const {
    Vector h = Vector::Zero(static_cast<Eigen::Index>(n_classes_));
    if (labels_.empty()) return h;
    for (ClassIndex c : labels_) h[static_cast<Eigen::Index>(c)] += 1.0;
    return h / static_cast<double>(labels_.size());
}

void LabeledDataset::set_source_indices(std::vector<std::size_t> indices) {
    if (indices.size() != labels_.size()) throw ShapeError("source index count does not match dataset");
    source_indices_ = std::move(indices);
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    Matrix f(static_cast<Eigen::Index>(rows.size()), features_.cols());
    std::vector<ClassIndex> labels;
    std::vector<std::size_t> sources;
    labels.reserve(rows.size());
    sources.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= size()) throw ShapeError("subset row out of range");
        f.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(rows[i]));
        labels.push_back(labels_[rows[i]]);
        sources.push_back(source_indices_[rows[i]]);
    }
    LabeledDataset out(std::move(f), std::move(labels), n_classes_);
    out.source_indices_ = std::move(sources);
    out.label_names_ = label_names_;
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

LabeledDataset generate_gaussian_task(const GaussianTaskConfig& config) {
    if (config.n_classes < 2) throw ConfigError("gaussian task needs at least 2 classes");
    if (config.dim < 2) throw ConfigError("gaussian task needs at least 2 dimensions");
    if (config.samples_per_class.size() != config.n_classes) {
        throw ConfigError("samples_per_class must list one count per class");
    }
    if (!(config.radius >= 0.0) || !std::isfinite(config.radius)) throw ConfigError("radius must be >= 0");
    std::size_t total = 0;
    for (std::size_t c = 0; c < config.n_classes; ++c) {
        if (config.samples_per_class[c] == 0) {
            throw ConfigError("class " + std::to_string(c) + " needs at least one sample");
        }
        total += config.samples_per_class[c];
    }

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix features(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(config.dim));
    std::vector<ClassIndex> labels;
    labels.reserve(total);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < config.n_classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                             static_cast<double>(config.n_classes);
        const double mx = config.radius * std::cos(angle);
        const double my = config.radius * std::sin(angle);
        for (std::size_t i = 0; i < config.samples_per_class[c]; ++i, ++row) {
            for (Eigen::Index j = 0; j < features.cols(); ++j) features(row, j) = noise(rng);
            features(row, 0) += mx;
            features(row, 1) += my;
            labels.push_back(c);
        }
    }
    return LabeledDataset(std::move(features), std::move(labels), config.n_classes);
}

// ---------------------------------------------------------------------------
// IDX

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::string& what) {
    if (offset + 4 > bytes.size()) {
        throw ParseError(what + ": truncated header", offset);
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
    const auto images = read_all(images_path);
    const auto labels = read_all(labels_path);
    const std::string img_name = images_path.string();
    const std::string lbl_name = labels_path.string();

    if (read_be32(images, 0, img_name) != kIdxImagesMagic) {
        throw ParseError(img_name + ": bad IDX image magic", 0);
    }
    if (read_be32(labels, 0, lbl_name) != kIdxLabelsMagic) {
        throw ParseError(lbl_name + ": bad IDX label magic", 0);
    }
    const std::size_t n_images = read_be32(images, 4, img_name);
    const std::size_t rows = read_be32(images, 8, img_name);
    const std::size_t cols = read_be32(images, 12, img_name);
    const std::size_t n_labels = read_be32(labels, 4, lbl_name);
    if (n_images != n_labels) {
        std::ostringstream os;
        os << "image count " << n_images << " does not match label count " << n_labels;
        throw ParseError(os.str(), 4);
    }
    const std::size_t pixels = rows * cols;
    if (pixels == 0) throw ParseError(img_name + ": zero-sized images", 8);
    constexpr std::size_t kImageHeader = 16;
    constexpr std::size_t kLabelHeader = 8;
    if (images.size() < kImageHeader + n_images * pixels) {
        throw ParseError(img_name + ": truncated pixel data", images.size());
    }
    if (labels.size() < kLabelHeader + n_labels) {
        throw ParseError(lbl_name + ": truncated label data", labels.size());
    }

    Matrix features(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(pixels));
    std::vector<ClassIndex> y(n_images);
    std::size_t n_classes = 0;
    for (std::size_t i = 0; i < n_images; ++i) {
        const unsigned char* src = images.data() + kImageHeader + i * pixels;
        for (std::size_t j = 0; j < pixels; ++j) {
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = src[j] / 255.0;
        }
        y[i] = labels[kLabelHeader + i];
        n_classes = std::max(n_classes, y[i] + 1);
    }
    return LabeledDataset(std::move(features), std::move(y), std::max<std::size_t>(n_classes, 1));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header row", 0, 1, 0);
    const auto header = split_csv_line(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw ConfigError("label column '" + label_column + "' not found in " + path.string());
    }
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());
    const std::size_t dim = header.size() - 1;

    std::vector<double> values;
    std::vector<ClassIndex> labels;
    std::vector<std::string> names;
    std::unordered_map<std::string, ClassIndex> dense;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << path.string() << ": row " << row << " has " << cells.size() << " cells, expected "
               << header.size();
            throw ParseError(os.str(), 0, row, 0);
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || *end != '\0') {
                std::ostringstream os;
                os << path.string() << ": non-numeric cell '" << cell << "' at row " << row << ", column "
                   << c + 1;
                throw ParseError(os.str(), 0, row, c + 1);
            }
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << path.string() << ": non-finite value at row " << row << ", column " << c + 1;
                throw ParseError(os.str(), 0, row, c + 1);
            }
            if (c == label_pos) {
                auto [it, inserted] = dense.emplace(cell, names.size());
                if (inserted) names.push_back(cell);
                labels.push_back(it->second);
            } else {
                values.push_back(v);
            }
        }
    }
    Matrix features(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * dim + j];
        }
    }
    LabeledDataset ds(std::move(features), std::move(labels), std::max<std::size_t>(names.size(), 1));
    ds.set_label_names(std::move(names));
    return ds;
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'f' << j << ',';
    out << "label\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const auto& names = dataset.label_names();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t j = 0; j < dataset.dim(); ++j) {
            out << dataset.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ',';
        }
        const ClassIndex c = dataset.labels()[i];
        if (c < names.size()) {
            out << names[c];
        } else {
            out << c;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Splitting

double SplitSpec::retention_for(ClassIndex c) const {
    const auto it = retention.find(c);
    return it == retention.end() ? 1.0 : it->second;
}

void SplitSpec::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(train_fraction)) throw ConfigError("train_fraction must lie in (0, 1]");
    if (!in_unit(val_fraction_of_train)) throw ConfigError("val_fraction must lie in (0, 1]");
    for (const auto& [c, r] : retention) {
        if (!in_unit(r)) throw ConfigError("retention of class " + std::to_string(c) + " must lie in (0, 1]");
    }
}

DatasetSplit apply_imbalance_protocol(const LabeledDataset& dataset, const SplitSpec& spec) {
    spec.validate();
    for (const auto& [c, r] : spec.retention) {
        if (c >= dataset.n_classes()) throw ConfigError("retention given for unknown class " + std::to_string(c));
    }
    std::vector<std::vector<std::size_t>> by_class(dataset.n_classes());
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels()[i]].push_back(i);

    std::mt19937_64 rng(spec.seed);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> discarded_rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        std::shuffle(rows.begin(), rows.end(), rng);
        const std::size_t n = rows.size();
        const auto pool = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(n)));
        const auto kept = static_cast<std::size_t>(
            std::ceil(spec.retention_for(c) * static_cast<double>(pool) - 1e-9));
        if (kept == 0) {
            throw ProtocolError("class " + std::to_string(c) + " has no training samples after the protocol");
        }
        std::size_t n_val = 0;
        if (kept >= 2) {
            n_val = static_cast<std::size_t>(std::lround(spec.val_fraction_of_train * static_cast<double>(kept)));
            n_val = std::clamp<std::size_t>(n_val, 1, kept - 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_val) {
                val_rows.push_back(rows[i]);
            } else if (i < kept) {
                train_rows.push_back(rows[i]);
            } else if (i < pool) {
                discarded_rows.push_back(rows[i]);
            } else {
                test_rows.push_back(rows[i]);
            }
        }
    }
    for (auto* v : {&train_rows, &val_rows, &test_rows, &discarded_rows}) std::sort(v->begin(), v->end());

    DatasetSplit split;
    split.train = dataset.subset(train_rows);
    split.val = dataset.subset(val_rows);
    split.test = dataset.subset(test_rows);
    for (std::size_t r : discarded_rows) split.discarded.push_back(dataset.source_indices()[r]);
    return split;
}

std::string dataset_fingerprint(const LabeledDataset& dataset) {
    std::uint64_t hash = 1469598103934665603ULL;
    auto mix = [&hash](std::uint64_t value) {
        for (int b = 0; b < 8; ++b) {
            hash ^= (value >> (8 * b)) & 0xFFU;
            hash *= 1099511628211ULL;
        }
    };
    mix(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        mix(dataset.source_indices()[i]);
        mix(dataset.labels()[i]);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

// ---------------------------------------------------------------------------
// Confusion matrix

bool ConfusionMatrix::has_empty_rows() const {
    return std::find(empty_rows.begin(), empty_rows.end(), true) != empty_rows.end();
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::span<const ClassIndex> truth,
                                                  std::span<const ClassIndex> predicted,
                                                  std::size_t n_classes) {
    if (truth.size() != predicted.size()) throw ShapeError("truth and prediction counts differ");
    if (n_classes == 0) throw ShapeError("confusion matrix needs at least one class");
    const auto n = static_cast<Eigen::Index>(n_classes);
    ConfusionMatrix m;
    m.counts = IndexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= n_classes || predicted[i] >= n_classes) throw ShapeError("label out of range");
        ++m.counts(static_cast<Eigen::Index>(truth[i]), static_cast<Eigen::Index>(predicted[i]));
    }
    m.row_normalized.resize(n, n);
    m.empty_rows.assign(n_classes, false);
    for (Eigen::Index r = 0; r < n; ++r) {
        const long row_total = m.counts.row(r).sum();
        if (row_total == 0) {
            m.row_normalized.row(r).setConstant(1.0 / static_cast<double>(n));
            m.empty_rows[static_cast<std::size_t>(r)] = true;
        } else {
            for (Eigen::Index c = 0; c < n; ++c) {
                m.row_normalized(r, c) = static_cast<double>(m.counts(r, c)) / static_cast<double>(row_total);
            }
        }
    }
    return m;
}

}  // namespace cosen
