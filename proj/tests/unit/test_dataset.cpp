#include "cosen/dataset.hpp"
#include "cosen/error.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

namespace cosen {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("cosen_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<unsigned char>((v >> shift) & 0xFF));
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                      const std::vector<unsigned char>& pixels) {
    std::vector<unsigned char> out;
    put_u32(out, 0x803);
    put_u32(out, count);
    put_u32(out, rows);
    put_u32(out, cols);
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::vector<unsigned char> idx_labels(const std::vector<unsigned char>& labels) {
    std::vector<unsigned char> out;
    put_u32(out, 0x801);
    put_u32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

TEST(LabeledDataset, Validation) {
    EXPECT_THROW(LabeledDataset(Matrix::Zero(2, 2), {0}, 2), ShapeError);
    EXPECT_THROW(LabeledDataset(Matrix::Zero(2, 2), {0, 2}, 2), ValidityError);
    Matrix bad = Matrix::Zero(1, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(LabeledDataset(bad, {0}, 1), NumericError);
}

TEST(GaussianTask, DeterministicAndCounted) {
    GaussianTaskConfig config;
    config.n_classes = 2;
    config.samples_per_class = {100, 100};
    config.seed = 5;
    const LabeledDataset a = generate_gaussian_task(config);
    const LabeledDataset b = generate_gaussian_task(config);
    EXPECT_EQ(a.features(), b.features());
    EXPECT_EQ(a.labels(), b.labels());

    config.samples_per_class = {500, 50};
    const auto hist = generate_gaussian_task(config).class_histogram();
    EXPECT_EQ(hist, (std::vector<std::size_t>{500, 50}));
}

TEST(GaussianTask, FarMeansAreSeparable) {
    GaussianTaskConfig config;
    config.n_classes = 5;
    config.samples_per_class = {200, 200, 200, 200, 200};
    config.radius = 100.0;
    config.seed = 6;
    const LabeledDataset data = generate_gaussian_task(config);
    // Nearest-centroid oracle, centroids estimated from a second draw.
    config.seed = 7;
    const LabeledDataset fresh = generate_gaussian_task(config);
    Matrix centroids = Matrix::Zero(5, 2);
    const auto hist = data.class_histogram();
    for (std::size_t i = 0; i < data.size(); ++i) {
        centroids.row(static_cast<Eigen::Index>(data.labels()[i])) += data.features().row(static_cast<Eigen::Index>(i));
    }
    for (Eigen::Index c = 0; c < 5; ++c) centroids.row(c) /= static_cast<double>(hist[static_cast<std::size_t>(c)]);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        Eigen::Index best = 0;
        (centroids.rowwise() - fresh.features().row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&best);
        correct += static_cast<std::size_t>(best) == fresh.labels()[i];
    }
    EXPECT_GT(static_cast<double>(correct) / static_cast<double>(fresh.size()), 0.99);
}

TEST(GaussianTask, ConfigErrors) {
    GaussianTaskConfig config;
    config.n_classes = 1;
    config.samples_per_class = {10};
    EXPECT_THROW(generate_gaussian_task(config), ConfigError);
    config.n_classes = 2;
    config.samples_per_class = {10};
    EXPECT_THROW(generate_gaussian_task(config), ConfigError);
    config.samples_per_class = {10, 0};
    EXPECT_THROW(generate_gaussian_task(config), ConfigError);
}

TEST(LoadIdx, WellFormedFixture) {
    TempDir dir;
    std::vector<unsigned char> pixels(3 * 28 * 28, 0x00);
    pixels[1] = 0xFF;
    write_bytes(dir.path() / "img", idx_images(3, 28, 28, pixels));
    write_bytes(dir.path() / "lbl", idx_labels({4, 0, 9}));
    const LabeledDataset data = load_idx(dir.path() / "img", dir.path() / "lbl");
    EXPECT_EQ(data.size(), 3u);
    EXPECT_EQ(data.dim(), 784u);
    EXPECT_EQ(data.n_classes(), 10u);
    EXPECT_EQ(data.labels(), (std::vector<ClassIndex>{4, 0, 9}));
    EXPECT_EQ(data.features()(0, 0), 0.0);
    EXPECT_EQ(data.features()(0, 1), 1.0);
}

TEST(LoadIdx, CountMismatchNamesBothCounts) {
    TempDir dir;
    write_bytes(dir.path() / "img", idx_images(3, 2, 2, std::vector<unsigned char>(12, 1)));
    write_bytes(dir.path() / "lbl", idx_labels({1, 2}));
    try {
        load_idx(dir.path() / "img", dir.path() / "lbl");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('3'), std::string::npos);
        EXPECT_NE(msg.find('2'), std::string::npos);
    }
}

TEST(LoadIdx, BadMagicAndTruncation) {
    TempDir dir;
    auto images = idx_images(2, 2, 2, std::vector<unsigned char>(8, 1));
    images[3] = 0x02;
    write_bytes(dir.path() / "img", images);
    write_bytes(dir.path() / "lbl", idx_labels({1, 2}));
    EXPECT_THROW(load_idx(dir.path() / "img", dir.path() / "lbl"), ParseError);

    write_bytes(dir.path() / "img", idx_images(2, 2, 2, std::vector<unsigned char>(5, 1)));
    try {
        load_idx(dir.path() / "img", dir.path() / "lbl");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GE(e.offset(), 16u);
    }
}

TEST(LoadCsv, RelabelsDenselyAndKeepsNames) {
    TempDir dir;
    {
        std::ofstream out(dir.path() / "d.csv");
        out << "a,b,label\n1.5,2,7\n-3,4e-1,2\n";
    }
    const LabeledDataset data = load_csv(dir.path() / "d.csv", "label");
    EXPECT_EQ(data.labels(), (std::vector<ClassIndex>{0, 1}));
    EXPECT_EQ(data.label_names(), (std::vector<std::string>{"7", "2"}));
    EXPECT_EQ(data.features()(1, 1), 0.4);
    EXPECT_THROW(load_csv(dir.path() / "d.csv", "class"), ConfigError);
}

TEST(LoadCsv, ParseErrorsCarryRowAndColumn) {
    TempDir dir;
    {
        std::ofstream out(dir.path() / "ragged.csv");
        out << "a,label\n1,0\n2\n";
    }
    EXPECT_THROW(load_csv(dir.path() / "ragged.csv", "label"), ParseError);
    {
        std::ofstream out(dir.path() / "text.csv");
        out << "a,b,label\n1,2,0\n3,x,1\n";
    }
    try {
        load_csv(dir.path() / "text.csv", "label");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);  // file line, header included
        EXPECT_EQ(e.column(), 2u);
    }
}

TEST(Csv, RoundTrip) {
    TempDir dir;
    std::mt19937_64 rng(51);
    const LabeledDataset data(testing::random_matrix(rng, 30, 4, -1e3, 1e3),
                              [&] {
                                  std::vector<ClassIndex> l(30);
                                  for (std::size_t i = 0; i < 30; ++i) l[i] = i % 3;
                                  return l;
                              }(),
                              3);
    write_csv(dir.path() / "r.csv", data);
    const LabeledDataset back = load_csv(dir.path() / "r.csv", "label");
    EXPECT_EQ(back.features(), data.features());
    EXPECT_EQ(back.labels(), data.labels());
}

LabeledDataset uniform_dataset(std::size_t n_classes, std::size_t per_class, std::uint64_t seed) {
    GaussianTaskConfig config;
    config.n_classes = n_classes;
    config.samples_per_class.assign(n_classes, per_class);
    config.seed = seed;
    return generate_gaussian_task(config);
}

TEST(ImbalanceProtocol, OddClassesReducedToTenPercent) {
    // 1000 per class with a 0.6 train share gives a 600-row train pool.
    const LabeledDataset data = uniform_dataset(4, 1000, 52);
    SplitSpec spec;
    spec.train_fraction = 0.6;
    spec.seed = 3;
    spec.retention = {{1, 0.1}, {3, 0.1}};
    const DatasetSplit split = apply_imbalance_protocol(data, spec);
    std::vector<std::size_t> kept = split.train.class_histogram();
    for (std::size_t c = 0; c < 4; ++c) kept[c] += split.val.class_histogram()[c];
    EXPECT_EQ(kept, (std::vector<std::size_t>{600, 60, 600, 60}));
    // Stratified validation share: round(0.05 * kept).
    EXPECT_EQ(split.val.class_histogram(), (std::vector<std::size_t>{30, 3, 30, 3}));
    EXPECT_EQ(split.test.class_histogram(), (std::vector<std::size_t>{400, 400, 400, 400}));
    EXPECT_EQ(split.discarded.size(), 1080u);
}

TEST(ImbalanceProtocol, FullRetentionKeepsHistograms) {
    const LabeledDataset data = uniform_dataset(3, 200, 53);
    SplitSpec spec;
    spec.seed = 4;
    const DatasetSplit split = apply_imbalance_protocol(data, spec);
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(split.train.class_histogram()[c] + split.val.class_histogram()[c], 140u);
        EXPECT_EQ(split.test.class_histogram()[c], 60u);
    }
    EXPECT_TRUE(split.discarded.empty());
}

TEST(ImbalanceProtocol, PartitionsSourceIndices) {
    std::mt19937_64 rng(54);
    for (int trial = 0; trial < 20; ++trial) {
        const LabeledDataset data = uniform_dataset(3, 50 + testing::random_index(rng, 100), rng());
        SplitSpec spec;
        spec.seed = rng();
        spec.val_fraction_of_train = 0.2;
        spec.retention = {{testing::random_index(rng, 3), 0.25}};
        const DatasetSplit split = apply_imbalance_protocol(data, spec);
        std::multiset<std::size_t> all;
        for (const auto* part : {&split.train, &split.val, &split.test}) {
            all.insert(part->source_indices().begin(), part->source_indices().end());
        }
        all.insert(split.discarded.begin(), split.discarded.end());
        std::set<std::size_t> unique(all.begin(), all.end());
        EXPECT_EQ(unique.size(), all.size());
        EXPECT_EQ(all.size(), data.size());
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            EXPECT_EQ(split.train.labels()[i], data.labels()[split.train.source_indices()[i]]);
        }
    }
}

TEST(ImbalanceProtocol, TestSetIgnoresRetention) {
    const LabeledDataset data = uniform_dataset(2, 300, 55);
    SplitSpec full;
    full.seed = 9;
    SplitSpec reduced = full;
    reduced.retention = {{0, 0.1}};
    EXPECT_EQ(dataset_fingerprint(apply_imbalance_protocol(data, full).test),
              dataset_fingerprint(apply_imbalance_protocol(data, reduced).test));
}

TEST(ImbalanceProtocol, Errors) {
    const LabeledDataset data = uniform_dataset(2, 10, 56);
    SplitSpec spec;
    spec.train_fraction = 0.04;  // rounds to an empty train pool
    EXPECT_THROW(apply_imbalance_protocol(data, spec), ProtocolError);
    SplitSpec bad;
    bad.retention = {{0, 0.0}};
    EXPECT_THROW(apply_imbalance_protocol(data, bad), ConfigError);
    bad.retention = {{0, 1.5}};
    EXPECT_THROW(apply_imbalance_protocol(data, bad), ConfigError);
}

TEST(Fingerprint, DependsOnIndicesAndLabels) {
    const LabeledDataset data = uniform_dataset(2, 20, 57);
    const std::vector<std::size_t> rows{0, 1, 2};
    const std::vector<std::size_t> other{0, 1, 3};
    EXPECT_EQ(dataset_fingerprint(data.subset(rows)), dataset_fingerprint(data.subset(rows)));
    EXPECT_NE(dataset_fingerprint(data.subset(rows)), dataset_fingerprint(data.subset(other)));
    EXPECT_EQ(dataset_fingerprint(data).size(), 16u);
}

}  // namespace
}  // namespace cosen
