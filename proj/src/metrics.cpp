#include "cosen/metrics.hpp"

#include "cosen/cost_adapt.hpp"
#include "cosen/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace cosen {

MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion) {
    MetricsReport r;
    r.confusion = confusion;
    const long total = confusion.total();
    r.n_test = static_cast<std::size_t>(total);
    r.overall_accuracy = total == 0 ? 0.0
                                    : static_cast<double>(confusion.counts.trace()) / static_cast<double>(total);
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < confusion.n_classes(); ++c) {
        const auto i = static_cast<Eigen::Index>(c);
        const double acc = confusion.empty_rows[c] ? 0.0 : confusion.row_normalized(i, i);
        r.per_class_accuracy.push_back(acc);
        if (!confusion.empty_rows[c]) {
            sum += acc;
            ++present;
        }
    }
    r.average_class_accuracy = present == 0 ? 0.0 : sum / static_cast<double>(present);
    return r;
}

MetricsReport evaluate(const Network& net, const LabeledDataset& test) {
    if (test.empty()) throw ConfigError("cannot evaluate on an empty test set");
    if (test.n_classes() != net.output_dim()) throw ShapeError("test classes do not match network output");
    const NetworkOutputs outputs = run_network(net, test);
    MetricsReport r =
        metrics_from_confusion(ConfusionMatrix::from_predictions(test.labels(), outputs.predictions, test.n_classes()));
    r.test_fingerprint = dataset_fingerprint(test);
    return r;
}

namespace {

std::string join(const std::vector<double>& values) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
    return os.str();
}

std::vector<double> split_numbers(const std::string& text, std::size_t line) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || *end != '\0') throw ParseError("report: bad number '" + cell + "'", 0, line, 0);
        out.push_back(v);
    }
    return out;
}

}  // namespace

void write_report(std::ostream& out, const MetricsReport& report) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "name = " << report.name << '\n';
    out << "n_test = " << report.n_test << '\n';
    out << "n_classes = " << report.confusion.n_classes() << '\n';
    out << "test_fingerprint = " << report.test_fingerprint << '\n';
    out << "overall_accuracy = " << report.overall_accuracy << '\n';
    out << "average_class_accuracy = " << report.average_class_accuracy << '\n';
    out << "per_class_accuracy = " << join(report.per_class_accuracy) << '\n';
    const IndexMatrix& counts = report.confusion.counts;
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        out << "confusion_row_" << r << " = ";
        for (Eigen::Index c = 0; c < counts.cols(); ++c) out << (c ? "," : "") << counts(r, c);
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

MetricsReport read_report(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ParseError("report: expected 'key = value'", 0, line_no, 0);
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto need = [&kv](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("report: missing field '" + key + "'", 0);
        return it->second;
    };
    const auto n = static_cast<Eigen::Index>(std::stoul(need("n_classes")));
    IndexMatrix counts(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = split_numbers(need("confusion_row_" + std::to_string(r)), 0);
        if (static_cast<Eigen::Index>(row.size()) != n) throw ParseError("report: ragged confusion row", 0);
        for (Eigen::Index c = 0; c < n; ++c) counts(r, c) = static_cast<long>(row[static_cast<std::size_t>(c)]);
    }
    // Rebuild the normalized matrix from the counts; the headline numbers
    // are taken verbatim from the file.
    std::vector<ClassIndex> truth;
    std::vector<ClassIndex> pred;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            truth.insert(truth.end(), static_cast<std::size_t>(counts(r, c)), static_cast<ClassIndex>(r));
            pred.insert(pred.end(), static_cast<std::size_t>(counts(r, c)), static_cast<ClassIndex>(c));
        }
    }
    MetricsReport report;
    report.confusion = ConfusionMatrix::from_predictions(truth, pred, static_cast<std::size_t>(n));
    report.name = need("name");
    report.n_test = std::stoul(need("n_test"));
    report.test_fingerprint = need("test_fingerprint");
    report.overall_accuracy = split_numbers(need("overall_accuracy"), 0).at(0);
    report.average_class_accuracy = split_numbers(need("average_class_accuracy"), 0).at(0);
    report.per_class_accuracy = split_numbers(need("per_class_accuracy"), 0);
    return report;
}

void save_report(const std::filesystem::path& path, const MetricsReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    write_report(out, report);
}

MetricsReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open report '" + path.string() + "'");
    return read_report(in);
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion) {
    const auto n = static_cast<Eigen::Index>(confusion.n_classes());
    out << "true_class";
    for (Eigen::Index c = 0; c < n; ++c) out << ",pred_" << c;
    out << '\n';
    for (Eigen::Index r = 0; r < n; ++r) {
        out << r;
        for (Eigen::Index c = 0; c < n; ++c) out << ',' << confusion.counts(r, c);
        out << '\n';
    }
}

ComparisonTable compare_runs(const std::vector<MetricsReport>& reports) {
    if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
    for (const auto& r : reports) {
        if (r.test_fingerprint != reports.front().test_fingerprint) {
            throw ConfigError("reports '" + reports.front().name + "' and '" + r.name +
                              "' were evaluated on different test splits");
        }
    }
    ComparisonTable table;
    for (const auto& r : reports) {
        table.rows.push_back({r.name, r.overall_accuracy, r.average_class_accuracy, r.per_class_accuracy});
    }
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.average_class_accuracy != b.average_class_accuracy) {
            return a.average_class_accuracy > b.average_class_accuracy;
        }
        return a.overall_accuracy > b.overall_accuracy;
    });
    return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const std::size_t n = table.rows.empty() ? 0 : table.rows.front().per_class_accuracy.size();
    out << "name,overall_accuracy,average_class_accuracy";
    for (std::size_t c = 0; c < n; ++c) out << ",class_" << c;
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.name << ',' << row.overall_accuracy << ',' << row.average_class_accuracy;
        for (double v : row.per_class_accuracy) out << ',' << v;
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

void write_comparison_text(std::ostream& out, const ComparisonTable& table) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::left << std::setw(16) << "run" << std::right << std::setw(10) << "overall" << std::setw(10)
        << "avg-class" << "  per-class\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& row : table.rows) {
        out << std::left << std::setw(16) << row.name << std::right << std::setw(10) << row.overall_accuracy
            << std::setw(10) << row.average_class_accuracy << ' ';
        for (double v : row.per_class_accuracy) out << ' ' << v;
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace cosen
