#include "cosen/config.hpp"

#include "cosen/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cosen {

std::string_view to_string(TrainingMode mode) {
    switch (mode) {
        case TrainingMode::kBaseline:
            return "baseline";
        case TrainingMode::kCoSen:
            return "cosen";
        case TrainingMode::kFixedH:
            return "fixed-h";
        case TrainingMode::kFixedS:
            return "fixed-s";
        case TrainingMode::kFixedM:
            return "fixed-m";
        case TrainingMode::kSmote:
            return "smote";
        case TrainingMode::kRus:
            return "rus";
    }
    return "unknown";
}

TrainingMode parse_training_mode(std::string_view name) {
    for (TrainingMode m : {TrainingMode::kBaseline, TrainingMode::kCoSen, TrainingMode::kFixedH,
                           TrainingMode::kFixedS, TrainingMode::kFixedM, TrainingMode::kSmote,
                           TrainingMode::kRus}) {
        if (name == to_string(m)) return m;
    }
    throw ConfigError("unknown mode '" + std::string(name) +
                      "' (expected baseline, cosen, fixed-h, fixed-s, fixed-m, smote, rus)");
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) {
        throw ConfigError("key '" + std::string(key) + "': '" + s + "' is not a number");
    }
    return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("key '" + std::string(key) + "': '" + s + "' is not a non-negative integer");
    }
    return v;
}

std::vector<std::size_t> to_uint_list(std::string_view key, std::string_view text) {
    std::vector<std::size_t> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(to_uint(key, item));
    return out;
}

std::optional<double> to_optional_double(std::string_view key, std::string_view text) {
    const std::string s = trim(text);
    if (s.empty() || s == "auto") return std::nullopt;
    return to_double(key, s);
}

std::string list(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

// Shortest text that parses back to the same double.
std::string num(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "auto"; }

struct KeySpec {
    std::string section;
    std::string name;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"data", "source",
         [](ExperimentConfig& c, std::string_view v) {
             const std::string s = trim(v);
             if (s == "synthetic") c.source = DataSource::kSynthetic;
             else if (s == "idx") c.source = DataSource::kIdx;
             else if (s == "csv") c.source = DataSource::kCsv;
             else throw ConfigError("source must be synthetic, idx or csv");
         },
         [](const ExperimentConfig& c) -> std::string {
             return c.source == DataSource::kSynthetic ? "synthetic" : c.source == DataSource::kIdx ? "idx" : "csv";
         }},
        {"data", "n_classes", [](ExperimentConfig& c, std::string_view v) { c.n_classes = to_uint("n_classes", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.n_classes); }},
        {"data", "dim", [](ExperimentConfig& c, std::string_view v) { c.dim = to_uint("dim", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.dim); }},
        {"data", "samples_per_class",
         [](ExperimentConfig& c, std::string_view v) { c.samples_per_class = to_uint_list("samples_per_class", v); },
         [](const ExperimentConfig& c) { return list(c.samples_per_class); }},
        {"data", "radius", [](ExperimentConfig& c, std::string_view v) { c.radius = to_double("radius", v); },
         [](const ExperimentConfig& c) { return num(c.radius); }},
        {"data", "images", [](ExperimentConfig& c, std::string_view v) { c.images = trim(v); },
         [](const ExperimentConfig& c) { return c.images.string(); }},
        {"data", "labels", [](ExperimentConfig& c, std::string_view v) { c.labels = trim(v); },
         [](const ExperimentConfig& c) { return c.labels.string(); }},
        {"data", "csv", [](ExperimentConfig& c, std::string_view v) { c.csv = trim(v); },
         [](const ExperimentConfig& c) { return c.csv.string(); }},
        {"data", "label_column", [](ExperimentConfig& c, std::string_view v) { c.label_column = trim(v); },
         [](const ExperimentConfig& c) { return c.label_column; }},
        {"data", "max_per_class",
         [](ExperimentConfig& c, std::string_view v) { c.max_per_class = to_uint("max_per_class", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.max_per_class); }},

        {"protocol", "train_fraction",
         [](ExperimentConfig& c, std::string_view v) { c.train_fraction = to_double("train_fraction", v); },
         [](const ExperimentConfig& c) { return num(c.train_fraction); }},
        {"protocol", "val_fraction",
         [](ExperimentConfig& c, std::string_view v) { c.val_fraction = to_double("val_fraction", v); },
         [](const ExperimentConfig& c) { return num(c.val_fraction); }},
        {"protocol", "retention",
         [](ExperimentConfig& c, std::string_view v) {
             c.retention.clear();
             if (trim(v).empty()) return;
             for (const auto& item : split(v, ',')) {
                 const auto parts = split(item, ':');
                 if (parts.size() != 2) throw ConfigError("retention entries look like class:fraction");
                 c.retention[to_uint("retention", parts[0])] = to_double("retention", parts[1]);
             }
         },
         [](const ExperimentConfig& c) {
             std::ostringstream os;
             bool first = true;
             for (const auto& [cls, r] : c.retention) {
                 os << (first ? "" : ",") << cls << ':' << num(r);
                 first = false;
             }
             return os.str();
         }},
        {"protocol", "retention_odd",
         [](ExperimentConfig& c, std::string_view v) { c.retention_odd = to_optional_double("retention_odd", v); },
         [](const ExperimentConfig& c) { return c.retention_odd ? num(*c.retention_odd) : std::string(); }},
        {"protocol", "retention_even",
         [](ExperimentConfig& c, std::string_view v) { c.retention_even = to_optional_double("retention_even", v); },
         [](const ExperimentConfig& c) { return c.retention_even ? num(*c.retention_even) : std::string(); }},

        {"model", "hidden", [](ExperimentConfig& c, std::string_view v) { c.hidden = to_uint_list("hidden", v); },
         [](const ExperimentConfig& c) { return list(c.hidden); }},
        {"model", "loss", [](ExperimentConfig& c, std::string_view v) { c.loss = parse_loss_kind(trim(v)); },
         [](const ExperimentConfig& c) { return std::string(to_string(c.loss)); }},

        {"sgd", "learning_rate",
         [](ExperimentConfig& c, std::string_view v) { c.learning_rate = to_double("learning_rate", v); },
         [](const ExperimentConfig& c) { return num(c.learning_rate); }},
        {"sgd", "batch_size", [](ExperimentConfig& c, std::string_view v) { c.batch_size = to_uint("batch_size", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.batch_size); }},
        {"sgd", "epochs", [](ExperimentConfig& c, std::string_view v) { c.epochs = to_uint("epochs", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.epochs); }},

        {"costs", "gamma_xi",
         [](ExperimentConfig& c, std::string_view v) { c.costs.gamma_xi = to_double("gamma_xi", v); },
         [](const ExperimentConfig& c) { return num(c.costs.gamma_xi); }},
        {"costs", "mu1", [](ExperimentConfig& c, std::string_view v) { c.costs.mu1 = to_optional_double("mu1", v); },
         [](const ExperimentConfig& c) { return opt(c.costs.mu1); }},
        {"costs", "sigma1",
         [](ExperimentConfig& c, std::string_view v) { c.costs.sigma1 = to_optional_double("sigma1", v); },
         [](const ExperimentConfig& c) { return opt(c.costs.sigma1); }},
        {"costs", "mu2", [](ExperimentConfig& c, std::string_view v) { c.costs.mu2 = to_optional_double("mu2", v); },
         [](const ExperimentConfig& c) { return opt(c.costs.mu2); }},
        {"costs", "sigma2",
         [](ExperimentConfig& c, std::string_view v) { c.costs.sigma2 = to_optional_double("sigma2", v); },
         [](const ExperimentConfig& c) { return opt(c.costs.sigma2); }},
        {"costs", "separability_interval",
         [](ExperimentConfig& c, std::string_view v) {
             c.separability_interval = to_uint("separability_interval", v);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.separability_interval); }},
        {"costs", "val_metric",
         [](ExperimentConfig& c, std::string_view v) { c.val_metric = parse_validation_metric(trim(v)); },
         [](const ExperimentConfig& c) { return std::string(to_string(c.val_metric)); }},

        {"run", "mode", [](ExperimentConfig& c, std::string_view v) { c.mode = parse_training_mode(trim(v)); },
         [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }},
        {"run", "smote_k", [](ExperimentConfig& c, std::string_view v) { c.smote_k = to_uint("smote_k", v); },
         [](const ExperimentConfig& c) { return std::to_string(c.smote_k); }},
        {"run", "output", [](ExperimentConfig& c, std::string_view v) { c.output = trim(v); },
         [](const ExperimentConfig& c) { return c.output.string(); }},
        {"run", "seed", [](ExperimentConfig& c, std::string_view v) { c.seed = to_uint("seed", v); },
         [](const ExperimentConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }},
    };
    return specs;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (source == DataSource::kSynthetic) {
        if (n_classes < 2) throw ConfigError("n_classes must be at least 2");
        if (dim < 2) throw ConfigError("dim must be at least 2");
        if (samples_per_class.size() != 1 && samples_per_class.size() != n_classes) {
            throw ConfigError("samples_per_class needs one value or one per class");
        }
    }
    if (source == DataSource::kIdx && (images.empty() || labels.empty())) {
        throw ConfigError("idx source needs both 'images' and 'labels'");
    }
    if (source == DataSource::kCsv && csv.empty()) throw ConfigError("csv source needs 'csv'");
    for (std::size_t h : hidden) {
        if (h == 0) throw ConfigError("hidden widths must be positive");
    }
    SgdConfig{learning_rate, batch_size, epochs, 0}.validate();
    costs.validate();
    if (separability_interval == 0) throw ConfigError("separability_interval must be positive");
    if (smote_k == 0) throw ConfigError("smote_k must be positive");
    auto unit = [](const std::optional<double>& v) { return !v || (*v > 0.0 && *v <= 1.0); };
    if (!unit(retention_odd) || !unit(retention_even)) throw ConfigError("parity retention must lie in (0, 1]");
}

void apply_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
    for (const auto& spec : key_specs()) {
        if (spec.name == key) {
            spec.set(config, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& spec : key_specs()) k.push_back(spec.name);
        return k;
    }();
    return keys;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        const KeySpec* match = nullptr;
        for (const auto& spec : key_specs()) {
            if (spec.name == key) match = &spec;
        }
        if (!match) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (!section.empty() && section != match->section) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' belongs in [" +
                              match->section + "], not [" + section + "]");
        }
        try {
            match->set(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const ExperimentConfig& config) {
    std::ostringstream os;
    std::string section;
    for (const auto& spec : key_specs()) {
        if (spec.section != section) {
            if (!section.empty()) os << '\n';
            section = spec.section;
            os << '[' << section << "]\n";
        }
        os << spec.name << " = " << spec.get(config) << '\n';
    }
    return os.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace cosen
