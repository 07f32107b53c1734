// Command-line front end: train, evaluate, gradcheck, protocol, compare.

#include "cosen/checkpoint.hpp"
#include "cosen/config.hpp"
#include "cosen/error.hpp"
#include "cosen/experiment.hpp"
#include "cosen/gradcheck.hpp"
#include "cosen/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

void print_error(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json record;
    record["error"] = kind;
    record["message"] = message;
    std::cerr << record.dump() << std::endl;
}

// Shared --config / --<key> handling for subcommands that take a config.
struct ConfigArgs {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Config file (key = value)");
        for (const auto& key : cosen::config_keys()) {
            app->add_option("--" + key, overrides[key], "Override config key '" + key + "'");
        }
    }

    cosen::ExperimentConfig resolve(CLI::App* app) const {
        cosen::ExperimentConfig config =
            config_path.empty() ? cosen::ExperimentConfig{} : cosen::load_config(config_path);
        for (const auto& [key, value] : overrides) {
            if (app->count("--" + key) > 0) cosen::apply_config_value(config, key, value);
        }
        config.validate();
        return config;
    }
};

int run_train(CLI::App* app, const ConfigArgs& args) {
    const cosen::ExperimentConfig config = args.resolve(app);
    const cosen::ExperimentResult result = cosen::run_experiment(config);
    cosen::write_experiment_outputs(config, result);
    std::cout << std::setprecision(6) << "mode " << result.report.name << ": overall "
              << result.report.overall_accuracy << ", average class " << result.report.average_class_accuracy
              << " -> " << config.output.string() << '\n';
    return 0;
}

int run_evaluate(CLI::App* app, const ConfigArgs& args, const std::string& checkpoint_path,
                 const std::string& report_path) {
    cosen::ExperimentConfig config = args.resolve(app);
    if (!config.seed) throw cosen::ConfigError("evaluate needs the seed the model was trained with");
    const std::filesystem::path ckpt =
        checkpoint_path.empty() ? config.output / "model.ckpt" : std::filesystem::path(checkpoint_path);
    const cosen::Checkpoint checkpoint = cosen::load_checkpoint(ckpt);
    const cosen::DatasetSplit split = cosen::prepare_split(config);
    cosen::MetricsReport report = cosen::evaluate(checkpoint.network, split.test);
    report.name = std::string(cosen::to_string(config.mode));
    if (!report_path.empty()) cosen::save_report(report_path, report);
    cosen::write_report(std::cout, report);
    return 0;
}

int run_protocol(CLI::App* app, const ConfigArgs& args) {
    const cosen::ExperimentConfig config = args.resolve(app);
    const cosen::DatasetSplit split = cosen::prepare_split(config);
    cosen::write_protocol_table(std::cout, split, split.train.n_classes());
    return 0;
}

int run_gradcheck(const cosen::GradCheckOptions& options) {
    bool ok = true;
    for (const auto& s : cosen::run_gradient_checks(options)) {
        std::cout << std::setw(6) << cosen::to_string(s.loss) << ": " << s.configurations << " configs, "
                  << s.parameters_checked << " parameters, max relative error " << std::scientific
                  << std::setprecision(3) << s.max_relative_error << std::defaultfloat << " -> "
                  << (s.passed ? "PASS" : "FAIL") << '\n';
        ok = ok && s.passed;
    }
    return ok ? 0 : 1;
}

int run_compare(const std::vector<std::string>& paths, const std::string& csv_path) {
    std::vector<cosen::MetricsReport> reports;
    for (const auto& p : paths) reports.push_back(cosen::load_report(p));
    const cosen::ComparisonTable table = cosen::compare_runs(reports);
    cosen::write_comparison_text(std::cout, table);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw cosen::ConfigError("cannot write '" + csv_path + "'");
        cosen::write_comparison_csv(out, table);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cost-sensitive neural network training for imbalanced classification"};
    app.require_subcommand(1);

    ConfigArgs train_args;
    auto* train = app.add_subcommand("train", "Train one model and write its report, history and checkpoint");
    train_args.attach(train);
    train->get_option("--seed")->required();

    ConfigArgs eval_args;
    std::string checkpoint_path;
    std::string report_path;
    auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate a checkpoint on the test split");
    eval_args.attach(evaluate);
    evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint file (default <output>/model.ckpt)");
    evaluate->add_option("--report", report_path, "Also write the report here");

    ConfigArgs protocol_args;
    auto* protocol = app.add_subcommand("protocol", "Print per-class split sizes");
    protocol_args.attach(protocol);

    cosen::GradCheckOptions grad_options;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks for every loss");
    gradcheck->add_option("--configs", grad_options.configurations, "Random configurations per loss");
    gradcheck->add_option("--seed", grad_options.seed, "RNG seed");
    gradcheck->add_option("--tolerance", grad_options.tolerance, "Relative error bound");

    std::vector<std::string> report_paths;
    std::string csv_path;
    auto* compare = app.add_subcommand("compare", "Rank reports by average class accuracy");
    compare->add_option("reports", report_paths, "report.txt files")->required();
    compare->add_option("--csv", csv_path, "Also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what());
        return 2;
    }

    try {
        if (*train) return run_train(train, train_args);
        if (*evaluate) return run_evaluate(evaluate, eval_args, checkpoint_path, report_path);
        if (*protocol) return run_protocol(protocol, protocol_args);
        if (*gradcheck) return run_gradcheck(grad_options);
        if (*compare) return run_compare(report_paths, csv_path);
    } catch (const cosen::Error& e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what());
        return 1;
    }
    return 1;
}
