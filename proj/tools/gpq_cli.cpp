#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gpq/errors.hpp"
#include "gpq/experiments.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalFailure = 2 };

gpq::ExperimentConfig read_config(const std::string &path, const std::string &command)
{
    std::ifstream in(path);
    if (!in)
        throw gpq::ConfigError("cannot open configuration '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception &e) {
        throw gpq::ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw gpq::ConfigError("configuration must be a JSON object");
    if (!doc.contains("experiment"))
        doc["experiment"] = command;
    else if (doc["experiment"] != command)
        throw gpq::ConfigError("configuration is for experiment '" +
                               doc["experiment"].get<std::string>() + "', not '" + command + "'");
    return gpq::parse_config(doc);
}

void emit(const gpq::Table &table, const std::string &format, const std::string &path)
{
    const std::string text = format == "json" ? gpq::to_json(table).dump(2) + "\n" : gpq::to_csv(table);
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw gpq::ConfigError("cannot write output '" + path + "'");
    out << text;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Gaussian process quadrature point sets, transforms and filtering experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format;
    long long seed_offset = 0;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"points", "Emit a unit point set, optionally with weights"},
        {"weights", "Compute GPQ weights and posterior variance for a point set"},
        {"transform", "Moment-match a nonlinear transform of a Gaussian"},
        {"moments", "Run the moment-approximation benchmark"},
        {"ungm", "Run the univariate non-stationary growth model filtering benchmark"},
        {"bot", "Run the bearings-only tracking filtering benchmark"},
    };
    for (const auto &[name, help] : commands) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_path, "Output file (default: config output.path or stdout)");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed-offset", seed_offset, "Added to every configured seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        gpq::ExperimentConfig cfg = read_config(config_path, command);
        for (auto &s : cfg.seeds)
            s = static_cast<std::uint64_t>(static_cast<long long>(s) + seed_offset);
        if (seed_offset != 0)
            cfg.raw["seed_offset"] = seed_offset;
        const std::string fmt = format.empty() ? cfg.format : format;
        const std::string path = out_path.empty() ? cfg.output_path : out_path;

        gpq::Table table;
        bool all_failed = false;
        if (command == "points") {
            table = gpq::run_points(cfg);
        } else if (command == "weights") {
            table = gpq::run_weights(cfg);
        } else if (command == "transform") {
            table = gpq::run_transform(cfg);
        } else if (command == "moments") {
            const gpq::MomentsReport r = gpq::run_moments(cfg);
            table = gpq::to_table(r);
            all_failed = r.all_failed();
        } else {
            const gpq::MonteCarloReport r = command == "ungm" ? gpq::run_ungm(cfg) : gpq::run_bot(cfg);
            table = gpq::to_table(r);
            all_failed = r.all_failed();
        }
        emit(table, fmt, path);
        if (all_failed) {
            std::cerr << "gpq: every method failed\n";
            return kNumericalFailure;
        }
        return kOk;
    } catch (const gpq::ConfigError &e) {
        std::cerr << "gpq: configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "gpq: configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception &e) {
        std::cerr << "gpq: numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
