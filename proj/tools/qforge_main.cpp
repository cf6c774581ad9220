#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qforge/experiments.hpp"

namespace {

// flags override config-file values
nlohmann::json merge_overrides(nlohmann::json cfg,
                               const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw qforge::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        try {
            cfg[key] = nlohmann::json::parse(value);
        } catch (const nlohmann::json::exception&) {
            cfg[key] = value;  // bare string
        }
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qforge: seeded, configuration-driven quantum simulation experiments"};
    app.require_subcommand(1);

    std::string config_file;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir = ".";
    std::vector<std::string> sets;

    std::string summary_dir;
    CLI::App* summary = app.add_subcommand("emit-summary",
                                           "aggregate run metadata into summary.json");
    summary->add_option("dir", summary_dir, "report directory")->required();

    std::vector<CLI::App*> exp_cmds;
    for (const auto& name : qforge::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_file, "JSON config file");
        sub->add_option("--seed", seed, "top-level RNG seed");
        sub->add_option("--workers", workers, "worker pool size");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--set", sets, "config override key=value (repeatable)");
        exp_cmds.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (summary->parsed()) {
            nlohmann::json s = qforge::emit_summary(summary_dir);
            std::cout << s.dump(2) << "\n";
            return 0;
        }
        for (std::size_t i = 0; i < exp_cmds.size(); ++i) {
            if (!exp_cmds[i]->parsed()) continue;
            nlohmann::json cfg = nlohmann::json::object();
            if (!config_file.empty()) {
                std::ifstream f(config_file);
                if (!f.good()) {
                    throw qforge::ConfigError("cannot open config file " + config_file);
                }
                try {
                    cfg = nlohmann::json::parse(f);
                } catch (const nlohmann::json::exception& e) {
                    throw qforge::ConfigError(std::string("config parse error: ") +
                                              e.what());
                }
            }
            cfg = merge_overrides(cfg, sets);
            if (workers < 1) throw qforge::ConfigError("--workers must be >= 1");
            nlohmann::json meta = qforge::run_experiment(
                qforge::experiment_names()[i], cfg, out_dir, seed, workers);
            std::cout << meta.dump(2) << "\n";
            return 0;
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const qforge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical contract violation: " << e.what() << "\n";
        return 3;
    }
}
