#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qforge {

// bad or missing configuration; the CLI maps this to exit code 2
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> experiment_names();

// Runs one registered experiment. Writes CSV data plus a *.meta.json file
// into out_dir (file names derive from the experiment name and a config
// digest, so reruns with the same config overwrite deterministically).
// Returns the metadata document.
nlohmann::json run_experiment(const std::string& name, const nlohmann::json& cfg,
                              const std::string& out_dir, std::uint64_t seed,
                              int workers);

// Aggregates every *.meta.json under dir into dir/summary.json and returns it.
nlohmann::json emit_summary(const std::string& dir);

}  // namespace qforge
