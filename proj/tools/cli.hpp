#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbl/model.hpp"

namespace qbl::cli {

using json = nlohmann::json;

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kInconclusive = 4 };

struct RunConfig {
    json raw;  // model, params and command options
    ModelSpec model;
    std::uint64_t seed = 0;
    int workers = 1;
};

ModelSpec parse_model(const json& j);
json model_to_json(const ModelSpec& m);

// --set key=value; bare model-parameter names go to params, dotted keys are
// paths into the config object.
void apply_set(json& j, const std::string& assignment);

RunConfig make_config(json j, const std::vector<std::string>& sets, std::uint64_t seed, int workers);
json load_json_file(const std::string& path);

// "start:stop:step", stop included when it lands on the grid.
std::vector<double> parse_range(const std::string& s);

struct Output {
    std::string csv;
    json meta;
    int exit_code = kOk;
};

extern const std::vector<std::string> kCommands;

Output run_command(const std::string& command, const RunConfig& cfg);

std::uint64_t matrix_hash(const Eigen::MatrixXcd& m);

// Full command line handling; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace qbl::cli
