#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace savi {

struct ExperimentConfig {
    std::string subcommand = "simulate";
    std::vector<std::string> pipelines;
    std::string generator = "ber:0.3";
    std::string stop = "run:k=5,target=0";
    std::int64_t runs = 10000;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> horizon;
    int workers = 1;
    std::string out;
    std::string format = "json"; // json | csv
    std::string samplesPath;

    // power / trajectory
    std::string family = "switch"; // switch | markov
    double mu = 0.3;
    std::int64_t period = 100;
    std::vector<double> deltas{0.0, 0.1, 0.2, 0.3, 0.4};
    double alpha = 0.1;
    std::int64_t T = 2000;
    std::vector<std::int64_t> checkpoints;

    // randomized
    std::string procedure = "rtl"; // ltr | ville | rtl
    std::string adjuster = "mix";

    // finance
    std::string csv;
    std::string dateColumn = "date", closeColumn = "close";
    std::string calibStart, calibEnd;
    double q = 0.8;

    // forecast
    std::int64_t h = 3;
    std::string records; // empty: synthetic brier-drift-v1
    std::string combiner = "adjusted";
    std::string calibrator = "mix";
    double lambda = 0.5;
    double gap = 0.3;

    bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& subcommands();

std::string config_to_json(const ExperimentConfig& c, int indent = 2);
// Unknown keys and wrong types are errors; missing keys keep defaults.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& c);

} // namespace savi
