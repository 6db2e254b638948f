#pragma once

#include <filesystem>
#include <string>

#include "cqed/runner/config.hpp"

namespace cqed::runner {

struct RunOutput {
    std::string csv_name;
    std::string csv;
    std::string manifest_name;
    std::string manifest;
};

/// Validates and runs one experiment entirely in memory.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// Writes both files into `dir` through temporaries renamed only once both are
/// complete. Throws std::runtime_error on I/O failure, leaving nothing behind.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

}  // namespace cqed::runner
