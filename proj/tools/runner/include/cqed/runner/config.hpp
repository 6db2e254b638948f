#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cqed/atom_reservoir.hpp"
#include "cqed/errors.hpp"
#include "cqed/purcell_reservoir.hpp"
#include "cqed/qstate.hpp"

namespace cqed::runner {

/// A config file that cannot be parsed or names a key the runner does not know.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class Experiment { master, trajectories, scheme_a, scheme_b, protection };

std::string to_string(Experiment e);

struct GridConfig {
    double t_final = 1.0;
    double dt = 1e-3;
    std::size_t sample_every = 100;
};

struct EnsembleConfig {
    std::size_t n_traj = 100;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
};

struct OutputConfig {
    std::string file;  // empty: <experiment>.csv
};

/// Field mode (a, a^dag) or (g, e) qubit (sigma-, sigma+) with rates gamma_minus, gamma_plus.
struct RatesConfig {
    std::string system = "field";
    double gamma_minus = 0.1;
    double gamma_plus = 0.0;
    std::size_t n_trunc = 10;
    std::size_t initial = 1;  // basis index of the initial pure state
};

/// Mixing U over the full channel list, index 0 the no-jump channel.
struct UnravellingConfig {
    std::string preset = "none";  // none | balanced
    double phase = 0.0;
    std::optional<Matrix> u;
};

struct SchemeAConfig {
    scheme_a::SchemeAParams params;
    std::string rotation = "identity";  // identity | pi_half_gi
    double phase = 0.0;
    std::string mode = "traced";  // traced | monitored
    std::size_t initial_fock = 0;
};

struct SchemeBConfig {
    scheme_b::SchemeBParams params;
    std::string initial = "e";  // g | e | i
};

struct ProtectionConfig {
    double gamma = 0.1;
    double master_step = 1e-2;
    double threshold = 0.1;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::master;
    GridConfig grid;
    EnsembleConfig ensemble;
    OutputConfig output;
    RatesConfig rates;
    UnravellingConfig unravelling;
    SchemeAConfig scheme_a;
    SchemeBConfig scheme_b;
    ProtectionConfig protection;

    std::string output_file() const;
};

/// Parses INI text. Throws ConfigError naming "[section] key" on unknown keys
/// or malformed values. Sections [manifest] and [results] are ignored so a
/// run manifest can be fed back as a config.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Checks every parameter the chosen experiment will use, including module
/// invariants (rates, truncations, step sizes, unitarity of U to 1e-12).
void validate_config(const ExperimentConfig& cfg);

/// INI text with every key the experiment reads, at full precision.
std::string echo_config(const ExperimentConfig& cfg);

/// "(re, im) (re, im) ..." row-major; the entry count must be a square.
Matrix parse_complex_matrix(const std::string& text);

}  // namespace cqed::runner
