// Run configuration: strict parsing of the sectioned key-value config format
// into validated domain objects. Unknown sections or keys are errors.
#pragma once

#include "rcp/distribution.hpp"
#include "rcp/mechanism.hpp"
#include "rcp/robust.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rcp {

struct AdversaryConfig {
    std::vector<int> levels = {51, 101, 201}; // sum-axis resolutions, coarse to fine
    std::size_t cap = 1'000'000;
    WorstCaseMethod method = WorstCaseMethod::TwoPointSearch;
};

struct VerifyConfig {
    int n_menus = 1000;
    std::uint64_t seed = 0;
    int samples = 10000;
};

struct OutputConfig {
    std::string format = "table"; // "table" or "csv"
    std::string path;             // empty = stdout
};

struct RunConfig {
    Scenario scenario;
    std::vector<Mechanism> mechanisms;
    std::optional<DiscreteDistribution> distribution;
    AdversaryConfig adversary;
    VerifyConfig verify;
    OutputConfig output;
};

// Parses config text. Sections: [scenario] (required), [mechanism]
// (repeatable), [distribution], [adversary], [verify], [output].
RunConfig parse_config_text(const std::string& text);

// Reads and parses a config file.
RunConfig load_config(const std::string& path);

} // namespace rcp
