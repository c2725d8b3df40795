#pragma once

#include <komega/sweep.hpp>

#include <string>
#include <vector>

namespace komega::config {

// Single-pair diagnostic settings for the log-log curve command.
struct ProbeConfig {
    double a{3.6022};
    double omega{1.9418};
    std::vector<Index> N_list{10000, 100000};
    std::vector<double> deltas{0.01, 0.02, 0.1};
};

struct OutputConfig {
    std::string dir{"out"};
    bool checkpoint{true};
};

struct CliConfig {
    sweep::SweepConfig sweep;
    ProbeConfig probe;
    OutputConfig output;
    // One line per physics-affecting field (delta, transient, dt, stride)
    // that fell back to its default; the CLI echoes these so no such value
    // is ever applied silently.
    std::vector<std::string> notices;
};

// Flat "key = value" text with '#' comments and one [section] per subsystem.
// Unknown sections or keys, duplicates, and malformed values are rejected
// with their line number.
CliConfig parse_config_text(const std::string& text);
CliConfig load_config(const std::string& path);

// Canonical fully explicit rendering.  Parsing it back yields the same
// configuration and no notices.
std::string print_config(const CliConfig& cfg);

}  // namespace komega::config
