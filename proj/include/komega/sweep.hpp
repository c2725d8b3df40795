#pragma once

#include <komega/classify.hpp>
#include <komega/dynamics.hpp>
#include <komega/spectral.hpp>
#include <komega/types.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace komega::sweep {

// Frequencies are drawn strictly inside this window; the defaults stay clear
// of the 1/(1-cos w) singularity at 0 and of the mirror point pi.
struct OmegaWindow {
    double lo{0.01};
    double hi{std::numbers::pi - 0.01};
};

struct SweepConfig {
    dynamics::SystemSpec system{};  // parameter a is overridden along the grid
    double a_start{3.5};
    double a_end{4.0};
    double a_step{0.01};
    Index n_omega{100};
    OmegaWindow omega_window{};
    std::vector<Index> N_list;  // strictly ascending data lengths
    double delta{0.01};
    std::vector<classify::IntervalScheme> schemes{classify::standard_schemes()};
    std::uint64_t master_seed{0};
    double threshold_fraction{0.1};
};

void validate_config(const SweepConfig& config);

// Grid a_start, a_start + a_step, ...; the endpoint is included up to a small
// tolerance against representation error in the step.
std::vector<double> parameter_grid(double a_start, double a_end, double a_step);

// Deterministic i.i.d. uniform draws, strictly inside the window.  The same
// list serves every parameter and every data length of a sweep.
std::vector<double> sample_omegas(Index count, const OmegaWindow& window, std::uint64_t seed);

struct ResultRow {
    double a{};
    double omega{};
    Index N{};
    double K{};
    std::vector<classify::Label> labels;  // one per configured scheme
};

struct SummaryEntry {
    Index N{};
    std::string scheme_name;
    classify::SweepSummary summary;
};

struct SweepResult {
    std::vector<double> a_grid;
    std::vector<double> omegas;
    std::vector<Index> N_list;
    std::vector<std::string> scheme_names;
    std::vector<ResultRow> rows;          // (a, omega, N) lexicographic
    std::vector<SummaryEntry> summaries;  // N ascending, schemes in config order
    bool complete{true};                  // false iff stopped early via keep_going
};

struct RunOptions {
    int threads{1};  // <= 0 selects the hardware concurrency
    std::string checkpoint_path;  // empty disables persistence
    std::function<void(const std::string&)> log;  // per-parameter progress lines
    std::function<bool()> keep_going;  // polled between tasks; false stops early
};

// Runs the full (a, omega, N) sweep.  One trajectory per parameter at the
// largest N; smaller lengths are prefixes of it.  Results are independent of
// the worker count and task schedule.  With a checkpoint path set, completed
// (a, N) blocks are persisted as they finish and skipped on the next run.
SweepResult run_sweep(const SweepConfig& config, const RunOptions& options = {});

// Persisted sweep state: fitted K values per completed (a-index, N-index)
// block, keyed to the configuration through a fingerprint.
struct CheckpointState {
    std::uint64_t fingerprint{};
    Index n_omega{};
    std::map<std::pair<Index, Index>, std::vector<double>> blocks;
};

std::uint64_t config_fingerprint(const SweepConfig& config);

// Checkpoint text format: a version line, the fingerprint, n_omega, one
// "block" line per completed (a-index, N-index) with hex-float K values, and
// a trailing CRC-32 line over everything before it.
std::string serialize_checkpoint(const CheckpointState& state);
CheckpointState parse_checkpoint(std::string_view text);

// File round trip; writes go through a temporary file and an atomic rename.
void checkpoint_write(const std::string& path, const CheckpointState& state);
CheckpointState checkpoint_read(const std::string& path);

// One point of the log-log diagnostic curve.  Entries with D(n) = 0 (the
// exact minimum after the positive shift) are omitted.
struct ProbeRow {
    Index N{};
    Index n{};
    double log_n{};
    double log_D{};
};

struct ProbeTable {
    std::vector<double> deltas;
    std::vector<Index> N_list;
    std::vector<ProbeRow> rows;

    // Whether the row's lag falls inside the regression range floor(delta*N).
    bool in_range(const ProbeRow& row, std::size_t delta_idx) const;
};

// Full displacement curves for each data length, with cut-off markers for
// each delta: the visual check that the chosen delta sits inside the linear
// range of the curve.
ProbeTable delta_probe(const TimeSeries& series, double omega, const std::vector<Index>& N_list,
                       const std::vector<double>& deltas);

// Table assembly from an externally supplied curve D(1)..D(len); used for
// synthetic diagnostics.
ProbeTable probe_table_from_curve(Index N, const ArrayXd& D, const std::vector<double>& deltas);

}  // namespace komega::sweep
