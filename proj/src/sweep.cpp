#include <komega/rng.hpp>
#include <komega/sweep.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

namespace komega::sweep {

namespace {

struct TaskError {
    Index a_idx{-1};
    Index w_idx{-1};
    int kind{3};  // 0 domain, 1 numerical, 2 checkpoint, 3 other
    std::string message;

    bool operator<(const TaskError& other) const {
        if (a_idx != other.a_idx) return a_idx < other.a_idx;
        return w_idx < other.w_idx;
    }
};

[[noreturn]] void rethrow_tagged(const TaskError& err, const std::vector<double>& grid,
                                 const std::vector<double>& omegas) {
    char head[96];
    if (err.w_idx >= 0)
        std::snprintf(head, sizeof head, "a=%.17g omega=%.17g: ",
                      grid[static_cast<std::size_t>(err.a_idx)],
                      omegas[static_cast<std::size_t>(err.w_idx)]);
    else
        std::snprintf(head, sizeof head, "a=%.17g: ", grid[static_cast<std::size_t>(err.a_idx)]);
    const std::string msg = head + err.message;
    switch (err.kind) {
        case 0: throw DomainError(msg);
        case 1: throw NumericalError(msg);
        case 2: throw CheckpointError(msg);
        default: throw std::runtime_error(msg);
    }
}

// Runs body(0..count-1) over a small worker pool.  The body must not throw;
// workers pull tasks from a shared counter, so the assignment of tasks to
// threads is arbitrary but the set of completed tasks is not.
void run_parallel(int threads, Index count, const std::function<void(Index)>& body) {
    if (count <= 0) return;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::min<Index>(std::max(threads, 1), count));
    if (threads == 1) {
        for (Index t = 0; t < count; ++t) body(t);
        return;
    }
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int k = 0; k < threads; ++k)
        pool.emplace_back([&] {
            for (Index t = next.fetch_add(1); t < count; t = next.fetch_add(1)) body(t);
        });
    for (auto& th : pool) th.join();
}

void validate_probe_deltas(const std::vector<double>& deltas) {
    if (deltas.empty()) throw DomainError("probe: delta list must not be empty");
    for (const double d : deltas)
        if (!(d > 0) || !(d < 1)) throw DomainError("probe: every delta must lie in (0, 1)");
}

void append_curve_rows(std::vector<ProbeRow>& rows, Index N, const ArrayXd& D) {
    for (Index n = 1; n <= D.size(); ++n) {
        const double d = D[n - 1];
        if (!(d > 0)) continue;  // the shifted minimum is an exact zero
        rows.push_back({N, n, std::log(static_cast<double>(n)), std::log(d)});
    }
}

}  // namespace

void validate_config(const SweepConfig& config) {
    dynamics::validate_system(config.system);
    if (!(config.a_step > 0)) throw DomainError("sweep: a_step must be positive");
    if (!(config.a_end >= config.a_start)) throw DomainError("sweep: a_end must be >= a_start");
    if (config.n_omega < 1) throw DomainError("sweep: n_omega must be >= 1");
    if (config.N_list.empty()) throw DomainError("sweep: N_list must not be empty");
    Index prev = 0;
    for (const Index N : config.N_list) {
        if (N <= prev) throw DomainError("sweep: N_list must be positive and strictly ascending");
        prev = N;
    }
    (void)spectral::detail::regression_cutoff(config.delta, config.N_list.front());
    if (config.schemes.empty()) throw DomainError("sweep: at least one interval scheme is required");
    for (const auto& s : config.schemes)
        (void)classify::make_scheme(s.name, s.I0, s.I1);
    if (!(config.threshold_fraction > 0) || !(config.threshold_fraction < 1))
        throw DomainError("sweep: threshold_fraction must lie in (0, 1)");
    if (!(config.omega_window.lo > 0) || !(config.omega_window.hi < std::numbers::pi) ||
        !(config.omega_window.lo < config.omega_window.hi))
        throw DomainError("sweep: omega window must satisfy 0 < lo < hi < pi");
}

std::vector<double> parameter_grid(double a_start, double a_end, double a_step) {
    if (!(a_step > 0)) throw DomainError("parameter_grid: a_step must be positive");
    if (!(a_end >= a_start)) throw DomainError("parameter_grid: a_end must be >= a_start");
    // The tolerance keeps the intended endpoint on the grid when
    // (a_end - a_start)/a_step lands just under an integer.
    const auto count = static_cast<Index>(std::floor((a_end - a_start) / a_step + 1e-6)) + 1;
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = a_start + static_cast<double>(i) * a_step;
    return grid;
}

std::vector<double> sample_omegas(Index count, const OmegaWindow& window, std::uint64_t seed) {
    if (count < 1) throw DomainError("sample_omegas: count must be >= 1");
    if (!(window.lo < window.hi)) throw DomainError("sample_omegas: empty omega window");
    if (!(window.lo > 0) || !(window.hi < std::numbers::pi))
        throw DomainError("sample_omegas: window must lie inside (0, pi)");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k)
        out[static_cast<std::size_t>(k)] = rng::uniform_open(
            rng::derive(seed, rng::Stream::omega_draw, static_cast<std::uint64_t>(k)),
            window.lo, window.hi);
    return out;
}

SweepResult run_sweep(const SweepConfig& config, const RunOptions& options) {
    validate_config(config);

    SweepResult result;
    result.a_grid = parameter_grid(config.a_start, config.a_end, config.a_step);
    result.omegas = sample_omegas(config.n_omega, config.omega_window, config.master_seed);
    result.N_list = config.N_list;
    for (const auto& s : config.schemes) result.scheme_names.push_back(s.name);

    const auto A = static_cast<Index>(result.a_grid.size());
    const Index W = config.n_omega;
    const auto NN = static_cast<Index>(config.N_list.size());
    const Index N_max = config.N_list.back();

    CheckpointState state;
    state.fingerprint = config_fingerprint(config);
    state.n_omega = W;
    const bool persist = !options.checkpoint_path.empty();
    if (persist && std::filesystem::exists(options.checkpoint_path)) {
        CheckpointState loaded = checkpoint_read(options.checkpoint_path);
        if (loaded.fingerprint != state.fingerprint)
            throw CheckpointError("checkpoint belongs to a different configuration");
        if (loaded.n_omega != W) throw CheckpointError("checkpoint n_omega mismatch");
        state.blocks = std::move(loaded.blocks);
    }

    // Slot table: one K per (a, omega, N), NaN meaning not yet computed.
    std::vector<double> K(static_cast<std::size_t>(A * W * NN),
                          std::numeric_limits<double>::quiet_NaN());
    const auto slot = [W, NN](Index ai, Index wi, Index Ni) {
        return static_cast<std::size_t>((ai * W + wi) * NN + Ni);
    };
    std::vector<char> block_done(static_cast<std::size_t>(A * NN), 0);
    for (const auto& [key, vals] : state.blocks) {
        const auto [ai, Ni] = key;
        if (ai < 0 || ai >= A || Ni < 0 || Ni >= NN || static_cast<Index>(vals.size()) != W)
            throw CheckpointError("checkpoint block outside the configured grid");
        block_done[static_cast<std::size_t>(ai * NN + Ni)] = 1;
        for (Index wi = 0; wi < W; ++wi) K[slot(ai, wi, Ni)] = vals[static_cast<std::size_t>(wi)];
    }

    std::vector<Index> needed;
    for (Index ai = 0; ai < A; ++ai)
        for (Index Ni = 0; Ni < NN; ++Ni)
            if (!block_done[static_cast<std::size_t>(ai * NN + Ni)]) {
                needed.push_back(ai);
                break;
            }

    std::mutex error_mutex;
    std::vector<TaskError> errors;
    const auto record_error = [&](Index ai, Index wi, int kind, const char* what) {
        std::lock_guard<std::mutex> lock(error_mutex);
        errors.push_back({ai, wi, kind, what});
    };

    // Phase 1: one trajectory per parameter that still has work, plus the
    // observable means of every prefix in N_list.
    std::vector<TimeSeries> traj(static_cast<std::size_t>(A));
    std::vector<ArrayXd> means(static_cast<std::size_t>(A));
    run_parallel(options.threads, static_cast<Index>(needed.size()), [&](Index t) {
        const Index ai = needed[static_cast<std::size_t>(t)];
        try {
            dynamics::SystemSpec spec = config.system;
            spec.a = result.a_grid[static_cast<std::size_t>(ai)];
            const dynamics::StateVector x0 = dynamics::initial_state(spec, config.master_seed);
            traj[static_cast<std::size_t>(ai)] = dynamics::orbit(spec, x0, N_max);
            means[static_cast<std::size_t>(ai)] =
                spectral::prefix_means(traj[static_cast<std::size_t>(ai)], config.N_list);
        } catch (const DomainError& e) {
            record_error(ai, -1, 0, e.what());
        } catch (const NumericalError& e) {
            record_error(ai, -1, 1, e.what());
        } catch (const std::exception& e) {
            record_error(ai, -1, 3, e.what());
        }
    });
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        rethrow_tagged(errors.front(), result.a_grid, result.omegas);
    }

    // Phase 2: independent (a, omega) units; each computes K at every still
    // missing N from prefixes of one weighted-sum pass.
    struct Task {
        Index ai, wi;
    };
    std::vector<Task> tasks;
    tasks.reserve(needed.size() * static_cast<std::size_t>(W));
    for (const Index ai : needed)
        for (Index wi = 0; wi < W; ++wi) tasks.push_back({ai, wi});

    std::unique_ptr<std::atomic<Index>[]> remaining(new std::atomic<Index>[static_cast<std::size_t>(A * NN)]);
    for (Index i = 0; i < A * NN; ++i)
        remaining[static_cast<std::size_t>(i)].store(block_done[static_cast<std::size_t>(i)] ? 0 : W);
    std::unique_ptr<std::atomic<Index>[]> a_units(new std::atomic<Index>[static_cast<std::size_t>(A)]);
    for (Index i = 0; i < A; ++i) a_units[static_cast<std::size_t>(i)].store(0);
    std::atomic<Index> params_done{A - static_cast<Index>(needed.size())};
    std::atomic<bool> aborted{false};
    std::mutex checkpoint_mutex;
    std::mutex log_mutex;

    run_parallel(options.threads, static_cast<Index>(tasks.size()), [&](Index t) {
        if (aborted.load(std::memory_order_relaxed)) return;
        if (options.keep_going && !options.keep_going()) {
            aborted.store(true, std::memory_order_relaxed);
            return;
        }
        const auto [ai, wi] = tasks[static_cast<std::size_t>(t)];
        const double omega = result.omegas[static_cast<std::size_t>(wi)];
        try {
            const spectral::WeightedSums p =
                spectral::weighted_sums(traj[static_cast<std::size_t>(ai)], omega);
            for (Index Ni = 0; Ni < NN; ++Ni) {
                if (block_done[static_cast<std::size_t>(ai * NN + Ni)]) continue;
                const Index N = config.N_list[static_cast<std::size_t>(Ni)];
                const spectral::SpectralProfile prof = spectral::spectral_profile_from_sums<double>(
                    p.values.head(N + 1), omega, means[static_cast<std::size_t>(ai)][Ni],
                    config.delta);
                const spectral::KEstimate est = spectral::estimate_from_profile(prof);
                K[slot(ai, wi, Ni)] = est.K;
                if (remaining[static_cast<std::size_t>(ai * NN + Ni)].fetch_sub(
                        1, std::memory_order_acq_rel) == 1) {
                    // Last frequency of this (a, N) block: persist it.
                    std::vector<double> block(static_cast<std::size_t>(W));
                    for (Index w2 = 0; w2 < W; ++w2)
                        block[static_cast<std::size_t>(w2)] = K[slot(ai, w2, Ni)];
                    std::lock_guard<std::mutex> lock(checkpoint_mutex);
                    state.blocks[{ai, Ni}] = std::move(block);
                    if (persist) checkpoint_write(options.checkpoint_path, state);
                }
            }
        } catch (const DomainError& e) {
            record_error(ai, wi, 0, e.what());
        } catch (const NumericalError& e) {
            record_error(ai, wi, 1, e.what());
        } catch (const CheckpointError& e) {
            record_error(ai, wi, 2, e.what());
        } catch (const std::exception& e) {
            record_error(ai, wi, 3, e.what());
        }
        if (a_units[static_cast<std::size_t>(ai)].fetch_add(1, std::memory_order_relaxed) + 1 == W &&
            options.log) {
            const Index done = params_done.fetch_add(1, std::memory_order_relaxed) + 1;
            char line[96];
            std::snprintf(line, sizeof line, "a=%g done (%lld/%lld parameters)",
                          result.a_grid[static_cast<std::size_t>(ai)],
                          static_cast<long long>(done), static_cast<long long>(A));
            std::lock_guard<std::mutex> lock(log_mutex);
            options.log(line);
        }
    });
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        rethrow_tagged(errors.front(), result.a_grid, result.omegas);
    }
    if (aborted.load()) {
        result.complete = false;
        return result;
    }

    // Assembly: fixed (a, omega, N) order, independent of the schedule above.
    result.rows.reserve(static_cast<std::size_t>(A * W * NN));
    for (Index ai = 0; ai < A; ++ai)
        for (Index wi = 0; wi < W; ++wi)
            for (Index Ni = 0; Ni < NN; ++Ni) {
                ResultRow row;
                row.a = result.a_grid[static_cast<std::size_t>(ai)];
                row.omega = result.omegas[static_cast<std::size_t>(wi)];
                row.N = config.N_list[static_cast<std::size_t>(Ni)];
                row.K = K[slot(ai, wi, Ni)];
                row.labels.reserve(config.schemes.size());
                for (const auto& scheme : config.schemes)
                    row.labels.push_back(classify::classify_k(row.K, scheme));
                result.rows.push_back(std::move(row));
            }

    for (Index Ni = 0; Ni < NN; ++Ni)
        for (const auto& scheme : config.schemes) {
            std::vector<classify::ParameterCounts> per_parameter;
            per_parameter.reserve(static_cast<std::size_t>(A));
            std::vector<double> Ks(static_cast<std::size_t>(W));
            for (Index ai = 0; ai < A; ++ai) {
                for (Index wi = 0; wi < W; ++wi) Ks[static_cast<std::size_t>(wi)] = K[slot(ai, wi, Ni)];
                per_parameter.push_back(
                    {result.a_grid[static_cast<std::size_t>(ai)], classify::tally(Ks, scheme)});
            }
            SummaryEntry entry;
            entry.N = config.N_list[static_cast<std::size_t>(Ni)];
            entry.scheme_name = scheme.name;
            entry.summary = classify::sweep_summary(std::move(per_parameter), config.threshold_fraction);
            result.summaries.push_back(std::move(entry));
        }
    return result;
}

bool ProbeTable::in_range(const ProbeRow& row, std::size_t delta_idx) const {
    const double delta = deltas.at(delta_idx);
    const auto cut = static_cast<Index>(std::floor(delta * static_cast<double>(row.N) + 1e-9));
    return row.n <= cut;
}

ProbeTable delta_probe(const TimeSeries& series, double omega, const std::vector<Index>& N_list,
                       const std::vector<double>& deltas) {
    validate_probe_deltas(deltas);
    if (N_list.empty()) throw DomainError("probe: N list must not be empty");
    Index prev = 1;  // need N >= 2 so that at least lag 1 exists
    for (const Index N : N_list) {
        if (N <= prev) throw DomainError("probe: N list must be strictly ascending with N >= 2");
        prev = N;
    }
    if (N_list.back() > series.size())
        throw DomainError("probe: largest N exceeds the series length");

    ProbeTable table;
    table.deltas = deltas;
    table.N_list = N_list;

    const spectral::WeightedSums p = spectral::weighted_sums(series, omega);
    const ArrayXd mean_list = spectral::prefix_means(series, N_list);
    for (std::size_t k = 0; k < N_list.size(); ++k) {
        const Index N = N_list[k];
        const ArrayXd S = spectral::structure_function_all_lags<double>(p.values.head(N + 1), N - 1);
        const auto curves = spectral::modified_msd<double>(S, mean_list[static_cast<Index>(k)], omega);
        const double mv = mean_list[static_cast<Index>(k)];
        if (curves.D0.abs().maxCoeff() <= 1e-8 * mv * mv * static_cast<double>(N - 1))
            throw NumericalError("probe: displacement curve is numerically null (degenerate data)");
        append_curve_rows(table.rows, N, curves.D);
    }
    return table;
}

ProbeTable probe_table_from_curve(Index N, const ArrayXd& D, const std::vector<double>& deltas) {
    validate_probe_deltas(deltas);
    if (N < 2 || D.size() < 1 || D.size() > N - 1)
        throw DomainError("probe: curve length must lie in [1, N-1]");
    ProbeTable table;
    table.deltas = deltas;
    table.N_list = {N};
    append_curve_rows(table.rows, N, D);
    return table;
}

}  // namespace komega::sweep
