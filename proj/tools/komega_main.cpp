#include <komega/config.hpp>
#include <komega/csv.hpp>
#include <komega/sweep.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

using namespace komega;

namespace {

// One flag store shared by all subcommands; only the parsed one reads it.
struct FlagStore {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    std::vector<long long> N_list;
    double delta = 0.01;
    std::vector<double> deltas;
    double a = 0;
    double omega = 0;
    std::string scheme = "ii";
    bool print = false;
};

std::size_t scheme_index_or_throw(const sweep::SweepResult& result, const std::string& name) {
    for (std::size_t i = 0; i < result.scheme_names.size(); ++i)
        if (result.scheme_names[i] == name) return i;
    throw DomainError("scheme '" + name + "' is not part of the configured sweep");
}

// The sweep command's outlier table defaults to scheme ii when configured,
// otherwise to the first scheme of the sweep.
std::size_t default_outlier_scheme(const sweep::SweepResult& result) {
    for (std::size_t i = 0; i < result.scheme_names.size(); ++i)
        if (result.scheme_names[i] == "ii") return i;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical test for the regular/chaotic dichotomy of attractors"};
    app.require_subcommand(1);
    FlagStore st;

    auto* c_sweep = app.add_subcommand(
        "sweep", "Run the (a, omega, N) sweep; writes results, summary and outlier tables");
    auto* c_probe = app.add_subcommand(
        "probe-delta", "Write log-log displacement curves with regression-range markers");
    auto* c_median =
        app.add_subcommand("median", "Write the per-(a, N) median exponent table");
    auto* c_outliers = app.add_subcommand(
        "outliers", "Write the undecided-percentage table under one interval scheme");

    for (auto* cmd : {c_sweep, c_probe, c_median, c_outliers}) {
        cmd->add_option("--config", st.config_path, "configuration file")->required();
        cmd->add_option("--out", st.out_dir, "output directory (overrides the config)");
        cmd->add_option("--seed", st.seed, "random-stream seed (overrides the config)");
        cmd->add_option("--N-list", st.N_list, "data lengths (overrides the config)")
            ->delimiter(',');
        cmd->add_flag("--print-config", st.print,
                      "echo the effective configuration and exit");
    }
    for (auto* cmd : {c_sweep, c_median, c_outliers}) {
        cmd->add_option("--threads", st.threads,
                        "worker count; the results do not depend on it");
        cmd->add_option("--delta", st.delta, "regression range fraction");
    }
    c_outliers->add_option("--scheme", st.scheme, "interval scheme for the table (i, ii, iii)");
    c_probe->add_option("--a", st.a, "system parameter for the probe");
    c_probe->add_option("--omega", st.omega, "frequency for the probe");
    c_probe->add_option("--delta", st.deltas, "regression fractions to mark")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);  // prints the diagnostic
        return 2;
    }
    CLI::App* sub = app.get_subcommands().front();

    try {
        config::CliConfig cfg = config::load_config(st.config_path);
        if (sub->count("--out")) cfg.output.dir = st.out_dir;
        if (sub->count("--seed")) cfg.sweep.master_seed = st.seed;
        if (sub->count("--N-list")) {
            const std::vector<Index> list(st.N_list.begin(), st.N_list.end());
            if (sub == c_probe)
                cfg.probe.N_list = list;
            else
                cfg.sweep.N_list = list;
        }
        if (sub->count("--delta")) {
            if (sub == c_probe)
                cfg.probe.deltas = st.deltas;
            else
                cfg.sweep.delta = st.delta;
        }
        if (sub == c_probe) {
            if (sub->count("--a")) cfg.probe.a = st.a;
            if (sub->count("--omega")) cfg.probe.omega = st.omega;
        }

        if (st.print) {
            std::cout << config::print_config(cfg);
            return 0;
        }
        for (const auto& note : cfg.notices) std::cerr << "notice: " << note << "\n";

        // Validate before touching the filesystem: a rejected configuration
        // must not leave an output directory behind.
        dynamics::SystemSpec probe_spec = cfg.sweep.system;
        if (sub == c_probe) {
            probe_spec.a = cfg.probe.a;
            dynamics::validate_system(probe_spec);
            if (cfg.probe.N_list.empty()) throw DomainError("probe: N list must not be empty");
            if (cfg.probe.deltas.empty()) throw DomainError("probe: delta list must not be empty");
            for (const double d : cfg.probe.deltas)
                if (!(d > 0) || !(d < 1))
                    throw DomainError("probe: every delta must lie in (0, 1)");
            Index prev = 1;
            for (const Index N : cfg.probe.N_list) {
                if (N <= prev)
                    throw DomainError("probe: N list must be strictly ascending with N >= 2");
                prev = N;
            }
        } else {
            sweep::validate_config(cfg.sweep);
        }

        std::error_code ec;
        std::filesystem::create_directories(cfg.output.dir, ec);
        if (ec)
            throw DomainError("cannot create output directory '" + cfg.output.dir +
                              "': " + ec.message());
        const auto out_path = [&cfg](const char* name) {
            return (std::filesystem::path(cfg.output.dir) / name).string();
        };

        if (sub == c_probe) {
            const dynamics::SystemSpec& spec = probe_spec;
            const Index max_N = *std::max_element(cfg.probe.N_list.begin(), cfg.probe.N_list.end());
            const TimeSeries series =
                dynamics::orbit(spec, dynamics::initial_state(spec, cfg.sweep.master_seed), max_N);
            const auto table =
                sweep::delta_probe(series, cfg.probe.omega, cfg.probe.N_list, cfg.probe.deltas);
            csv::write_file(out_path("probe.csv"), csv::render_probe(table));
            return 0;
        }

        sweep::RunOptions opts;
        opts.threads = st.threads;
        if (cfg.output.checkpoint) opts.checkpoint_path = out_path("checkpoint.txt");
        opts.log = [](const std::string& line) { std::cerr << line << "\n"; };
        const sweep::SweepResult result = sweep::run_sweep(cfg.sweep, opts);

        if (sub == c_sweep) {
            csv::write_file(out_path("results.csv"), csv::render_results(result));
            csv::write_file(out_path("summary.csv"), csv::render_summary(result));
            csv::write_file(out_path("outliers.csv"),
                            csv::render_outliers(result, default_outlier_scheme(result)));
        } else if (sub == c_median) {
            csv::write_file(out_path("median.csv"), csv::render_median(result));
        } else {
            csv::write_file(out_path("outliers.csv"),
                            csv::render_outliers(result, scheme_index_or_throw(result, st.scheme)));
        }
        return 0;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CheckpointError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
