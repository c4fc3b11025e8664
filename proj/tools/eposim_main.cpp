// eposim: E-PON upstream DBA simulator (HSSR and conventional slot-size).
//
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "eposim/config_json.hpp"
#include "eposim/engine.hpp"
#include "eposim/figures.hpp"
#include "eposim/metrics.hpp"
#include "eposim/sweep.hpp"

namespace {

struct RunArgs {
    std::string config_path;
    std::string scheduler;
    unsigned onus = 0;
    double load = -1.0;
    std::string guard;
    std::string duration;
    std::int64_t seed = -1;
    std::string out_dir = ".";
    bool trace = false;
    std::vector<std::string> sweeps;
    unsigned jobs = 1;
};

int do_run(const RunArgs& args) {
    using namespace eposim;

    std::vector<ValidationIssue> issues;
    ScenarioConfig base;
    if (!args.config_path.empty()) {
        base = load_config_file(args.config_path, issues);
    } else if (std::filesystem::exists("eposim.json")) {
        base = load_config_file("eposim.json", issues);
    } else {
        std::cerr << "error: no --config given and no eposim.json in the current "
                     "directory\n"
                  << "usage: eposim run --config CONFIG.json [--scheduler hssr|ss] "
                     "[--onus N] [--load X]\n"
                  << "                  [--guard-time 100ns] [--seed N] [--duration 5s] "
                     "[--out DIR] [--trace]\n"
                  << "                  [--sweep name=SPEC ...] [--jobs K]\n";
        return 1;
    }
    if (!issues.empty()) {
        for (const auto& i : issues)
            std::cerr << "config error [" << i.key << "]: " << i.message << '\n';
        return 1;
    }

    // Flag overrides beat the file.
    try {
        if (!args.scheduler.empty()) apply_parameter(base, "scheduler", args.scheduler);
        if (args.onus > 0) apply_parameter(base, "n_onus", std::to_string(args.onus));
        if (args.load >= 0.0) base.offered_load = args.load;
        if (!args.guard.empty()) base.network.guard_time = parse_time(args.guard);
        if (!args.duration.empty()) base.sim_duration = parse_time(args.duration);
        if (args.seed >= 0) base.seed = static_cast<std::uint64_t>(args.seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    try {
        std::vector<SweepSpec> sweeps;
        for (const auto& s : args.sweeps) sweeps.push_back(parse_sweep(s));
        std::vector<ScenarioConfig> points = expand_sweeps(base, sweeps);
        if (sweeps.empty()) points.front().seed = base.seed; // single point: seed as given

        std::cout << "running " << points.size() << " simulation point"
                  << (points.size() == 1 ? "" : "s") << " with " << args.jobs
                  << " job(s)\n";
        std::vector<MetricsSummary> results = run_sweep(points, args.jobs);

        std::filesystem::create_directories(args.out_dir);
        const std::string csv = to_csv(results);
        const std::string csv_path = args.out_dir + "/results.csv";
        {
            std::ofstream out(csv_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << csv_path << '\n';
                return 1;
            }
            out << csv;
        }
        std::cout << "wrote " << csv_path << '\n';

        for (const auto& r : results) {
            std::printf("%4s n=%2u guard=%5lldns load=%.2f seed=%llu | ", r.scheduler.c_str(),
                        r.n_onus, static_cast<long long>(r.guard_time_ns), r.offered_load,
                        static_cast<unsigned long long>(r.seed));
            const auto& hp = r.delay[0];
            const auto& be = r.delay[1];
            if (hp.count)
                std::printf("hp %8.1fus sd %7.1f | ", hp.mean, hp.stddev());
            else
                std::printf("hp     (none)        | ");
            if (be.count)
                std::printf("be %9.1fus sd %8.1f | ", be.mean, be.stddev());
            else
                std::printf("be     (none)         | ");
            std::printf("be_ratio %.4f\n", r.be_throughput_ratio);
        }

        // Figure data emission is opportunistic on run: it needs a sweep
        // covering load x scheduler; skip quietly when dimensions are missing.
        try {
            emit_figure_data(parse_results_csv(csv), args.out_dir);
            std::cout << "wrote " << args.out_dir << "/fig5_delay_vs_load.dat, "
                      << "fig6_pdv_vs_load.dat, fig7_be_penalty.dat\n";
        } catch (const ConfigError&) {
            std::cout << "figure data skipped (needs a load x scheduler sweep; "
                         "use `eposim figures`)\n";
        }

        if (args.trace) {
            ValidationResult vr = validate(points.front());
            Simulation sim(vr.value(), SimOptions{true});
            sim.run();
            const std::string trace_path = args.out_dir + "/trace.txt";
            std::ofstream out(trace_path, std::ios::binary);
            for (const auto& rec : sim.trace()) out << to_line(rec) << '\n';
            std::cout << "wrote " << trace_path << " (first sweep point)\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const SimError& e) {
        std::cerr << "runtime abort: " << e.what() << '\n';
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"E-PON upstream dynamic bandwidth allocation simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run simulations and write results.csv");
    run->add_option("--config", run_args.config_path, "JSON scenario file");
    run->add_option("--scheduler", run_args.scheduler, "hssr or ss");
    run->add_option("--onus", run_args.onus, "number of ONUs");
    run->add_option("--load", run_args.load, "offered load in (0, 1]");
    run->add_option("--guard-time", run_args.guard, "guard time, e.g. 100ns");
    run->add_option("--seed", run_args.seed, "base random seed");
    run->add_option("--duration", run_args.duration, "simulated time, e.g. 5s");
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_flag("--trace", run_args.trace, "dump an event trace for the first point");
    run->add_option("--sweep", run_args.sweeps,
                    "parameter sweep, e.g. offered_load=0.1:0.9:0.1 (repeatable)");
    run->add_option("--jobs", run_args.jobs, "parallel simulation jobs");

    std::string figures_csv;
    std::string figures_out = ".";
    CLI::App* figures =
        app.add_subcommand("figures", "emit per-figure plot data from a results.csv");
    figures->add_option("csv", figures_csv, "path to results.csv")->required();
    figures->add_option("--out", figures_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return do_run(run_args);
    if (figures->parsed()) {
        try {
            std::filesystem::create_directories(figures_out);
            eposim::emit_figure_data_from_file(figures_csv, figures_out);
            std::cout << "wrote fig5/fig6/fig7 data files to " << figures_out << '\n';
            return 0;
        } catch (const eposim::SimError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 1;
}
