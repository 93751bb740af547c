#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "sparsegrow/bench/bench.hpp"
#include "sparsegrow/experiment/config.hpp"
#include "sparsegrow/experiment/experiment.hpp"

using namespace sparsegrow;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + path);
    out << text;
}

// Command-line values beat the file; SPARSEGROW_SEED beats both for the seed.
ExperimentConfig load(const std::string& path, const std::string& output_dir) {
    ExperimentConfig c = load_config(path);
    if (!output_dir.empty()) c.output_dir = output_dir;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse training experiments with prune-grow rewiring"};
    app.require_subcommand(1);

    std::string config_path, output_dir;

    auto* train = app.add_subcommand("train", "Train one model from a config file");
    train->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--output", output_dir, "Override output_dir");

    std::vector<double> gammas;
    std::vector<std::uint64_t> seeds;
    auto* sweep = app.add_subcommand("sweep-gamma", "Train once per (gamma, seed) and aggregate accuracy");
    sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--gammas", gammas, "Subset factors")->required()->delimiter(',');
    sweep->add_option("--seeds", seeds, "Seeds (default: the config seed)")->delimiter(',');
    sweep->add_option("-o,--output", output_dir, "Override output_dir");

    std::vector<std::size_t> sizes{1024, 2048, 4096, 8192};
    std::vector<double> bench_sparsities{0.5, 0.8, 0.9, 0.95, 0.98, 0.99};
    std::vector<std::string> formats{"dense", "coo", "csr"};
    std::size_t batch = 128, repeats = 10;
    unsigned threads = 1;
    std::uint64_t bench_seed = 0;
    std::string bench_out = "bench.csv", crossover_out;
    auto* bench = app.add_subcommand("bench", "Time sparse x dense products in dense, COO and CSR formats");
    bench->add_option("--sizes", sizes, "Matrix sides")->delimiter(',');
    bench->add_option("--sparsities", bench_sparsities, "Fractions of zeros")->delimiter(',');
    bench->add_option("--formats", formats, "Formats to time")->delimiter(',');
    bench->add_option("--batch", batch, "Dense operand width");
    bench->add_option("--repeats", repeats, "Timed repetitions per case");
    bench->add_option("--threads", threads, "CSR kernel threads");
    bench->add_option("--seed", bench_seed, "Operand seed");
    bench->add_option("-o,--output", bench_out, "CSV path");
    bench->add_option("--crossover", crossover_out, "Crossover CSV path (default: stdout)");

    std::vector<double> flops_sparsities{0.90, 0.95, 0.98, 0.99};
    auto* flops = app.add_subcommand("flops", "Analytic training FLOPs by strategy");
    flops->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    flops->add_option("--sparsities", flops_sparsities, "Sparsity levels")->delimiter(',');
    flops->add_option("-o,--output", output_dir, "Override output_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every other parse error is a usage error.
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*train) {
            const TrainingResult r = run_training(load(config_path, output_dir));
            std::cout << kMetricsHeader << '\n' << metrics_csv_row(r.final()) << '\n';
        } else if (*sweep) {
            const ExperimentConfig c = load(config_path, output_dir);
            if (seeds.empty()) seeds.push_back(c.seed);
            const SweepResult r = run_gamma_sweep(c, gammas, seeds);
            std::cout << sweep_summary_csv(r.summary);
        } else if (*bench) {
            std::vector<SparseFormat> fs;
            for (const auto& f : formats) fs.push_back(parse_format(f));
            auto cases = bench_grid(sizes, bench_sparsities, fs, batch, repeats, bench_seed);
            for (auto& c : cases) c.threads = threads;
            const auto results = run_bench(cases);
            write_file(bench_out, bench_csv(results));
            const std::string x = crossover_csv(crossover_report(results));
            if (crossover_out.empty())
                std::cout << x;
            else
                write_file(crossover_out, x);
        } else if (*flops) {
            const auto rows = run_flops_report(load(config_path, output_dir), flops_sparsities);
            std::cout << flops_csv(rows);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_code_for_current_exception();
    }
    return exit_ok;
}
