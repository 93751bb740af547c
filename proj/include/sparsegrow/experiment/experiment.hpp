#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsegrow/data/dataset.hpp"
#include "sparsegrow/dst/flops.hpp"
#include "sparsegrow/dst/prune_grow.hpp"
#include "sparsegrow/experiment/config.hpp"
#include "sparsegrow/nn/model.hpp"

namespace sparsegrow {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_missing_data = 2,
    exit_infeasible_sparsity = 3,
    exit_numeric_failure = 4,
};

/// Map the exception currently being handled to an exit code.
int exit_code_for_current_exception() noexcept;

/// One row of metrics.csv, written after every epoch.
struct MetricsRecord {
    std::size_t epoch = 0;  // 1-based
    std::size_t step = 0;
    double train_loss = 0;
    double train_acc = 0;
    double test_acc = 0;
    double lr = 0;
    std::size_t active_connections = 0;
    std::size_t rounds_done = 0;
    std::size_t rounds_in_epoch = 0;
    double mean_subset = 0;  // mean realized |S| over this epoch's rounds
    double mean_k = 0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,step,train_loss,train_acc,test_acc,lr,active_connections,rounds_done,rounds_in_epoch,mean_subset,mean_k";
std::string metrics_csv_row(const MetricsRecord& m);

inline constexpr const char* kRoundsHeader =
    "step,alpha_t,k,floor_guard_hits,layer,active_before,active_after,sampled,candidates,pruned,grown";

struct TrainingResult {
    std::vector<MetricsRecord> history;
    std::vector<RoundReport> rounds;
    std::size_t initial_active = 0;
    std::size_t steps = 0;
    std::size_t end_step = 0;  // resolved T_end
    Model model;

    const MetricsRecord& final() const { return history.back(); }
};

/// Train and test splits for a config, normalized, with limits applied.
/// Missing files throw DatasetError.
std::pair<Dataset, Dataset> load_datasets(const ExperimentConfig& config);

/// Input geometry and class count implied by the dataset name.
struct DataShape {
    std::size_t channels = 0, height = 0, width = 0, classes = 0, train_size = 0;
};
DataShape data_shape(const ExperimentConfig& config);

ModelSpec model_spec(const ExperimentConfig& config);

/// Run a full experiment. Writes metrics.csv, rounds.csv, config.txt and
/// model.bin into config.output_dir. Steps are numbered from 1; on a
/// prune-grow step (t mod T == 0, t <= T_end) the batch's forward and
/// backward feed the rewiring and no SGD update is taken. Throws
/// DatasetError, InfeasibleSparsity or NumericFailure (non-finite loss).
TrainingResult run_training(const ExperimentConfig& config);

/// Accuracy of a model over a dataset.
double evaluate(const Model& model, const Dataset& data, unsigned threads = 1);

struct SweepRow {
    double gamma = 0;
    std::uint64_t seed = 0;
    double test_acc = 0;
};

struct SweepSummary {
    double gamma = 0;
    std::size_t runs = 0;
    double mean = 0;
    double p95 = 0;  // linear-interpolated 95th percentile
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepSummary> summary;
};

/// One run per (gamma, seed), each in output_dir/gamma_<g>_seed_<s>. Writes
/// sweep.csv and sweep_summary.csv into output_dir. Needs >= 2 gammas.
SweepResult run_gamma_sweep(const ExperimentConfig& config, std::span<const double> gammas,
                            std::span<const std::uint64_t> seeds);

std::string sweep_csv(std::span<const SweepRow> rows);
std::string sweep_summary_csv(std::span<const SweepSummary> rows);

/// Linear-interpolated percentile q in [0, 100].
double percentile(std::vector<double> values, double q);

/// FLOPs rows for the configured architecture (its own schedule and step
/// count) followed by the ResNet-50 table (T = 100, rewiring until the last
/// step, batch 256). Does not train. Writes flops.csv into output_dir when
/// `write` is set.
std::vector<FlopsRow> run_flops_report(const ExperimentConfig& config, std::span<const double> sparsities,
                                       bool write = true);

/// Steps per epoch for a training set of n samples.
std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size);

}  // namespace sparsegrow
