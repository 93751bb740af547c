#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sparsegrow/dst/schedule.hpp"

namespace sparsegrow {

/// Everything a training run needs. Built by parse_config from a flat
/// `key = value` document; see configs/ for annotated examples.
struct ExperimentConfig {
    // data
    std::string dataset;  // mnist, cifar10, cifar100, synthetic
    std::string data_dir;
    std::size_t train_limit = 0;  // 0 keeps every sample
    std::size_t test_limit = 0;
    bool augment = false;
    std::size_t synthetic_train = 2048;
    std::size_t synthetic_test = 512;
    std::size_t synthetic_classes = 4;
    std::size_t synthetic_dims = 16;
    double synthetic_separation = 3.0;

    // model
    std::string model;  // mlp, small_cnn
    std::vector<std::size_t> hidden{256, 256};
    std::size_t cnn_channels1 = 32;
    std::size_t cnn_channels2 = 64;
    double label_smoothing = 0.0;

    // sparsity
    GrowthStrategy strategy = GrowthStrategy::static_topology;
    double sparsity = 0.0;
    std::string init = "erdos_renyi";  // or uniform
    PruneGrowSchedule schedule;
    bool end_step_given = false;

    // optimization
    double lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double lr_drop_factor = 10.0;
    std::vector<double> lr_drops;  // epochs
    std::size_t batch_size = 128;
    std::size_t epochs = 0;  // 0 picks the dataset default

    std::uint64_t seed = 0;
    std::string output_dir = "runs/default";
    unsigned threads = 1;
    bool deterministic = true;

    /// Last step that may rewire for a run of `steps` total steps: the
    /// configured value if given, else the step of the second learning-rate
    /// drop, else 60% of the run.
    std::size_t resolved_end_step(std::size_t steps_per_epoch) const;

    /// Throws ConfigError for out-of-range values.
    void validate() const;
};

/// Parse a flat typed document: one `key = value` per line, `#` starts a
/// comment, strings may be double-quoted, lists are comma separated. dataset,
/// model, strategy, sparsity and seed are required. Unknown keys, duplicates,
/// missing keys and malformed values throw ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);

/// parse_config on a file, then apply_environment.
ExperimentConfig load_config(const std::filesystem::path& path);

/// SPARSEGROW_SEED (an integer) replaces the configured seed.
void apply_environment(ExperimentConfig& config);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

}  // namespace sparsegrow
