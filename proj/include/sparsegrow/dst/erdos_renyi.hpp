#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/nn/model.hpp"
#include "sparsegrow/sparse/connection_set.hpp"

namespace sparsegrow {

/// Weight-matrix shape of one parametric layer. positions is the number of
/// output positions per sample (1 for feedforward layers), used for FLOPs.
struct LayerDims {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::size_t positions = 1;

    std::uint64_t dense() const noexcept { return std::uint64_t(n_in) * n_out; }
};

std::vector<LayerDims> layer_dims(const ModelSpec& spec);

/// ceil(epsilon * (n_in + n_out)).
std::uint64_t erdos_renyi_count(std::size_t n_in, std::size_t n_out, double epsilon);

/// Random bipartite layer with exactly ceil(epsilon * (n_in + n_out)) distinct
/// connections drawn uniformly without replacement (Floyd's algorithm, O(|A|)
/// expected). Weights are zero. Throws InfeasibleSparsity when the count
/// exceeds n_in * n_out.
ConnectionSet erdos_renyi_init(std::size_t n_in, std::size_t n_out, double epsilon, Rng& rng);

/// Exactly `count` distinct connections drawn uniformly.
ConnectionSet random_connections(std::size_t n_in, std::size_t n_out, std::uint64_t count, Rng& rng);

/// Per-layer active counts min(ceil(epsilon * (n_in + n_out)), n_in * n_out).
std::vector<std::uint64_t> erdos_renyi_counts(std::span<const LayerDims> dims, double epsilon);

/// Smallest epsilon whose clamped per-layer counts sum to at least
/// round((1 - s) * sum n_in * n_out). Bisection over epsilon. Throws
/// InfeasibleSparsity when s is outside [0, 1) or the budget cannot give every
/// layer one connection.
double solve_epsilon(std::span<const LayerDims> dims, double target_sparsity);
double solve_epsilon(const ModelSpec& spec, double target_sparsity);

/// Erdos-Renyi model at the target sparsity with He-style sparse init.
Model erdos_renyi_model(const ModelSpec& spec, double target_sparsity, Rng& rng);

/// Same global budget but every layer gets the same density.
Model uniform_sparsity_model(const ModelSpec& spec, double target_sparsity, Rng& rng);

}  // namespace sparsegrow
