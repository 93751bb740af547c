#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsegrow/dst/erdos_renyi.hpp"
#include "sparsegrow/dst/schedule.hpp"
#include "sparsegrow/nn/model.hpp"

namespace sparsegrow {

/// Analytic FLOP counts. A multiply-accumulate is 2 FLOPs; top-k, sampling and
/// other bookkeeping count as 0.
struct FlopsEstimate {
    double forward_per_step = 0;   // 2 |A| B_eff summed over layers
    double backward_per_step = 0;  // 4 |A| B_eff
    double overhead_per_round = 0;
    std::size_t rounds = 0;
    double train_flops = 0;      // steps * (fwd + bwd) + rounds * overhead
    double inference_flops = 0;  // per sample

    double overhead_total() const noexcept { return overhead_per_round * double(rounds); }
};

/// Rounds happen at steps t = T, 2T, ... with t <= min(T_end, steps).
std::size_t prune_grow_rounds(const PruneGrowSchedule& schedule, std::size_t steps);

/// Per-round strategy overhead, with B_eff = batch * positions per layer:
///   GSE: 2 ceil(gamma |A_l|) B_eff gathered candidate gradients, plus
///        2 (n_in + n_out) B_eff for the GraBo/GraEst unit scores;
///   RigL: the dense gradient, 2 n_in n_out B_eff;
///   SET and static: 0.
FlopsEstimate flops_estimate(std::span<const LayerDims> dims, std::span<const std::uint64_t> active,
                             GrowthStrategy strategy, const PruneGrowSchedule& schedule,
                             std::size_t batch, std::size_t steps);

/// Same, with Erdos-Renyi active counts at the given sparsity.
FlopsEstimate flops_estimate(std::span<const LayerDims> dims, GrowthStrategy strategy,
                             const PruneGrowSchedule& schedule, double sparsity, std::size_t batch,
                             std::size_t steps);
FlopsEstimate flops_estimate(const ModelSpec& spec, GrowthStrategy strategy,
                             const PruneGrowSchedule& schedule, double sparsity, std::size_t batch,
                             std::size_t steps);

/// Weight layers of ResNet-50 at 224x224 input: every convolution including
/// the projection shortcuts, and the 2048 -> 1000 classifier. Convolutions
/// are expressed as (C_in k k) x C_out matrices applied at H_out W_out
/// positions.
std::vector<LayerDims> resnet50_dims();

struct FlopsRow {
    std::string architecture;
    double sparsity = 0;
    double static_train = 0;
    double set_train = 0;
    double gse_train = 0;
    double rigl_train = 0;
    double gse_overhead_fraction = 0;  // GSE round overhead / (fwd + bwd) total
    double set_overhead_fraction = 0;

    double gse_rigl_ratio() const noexcept { return gse_train / rigl_train; }
    /// Relative saving of GSE over RigL, 1 - ratio.
    double saving() const noexcept { return 1.0 - gse_rigl_ratio(); }
};

/// One row per sparsity. `gse` picks the GSE variant to cost.
std::vector<FlopsRow> flops_report(const std::string& architecture, std::span<const LayerDims> dims,
                                   std::span<const double> sparsities, const PruneGrowSchedule& schedule,
                                   std::size_t batch, std::size_t steps,
                                   GrowthStrategy gse = GrowthStrategy::gse_uniform);

/// CSV with header
/// architecture,sparsity,static,set,gse,rigl,gse_rigl_ratio,saving,gse_overhead,set_overhead
std::string flops_csv(std::span<const FlopsRow> rows);

}  // namespace sparsegrow
