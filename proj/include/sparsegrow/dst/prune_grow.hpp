#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/dst/distribution.hpp"
#include "sparsegrow/dst/schedule.hpp"
#include "sparsegrow/nn/model.hpp"
#include "sparsegrow/sparse/connection_set.hpp"

namespace sparsegrow {

/// Outcome of one layer-local round.
struct SubsetSample {
    std::vector<ConnectionIndex> candidates;  // S, inactive and distinct
    std::vector<ConnectionIndex> grown;       // G, subset of S
    std::vector<ConnectionIndex> pruned;      // P, subset of the old A
    std::size_t k = 0;
};

/// Core rewiring rule on one layer given candidates and their gradients:
/// k = min(k_requested, |S|); grow the k largest |grad|, prune the k smallest
/// |theta|; ties go to the smaller linear index b * n_in + a.
SubsetSample apply_prune_grow(ConnectionSet& conn, std::span<const ConnectionIndex> candidates,
                              std::span<const real> candidate_grads, std::size_t k_requested);

/// One GSE round on one layer (uniform, GraBo or GraEst): sample
/// ceil(gamma |A|) pairs, drop active ones, score them by the gathered
/// gradient, and rewire ceil(alpha_t |A|) connections. A no-op when t is not a
/// round. signs may be null for the uniform and GraBo variants.
SubsetSample grow_prune_step(ConnectionSet& conn, const LayerActivity& activity,
                             const PruneGrowSchedule& schedule, GrowthStrategy strategy,
                             std::size_t t, Rng& rng, const SignVector* signs = nullptr);

/// Dense-gradient baseline: S is the full inactive complement scored by the
/// dense gradient h delta^T.
SubsetSample rigl_grow_step(ConnectionSet& conn, const LayerActivity& activity,
                            const PruneGrowSchedule& schedule, std::size_t t);

/// Random growth: k connections drawn uniformly from the inactive set.
SubsetSample set_grow_step(ConnectionSet& conn, const PruneGrowSchedule& schedule, std::size_t t,
                           Rng& rng);

/// Uniform sample of `count` distinct inactive connections.
std::vector<ConnectionIndex> sample_inactive(const ConnectionSet& active, std::size_t count, Rng& rng);

struct LayerRoundStats {
    std::size_t active_before = 0;
    std::size_t active_after = 0;
    std::size_t sampled = 0;     // pairs drawn, ceil(gamma |A_l|)
    std::size_t candidates = 0;  // |S_l| after dedup and removal of active
    std::size_t pruned = 0;
    std::size_t grown = 0;
};

struct RoundReport {
    std::size_t step = 0;
    bool ran = false;
    double alpha_t = 0;
    std::size_t k = 0;
    /// Layers saved from losing their last connection.
    std::size_t floor_guard_hits = 0;
    std::vector<LayerRoundStats> layers;

    std::size_t total_candidates() const;
    std::size_t total_pruned() const;
    std::size_t total_grown() const;
};

/// One prune-grow round over the whole model. Pruning and growing are pooled
/// across layers: the k smallest |theta| over every active set are pruned and
/// the k largest |grad| over every layer's candidates are grown, with
/// k = min(ceil(alpha_t sum |A_l|), sum |S_l|). Candidate sampling stays per
/// layer. The total number of active connections never changes, and no layer
/// is left empty. For set_random the pruned count of each layer is regrown in
/// that layer. The cache must hold this batch's inputs and deltas. static
/// returns a report with ran = false.
RoundReport global_prune_grow(Model& model, const ActivationCache& cache,
                              const PruneGrowSchedule& schedule, GrowthStrategy strategy,
                              std::size_t t, Rng& rng);

}  // namespace sparsegrow
