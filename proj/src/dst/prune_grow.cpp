#include "sparsegrow/dst/prune_grow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "sparsegrow/sparse/kernels.hpp"
#include "sparsegrow/sparse/select.hpp"

namespace sparsegrow {

namespace {

std::vector<std::uint64_t> linear_keys(std::span<const ConnectionIndex> conns, std::size_t n_in) {
    std::vector<std::uint64_t> keys(conns.size());
    for (std::size_t i = 0; i < conns.size(); ++i) keys[i] = conns[i].linear(n_in);
    return keys;
}

std::vector<real> magnitudes(std::span<const real> v) {
    std::vector<real> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}

// alpha_t for a round at step t, or nullopt when t is not a round.
std::optional<double> round_alpha(const PruneGrowSchedule& schedule, std::size_t t) {
    if (!schedule.is_round(t)) return std::nullopt;
    return cosine_decay(t, schedule.alpha, schedule.end_step);
}

std::vector<real> dense_candidate_grads(std::span<const ConnectionIndex> candidates,
                                        const LayerActivity& activity) {
    const Matrix dense = dense_weight_gradient(activity.input, activity.delta);
    std::vector<real> grads(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        grads[i] = dense(candidates[i].out_unit, candidates[i].in_unit);
    return grads;
}

}  // namespace

SubsetSample apply_prune_grow(ConnectionSet& conn, std::span<const ConnectionIndex> candidates,
                              std::span<const real> candidate_grads, std::size_t k_requested) {
    if (candidates.size() != candidate_grads.size())
        throw ShapeMismatch("candidate and gradient counts differ");
    SubsetSample out;
    out.candidates.assign(candidates.begin(), candidates.end());
    out.k = std::min({k_requested, candidates.size(), conn.size()});
    if (out.k == 0) return out;

    const auto grow_keys = linear_keys(candidates, conn.n_in());
    const auto grow_mag = magnitudes(candidate_grads);
    for (std::size_t i : select_top_k(grow_mag, grow_keys, out.k)) out.grown.push_back(candidates[i]);

    const auto prune_keys = linear_keys(conn.connections(), conn.n_in());
    const auto pruned_pos = select_smallest_magnitude(conn.weights(), prune_keys, out.k);
    for (std::size_t i : pruned_pos) out.pruned.push_back(conn.connections()[i]);

    conn.rewire(pruned_pos, out.grown);
    return out;
}

SubsetSample grow_prune_step(ConnectionSet& conn, const LayerActivity& activity,
                             const PruneGrowSchedule& schedule, GrowthStrategy strategy,
                             std::size_t t, Rng& rng, const SignVector* signs) {
    if (!is_gse(strategy)) throw std::invalid_argument("grow_prune_step needs a GSE strategy");
    const auto alpha_t = round_alpha(schedule, t);
    if (!alpha_t) return {};
    SignVector local;
    if (strategy == GrowthStrategy::gse_graest && !signs) {
        local = SignVector::sample(activity.input.cols(), rng);
        signs = &local;
    }
    const auto dist = build_distribution(strategy, conn.n_in(), conn.n_out(), &activity, signs);
    const auto candidates = sample_candidates(dist, conn, ceil_count(schedule.gamma, conn.size()), rng);
    const auto grads = gather_connection_grads(candidates, activity.input, activity.delta);
    return apply_prune_grow(conn, candidates, grads, ceil_count(*alpha_t, conn.size()));
}

SubsetSample rigl_grow_step(ConnectionSet& conn, const LayerActivity& activity,
                            const PruneGrowSchedule& schedule, std::size_t t) {
    const auto alpha_t = round_alpha(schedule, t);
    if (!alpha_t) return {};
    const auto candidates = inactive_connections(conn);
    const auto grads = dense_candidate_grads(candidates, activity);
    return apply_prune_grow(conn, candidates, grads, ceil_count(*alpha_t, conn.size()));
}

std::vector<ConnectionIndex> sample_inactive(const ConnectionSet& active, std::size_t count, Rng& rng) {
    const std::uint64_t capacity = active.capacity();
    const std::uint64_t inactive = capacity - active.size();
    if (count > inactive) throw std::invalid_argument("not enough inactive connections");
    std::vector<ConnectionIndex> out;
    out.reserve(count);
    if (count == 0) return out;
    const std::size_t n_in = active.n_in();
    if (2 * std::uint64_t(count) >= inactive) {
        // Dense complement: partial Fisher-Yates over the enumerated set.
        auto pool = inactive_connections(active);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(count);
    while (out.size() < count) {
        const std::uint64_t lin = rng.uniform_index(capacity);
        const ConnectionIndex c{static_cast<std::uint32_t>(lin % n_in), static_cast<std::uint32_t>(lin / n_in)};
        if (active.contains(c) || !taken.insert(lin).second) continue;
        out.push_back(c);
    }
    return out;
}

SubsetSample set_grow_step(ConnectionSet& conn, const PruneGrowSchedule& schedule, std::size_t t,
                           Rng& rng) {
    const auto alpha_t = round_alpha(schedule, t);
    if (!alpha_t) return {};
    SubsetSample out;
    out.k = std::min<std::uint64_t>(ceil_count(*alpha_t, conn.size()), conn.capacity() - conn.size());
    if (out.k == 0) return out;
    // Drawn from the complement of the old active set, so a pruned connection
    // is never regrown in the same round.
    out.grown = sample_inactive(conn, out.k, rng);
    out.candidates = out.grown;
    const auto keys = linear_keys(conn.connections(), conn.n_in());
    const auto pruned_pos = select_smallest_magnitude(conn.weights(), keys, out.k);
    for (std::size_t i : pruned_pos) out.pruned.push_back(conn.connections()[i]);
    conn.rewire(pruned_pos, out.grown);
    return out;
}

std::size_t RoundReport::total_candidates() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.candidates;
    return n;
}

std::size_t RoundReport::total_pruned() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.pruned;
    return n;
}

std::size_t RoundReport::total_grown() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.grown;
    return n;
}

namespace {

constexpr int kLayerShift = 48;

struct Entry {
    std::size_t layer;
    std::size_t index;  // storage position (prune) or candidate index (grow)
    real score;         // |theta| or |grad|
    std::uint64_t key;  // (layer << 48) | linear
};

// Entries ranked "worst first": largest |theta| among prunes, smallest |grad|
// among grows. Mirrors the tie rule of the selection, reversed.
bool worse_prune(const Entry& x, const Entry& y) {
    return x.score != y.score ? x.score > y.score : x.key > y.key;
}
bool worse_grow(const Entry& x, const Entry& y) {
    return x.score != y.score ? x.score < y.score : x.key > y.key;
}

}  // namespace

RoundReport global_prune_grow(Model& model, const ActivationCache& cache,
                              const PruneGrowSchedule& schedule, GrowthStrategy strategy,
                              std::size_t t, Rng& rng) {
    RoundReport report;
    report.step = t;
    if (strategy == GrowthStrategy::static_topology) return report;
    const auto alpha_t = round_alpha(schedule, t);
    if (!alpha_t) return report;
    report.ran = true;
    report.alpha_t = *alpha_t;

    const std::size_t L = model.params.size();
    const bool needs_cache = strategy != GrowthStrategy::set_random;
    if (needs_cache && (!cache.has_deltas() || cache.deltas.size() != L || cache.layer_inputs.size() != L))
        throw std::invalid_argument("global_prune_grow: cache does not hold this model's deltas");

    report.layers.resize(L);
    std::size_t total_active = 0;
    for (std::size_t p = 0; p < L; ++p) {
        report.layers[p].active_before = model.params[p].weights.size();
        total_active += report.layers[p].active_before;
    }
    const std::size_t k_requested = ceil_count(*alpha_t, total_active);

    // Prune pool over every active connection.
    std::vector<Entry> active;
    active.reserve(total_active);
    for (std::size_t p = 0; p < L; ++p) {
        const auto& conn = model.params[p].weights;
        for (std::size_t i = 0; i < conn.size(); ++i)
            active.push_back({p, i, std::abs(conn.weights()[i]),
                              (std::uint64_t(p) << kLayerShift) | conn.connections()[i].linear(conn.n_in())});
    }

    std::vector<std::vector<ConnectionIndex>> candidates(L);
    std::vector<Entry> grow_pool;
    std::size_t k = 0;
    if (strategy == GrowthStrategy::set_random) {
        std::size_t inactive = 0;
        for (const auto& lp : model.params) inactive += lp.weights.capacity() - lp.weights.size();
        k = std::min(k_requested, inactive);
    } else {
        SignVector signs;
        if (strategy == GrowthStrategy::gse_graest) {
            std::size_t b = 0;
            for (const auto& m : cache.layer_inputs) b = std::max(b, m.cols());
            signs = SignVector::sample(b, rng);
        }
        for (std::size_t p = 0; p < L; ++p) {
            const auto& conn = model.params[p].weights;
            const LayerActivity act{cache.layer_inputs[p], cache.deltas[p]};
            std::vector<real> grads;
            if (strategy == GrowthStrategy::rigl_dense) {
                candidates[p] = inactive_connections(conn);
                report.layers[p].sampled = candidates[p].size();
                grads = dense_candidate_grads(candidates[p], act);
            } else {
                const auto dist = build_distribution(strategy, conn.n_in(), conn.n_out(), &act, &signs);
                report.layers[p].sampled = ceil_count(schedule.gamma, conn.size());
                candidates[p] = sample_candidates(dist, conn, report.layers[p].sampled, rng);
                grads = gather_connection_grads(candidates[p], act.input, act.delta);
            }
            report.layers[p].candidates = candidates[p].size();
            for (std::size_t i = 0; i < grads.size(); ++i)
                grow_pool.push_back({p, i, std::abs(grads[i]),
                                     (std::uint64_t(p) << kLayerShift) | candidates[p][i].linear(conn.n_in())});
        }
        k = std::min(k_requested, grow_pool.size());
    }
    k = std::min(k, total_active);

    auto pick = [](const std::vector<Entry>& pool, std::size_t n, bool smallest) {
        std::vector<real> scores(pool.size());
        std::vector<std::uint64_t> keys(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            scores[i] = pool[i].score;
            keys[i] = pool[i].key;
        }
        const auto idx = smallest ? select_smallest_magnitude(scores, keys, n) : select_top_k(scores, keys, n);
        std::vector<Entry> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(pool[i]);
        return out;
    };

    std::vector<Entry> pruned = pick(active, k, true);
    std::vector<Entry> grown;
    if (strategy != GrowthStrategy::set_random) grown = pick(grow_pool, k, false);

    auto per_layer = [L](const std::vector<Entry>& v) {
        std::vector<std::size_t> n(L, 0);
        for (const auto& e : v) ++n[e.layer];
        return n;
    };

    if (strategy == GrowthStrategy::set_random) {
        // Each layer regrows what it lost, so it needs that much free room.
        auto np = per_layer(pruned);
        for (std::size_t p = 0; p < L; ++p) {
            const std::size_t room = model.params[p].weights.capacity() - model.params[p].weights.size();
            while (np[p] > room) {
                auto it = std::min_element(pruned.begin(), pruned.end(), [p](const Entry& x, const Entry& y) {
                    if ((x.layer == p) != (y.layer == p)) return x.layer == p;
                    return worse_prune(x, y);
                });
                pruned.erase(it);
                --np[p];
            }
        }
        k = pruned.size();
    } else {
        // Floor guard: no layer may end up without connections.
        for (;;) {
            const auto np = per_layer(pruned);
            const auto ng = per_layer(grown);
            std::size_t empty = L;
            for (std::size_t p = 0; p < L; ++p)
                if (report.layers[p].active_before - np[p] + ng[p] == 0) {
                    empty = p;
                    break;
                }
            if (empty == L) break;
            auto it = std::min_element(pruned.begin(), pruned.end(), [empty](const Entry& x, const Entry& y) {
                if ((x.layer == empty) != (y.layer == empty)) return x.layer == empty;
                return worse_prune(x, y);
            });
            pruned.erase(it);
            grown.erase(std::min_element(grown.begin(), grown.end(), worse_grow));
            ++report.floor_guard_hits;
            spdlog::warn("step {}: layer {} would lose every connection; keeping one", t, empty);
        }
        k = pruned.size();
    }
    report.k = k;

    for (std::size_t p = 0; p < L; ++p) {
        auto& conn = model.params[p].weights;
        std::vector<std::size_t> prune_pos;
        for (const auto& e : pruned)
            if (e.layer == p) prune_pos.push_back(e.index);
        std::sort(prune_pos.begin(), prune_pos.end());
        std::vector<ConnectionIndex> grow_conn;
        if (strategy == GrowthStrategy::set_random) {
            grow_conn = sample_inactive(conn, prune_pos.size(), rng);
            report.layers[p].candidates = grow_conn.size();
            report.layers[p].sampled = grow_conn.size();
        } else {
            for (const auto& e : grown)
                if (e.layer == p) grow_conn.push_back(candidates[p][e.index]);
        }
        report.layers[p].pruned = prune_pos.size();
        report.layers[p].grown = grow_conn.size();
        conn.rewire(prune_pos, grow_conn);
        report.layers[p].active_after = conn.size();
    }
    return report;
}

}  // namespace sparsegrow
