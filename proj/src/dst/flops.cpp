#include "sparsegrow/dst/flops.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace sparsegrow {

std::size_t prune_grow_rounds(const PruneGrowSchedule& schedule, std::size_t steps) {
    if (schedule.period == 0) return 0;
    return std::min(schedule.end_step, steps) / schedule.period;
}

FlopsEstimate flops_estimate(std::span<const LayerDims> dims, std::span<const std::uint64_t> active,
                             GrowthStrategy strategy, const PruneGrowSchedule& schedule,
                             std::size_t batch, std::size_t steps) {
    if (dims.size() != active.size()) throw ShapeMismatch("one active count per layer is required");
    FlopsEstimate est;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const double a = double(active[l]);
        const double pos = double(dims[l].positions);
        const double b_eff = double(batch) * pos;
        est.forward_per_step += 2 * a * b_eff;
        est.backward_per_step += 4 * a * b_eff;
        est.inference_flops += 2 * a * pos;
        switch (strategy) {
            case GrowthStrategy::gse_uniform:
            case GrowthStrategy::gse_grabo:
            case GrowthStrategy::gse_graest: {
                const double s = double(ceil_count(schedule.gamma, active[l]));
                est.overhead_per_round += 2 * s * b_eff;
                if (strategy != GrowthStrategy::gse_uniform)
                    est.overhead_per_round += 2 * double(dims[l].n_in + dims[l].n_out) * b_eff;
                break;
            }
            case GrowthStrategy::rigl_dense:
                est.overhead_per_round += 2 * double(dims[l].dense()) * b_eff;
                break;
            case GrowthStrategy::set_random:
            case GrowthStrategy::static_topology:
                break;
        }
    }
    est.rounds = strategy == GrowthStrategy::static_topology ? 0 : prune_grow_rounds(schedule, steps);
    est.train_flops =
        double(steps) * (est.forward_per_step + est.backward_per_step) + est.overhead_total();
    return est;
}

FlopsEstimate flops_estimate(std::span<const LayerDims> dims, GrowthStrategy strategy,
                             const PruneGrowSchedule& schedule, double sparsity, std::size_t batch,
                             std::size_t steps) {
    const auto counts = erdos_renyi_counts(dims, solve_epsilon(dims, sparsity));
    return flops_estimate(dims, counts, strategy, schedule, batch, steps);
}

FlopsEstimate flops_estimate(const ModelSpec& spec, GrowthStrategy strategy,
                             const PruneGrowSchedule& schedule, double sparsity, std::size_t batch,
                             std::size_t steps) {
    const auto dims = layer_dims(spec);
    return flops_estimate(dims, strategy, schedule, sparsity, batch, steps);
}

std::vector<LayerDims> resnet50_dims() {
    std::vector<LayerDims> d;
    d.push_back({3 * 7 * 7, 64, 112 * 112});  // stem, stride 2
    std::size_t in = 64;
    std::size_t res = 56;  // after the stem's max pool
    struct Stage {
        std::size_t width, blocks, res;
    };
    for (const Stage s : {Stage{64, 3, 56}, Stage{128, 4, 28}, Stage{256, 6, 14}, Stage{512, 3, 7}}) {
        const std::size_t out = 4 * s.width;
        for (std::size_t b = 0; b < s.blocks; ++b) {
            // The first 1x1 of a downsampling block still runs at the old resolution.
            const std::size_t r_in = b == 0 ? res : s.res;
            d.push_back({in, s.width, r_in * r_in});
            d.push_back({s.width * 9, s.width, s.res * s.res});
            d.push_back({s.width, out, s.res * s.res});
            if (b == 0) d.push_back({in, out, s.res * s.res});
            in = out;
        }
        res = s.res;
    }
    d.push_back({2048, 1000, 1});
    return d;
}

std::vector<FlopsRow> flops_report(const std::string& architecture, std::span<const LayerDims> dims,
                                   std::span<const double> sparsities, const PruneGrowSchedule& schedule,
                                   std::size_t batch, std::size_t steps, GrowthStrategy gse) {
    std::vector<FlopsRow> rows;
    for (double s : sparsities) {
        const auto counts = erdos_renyi_counts(dims, solve_epsilon(dims, s));
        auto run = [&](GrowthStrategy g) { return flops_estimate(dims, counts, g, schedule, batch, steps); };
        const auto st = run(GrowthStrategy::static_topology);
        const auto se = run(GrowthStrategy::set_random);
        const auto gs = run(gse);
        const auto rg = run(GrowthStrategy::rigl_dense);
        FlopsRow r;
        r.architecture = architecture;
        r.sparsity = s;
        r.static_train = st.train_flops;
        r.set_train = se.train_flops;
        r.gse_train = gs.train_flops;
        r.rigl_train = rg.train_flops;
        const double base = double(steps) * (gs.forward_per_step + gs.backward_per_step);
        r.gse_overhead_fraction = gs.overhead_total() / base;
        r.set_overhead_fraction = se.overhead_total() / base;
        rows.push_back(r);
    }
    return rows;
}

std::string flops_csv(std::span<const FlopsRow> rows) {
    std::ostringstream out;
    out << "architecture,sparsity,static,set,gse,rigl,gse_rigl_ratio,saving,gse_overhead,set_overhead\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.6e,%.6e,%.6e,%.6e,%.6f,%.6f,%.6f,%.6f\n",
                      r.architecture.c_str(), r.sparsity, r.static_train, r.set_train, r.gse_train,
                      r.rigl_train, r.gse_rigl_ratio(), r.saving(), r.gse_overhead_fraction,
                      r.set_overhead_fraction);
        out << buf;
    }
    return out.str();
}

}  // namespace sparsegrow
