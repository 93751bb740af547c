#include "sparsegrow/dst/erdos_renyi.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "sparsegrow/dst/schedule.hpp"

namespace sparsegrow {

std::vector<LayerDims> layer_dims(const ModelSpec& spec) {
    std::vector<LayerDims> out;
    for (const auto& s : spec.layers)
        if (s.parametric()) out.push_back({s.n_in, s.n_out, s.positions()});
    return out;
}

std::uint64_t erdos_renyi_count(std::size_t n_in, std::size_t n_out, double epsilon) {
    if (!(epsilon > 0)) throw InfeasibleSparsity("epsilon must be > 0");
    return ceil_count(epsilon, n_in + n_out);
}

ConnectionSet random_connections(std::size_t n_in, std::size_t n_out, std::uint64_t count, Rng& rng) {
    const std::uint64_t total = std::uint64_t(n_in) * n_out;
    if (count > total)
        throw InfeasibleSparsity("requested " + std::to_string(count) + " connections but the layer has only " +
                                 std::to_string(total));
    // Floyd's sampling without replacement over linear indices b * n_in + a.
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(count);
    std::vector<ConnectionIndex> conns;
    conns.reserve(count);
    for (std::uint64_t j = total - count; j < total; ++j) {
        std::uint64_t t = rng.uniform_index(j + 1);
        if (!chosen.insert(t).second) {
            t = j;
            chosen.insert(t);
        }
        conns.push_back({static_cast<std::uint32_t>(t % n_in), static_cast<std::uint32_t>(t / n_in)});
    }
    return ConnectionSet(n_in, n_out, std::move(conns));
}

ConnectionSet erdos_renyi_init(std::size_t n_in, std::size_t n_out, double epsilon, Rng& rng) {
    return random_connections(n_in, n_out, erdos_renyi_count(n_in, n_out, epsilon), rng);
}

std::vector<std::uint64_t> erdos_renyi_counts(std::span<const LayerDims> dims, double epsilon) {
    std::vector<std::uint64_t> out;
    out.reserve(dims.size());
    for (const auto& d : dims)
        out.push_back(std::min(erdos_renyi_count(d.n_in, d.n_out, epsilon), d.dense()));
    return out;
}

namespace {

std::uint64_t total_count(std::span<const LayerDims> dims, double epsilon) {
    std::uint64_t n = 0;
    for (auto c : erdos_renyi_counts(dims, epsilon)) n += c;
    return n;
}

std::uint64_t target_count(std::span<const LayerDims> dims, double target_sparsity) {
    if (!(target_sparsity >= 0 && target_sparsity < 1))
        throw InfeasibleSparsity("target sparsity must lie in [0, 1)");
    std::uint64_t dense = 0;
    for (const auto& d : dims) dense += d.dense();
    const auto target = static_cast<std::uint64_t>(std::llround((1.0 - target_sparsity) * double(dense)));
    if (target < dims.size())
        throw InfeasibleSparsity("target sparsity " + std::to_string(target_sparsity) +
                                 " leaves fewer connections than parametric layers");
    return target;
}

}  // namespace

double solve_epsilon(std::span<const LayerDims> dims, double target_sparsity) {
    if (dims.empty()) throw InfeasibleSparsity("no parametric layers");
    const std::uint64_t target = target_count(dims, target_sparsity);
    // Every layer saturates once epsilon >= n_in * n_out / (n_in + n_out).
    double hi = 0;
    for (const auto& d : dims) hi = std::max(hi, double(d.dense()) / double(d.n_in + d.n_out));
    double lo = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0) break;
        if (total_count(dims, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double solve_epsilon(const ModelSpec& spec, double target_sparsity) {
    const auto dims = layer_dims(spec);
    return solve_epsilon(dims, target_sparsity);
}

Model erdos_renyi_model(const ModelSpec& spec, double target_sparsity, Rng& rng) {
    const auto dims = layer_dims(spec);
    const double eps = solve_epsilon(dims, target_sparsity);
    const auto counts = erdos_renyi_counts(dims, eps);
    std::vector<ConnectionSet> topo;
    for (std::size_t p = 0; p < dims.size(); ++p)
        topo.push_back(random_connections(dims[p].n_in, dims[p].n_out, counts[p], rng));
    Model m = make_model(spec, std::move(topo));
    init_weights(m, rng);
    return m;
}

Model uniform_sparsity_model(const ModelSpec& spec, double target_sparsity, Rng& rng) {
    const auto dims = layer_dims(spec);
    target_count(dims, target_sparsity);  // validates
    std::vector<ConnectionSet> topo;
    for (const auto& d : dims) {
        const auto n = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround((1.0 - target_sparsity) * double(d.dense()))));
        topo.push_back(random_connections(d.n_in, d.n_out, n, rng));
    }
    Model m = make_model(spec, std::move(topo));
    init_weights(m, rng);
    return m;
}

}  // namespace sparsegrow
