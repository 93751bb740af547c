#include "sparsegrow/dst/distribution.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "sparsegrow/sparse/alias_table.hpp"

namespace sparsegrow {

SignVector SignVector::sample(std::size_t n, Rng& rng) {
    SignVector v;
    v.s.resize(n);
    for (auto& x : v.s) x = (rng.next_u64() >> 63) ? real(1) : real(-1);
    return v;
}

namespace {

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / double(n)); }

std::vector<double> row_l1(const Matrix& m) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double acc = 0;
        for (real x : m.row(r)) acc += std::abs(double(x));
        out[r] = acc;
    }
    return out;
}

std::vector<double> row_sketch(const Matrix& m, const SignVector& signs) {
    if (signs.size() < m.cols())
        throw ShapeMismatch("sign vector has " + std::to_string(signs.size()) + " entries, batch has " +
                            std::to_string(m.cols()));
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        double acc = 0;
        for (std::size_t i = 0; i < row.size(); ++i) acc += double(row[i]) * double(signs.s[i]);
        out[r] = std::abs(acc);
    }
    return out;
}

// Normalizes in place; returns false (and makes it uniform) when the total is 0.
bool normalize_or_uniform(std::vector<double>& w, const char* side) {
    double total = 0;
    for (double x : w) total += x;
    if (!(total > 0) || !std::isfinite(total)) {
        spdlog::warn("{} distribution has zero mass; falling back to uniform", side);
        w = uniform_weights(w.size());
        return false;
    }
    for (double& x : w) x /= total;
    return true;
}

}  // namespace

UnitDistributions build_distribution(GrowthStrategy strategy, std::size_t n_in, std::size_t n_out,
                                     const LayerActivity* activity, const SignVector* signs) {
    if (n_in == 0 || n_out == 0) throw ShapeMismatch("layer has no units");
    UnitDistributions d;
    switch (strategy) {
        case GrowthStrategy::gse_uniform:
            d.f = uniform_weights(n_in);
            d.g = uniform_weights(n_out);
            return d;
        case GrowthStrategy::gse_grabo:
        case GrowthStrategy::gse_graest:
            break;
        default:
            throw std::invalid_argument("strategy " + std::string(to_string(strategy)) +
                                        " has no sampling distribution");
    }
    if (!activity) throw std::invalid_argument("gradient-informed distributions need the layer activity");
    const Matrix& h = activity->input;
    const Matrix& delta = activity->delta;
    if (h.rows() != n_in || delta.rows() != n_out || h.cols() != delta.cols())
        throw ShapeMismatch("activity shapes do not match the layer");
    if (strategy == GrowthStrategy::gse_grabo) {
        d.f = row_l1(h);
        d.g = row_l1(delta);
    } else {
        if (!signs) throw std::invalid_argument("gse_graest needs a sign vector");
        d.f = row_sketch(h, *signs);
        d.g = row_sketch(delta, *signs);
    }
    d.f_fallback = !normalize_or_uniform(d.f, "input-unit");
    d.g_fallback = !normalize_or_uniform(d.g, "output-unit");
    return d;
}

UnitDistributions build_distribution(GrowthStrategy strategy, const ActivationCache& cache,
                                     std::size_t p, const SignVector* signs) {
    if (strategy == GrowthStrategy::gse_uniform) {
        if (p >= cache.layer_inputs.size()) throw std::out_of_range("no such parametric layer");
        const std::size_t n_out = cache.has_deltas() ? cache.deltas[p].rows() : 0;
        if (n_out == 0) throw std::invalid_argument("cache has no deltas; run backward first");
        return build_distribution(strategy, cache.layer_inputs[p].rows(), n_out);
    }
    if (!cache.has_deltas()) throw std::invalid_argument("cache has no deltas; run backward first");
    const LayerActivity act{cache.layer_inputs.at(p), cache.deltas.at(p)};
    return build_distribution(strategy, act.input.rows(), act.delta.rows(), &act, signs);
}

std::vector<ConnectionIndex> sample_candidates(const UnitDistributions& dist,
                                               const ConnectionSet& active, std::size_t count,
                                               Rng& rng) {
    if (dist.f.size() != active.n_in() || dist.g.size() != active.n_out())
        throw ShapeMismatch("distribution sizes do not match the layer");
    const AliasTable tf(dist.f);
    const AliasTable tg(dist.g);
    std::vector<ConnectionIndex> drawn(count);
    for (auto& c : drawn) {
        c.in_unit = tf.sample(rng);
        c.out_unit = tg.sample(rng);
    }
    return set_difference(drawn, active);
}

}  // namespace sparsegrow
