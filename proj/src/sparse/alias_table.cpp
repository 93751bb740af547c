#include "sparsegrow/sparse/alias_table.hpp"

#include <cmath>

namespace sparsegrow {

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw InvalidDistribution("alias table: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw InvalidDistribution("alias table: weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw InvalidDistribution("alias table: weights sum to zero");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are 1 up to rounding.
    for (auto l : large) {
        prob_[l] = 1.0;
        alias_[l] = l;
    }
    for (auto s : small) {
        prob_[s] = 1.0;
        alias_[s] = s;
    }
}

std::uint32_t AliasTable::sample(Rng& rng) const {
    const auto i = static_cast<std::uint32_t>(rng.uniform_index(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
}

std::vector<std::uint32_t> AliasTable::sample(Rng& rng, std::size_t count) const {
    std::vector<std::uint32_t> out(count);
    for (auto& x : out) x = sample(rng);
    return out;
}

std::vector<double> AliasTable::outcome_probabilities() const {
    const double n = static_cast<double>(prob_.size());
    std::vector<double> p(prob_.size(), 0.0);
    for (std::size_t i = 0; i < prob_.size(); ++i) {
        p[i] += prob_[i] / n;
        p[alias_[i]] += (1.0 - prob_[i]) / n;
    }
    return p;
}

}  // namespace sparsegrow
