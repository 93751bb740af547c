#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

/// Walker/Vose alias table: O(n) construction, O(1) per draw.
///
/// Each bucket i keeps the probability prob[i] of returning i itself and an
/// alias index returned otherwise. Built with Vose's two-worklist method, which
/// stays stable when the input is nearly uniform.
class AliasTable {
public:
    /// Throws InvalidDistribution for empty, negative, non-finite or all-zero
    /// weights.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return prob_.size(); }
    std::span<const double> prob() const noexcept { return prob_; }
    std::span<const std::uint32_t> alias() const noexcept { return alias_; }

    std::uint32_t sample(Rng& rng) const;
    std::vector<std::uint32_t> sample(Rng& rng, std::size_t count) const;

    /// Exact probability of each outcome implied by the table.
    std::vector<double> outcome_probabilities() const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

inline AliasTable build_alias_table(std::span<const double> weights) { return AliasTable(weights); }

inline std::vector<std::uint32_t> alias_sample(const AliasTable& table, Rng& rng, std::size_t count) {
    return table.sample(rng, count);
}

}  // namespace sparsegrow
