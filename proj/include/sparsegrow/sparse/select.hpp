#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

/// Indices of the k largest values, returned in ascending index order.
///
/// Ties are broken by the smaller tie key (by the smaller position when no
/// keys are given), which makes the selected set a total-order function of the
/// input. Uses introselect (std::nth_element): O(n) on average, O(n log n)
/// worst case. NaN values are rejected.
///
/// Throws std::out_of_range when k > values.size().
std::vector<std::size_t> select_top_k(std::span<const real> values, std::size_t k);
std::vector<std::size_t> select_top_k(std::span<const real> values,
                                      std::span<const std::uint64_t> tie_keys, std::size_t k);

/// Indices of the k smallest |values|, same tie rule. Used for magnitude pruning.
std::vector<std::size_t> select_smallest_magnitude(std::span<const real> values,
                                                   std::span<const std::uint64_t> tie_keys,
                                                   std::size_t k);

}  // namespace sparsegrow
