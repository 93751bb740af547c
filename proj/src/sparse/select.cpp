#include "sparsegrow/sparse/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparsegrow {

namespace {

template <class Better>
std::vector<std::size_t> select_impl(std::size_t n, std::size_t k, Better better) {
    if (k > n) throw std::out_of_range("select_top_k: k exceeds the number of values");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k < n) std::nth_element(idx.begin(), idx.begin() + k, idx.end(), better);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void check_inputs(std::span<const real> values, std::span<const std::uint64_t> tie_keys) {
    if (!tie_keys.empty() && tie_keys.size() != values.size())
        throw ShapeMismatch("select_top_k: tie key count differs from value count");
    for (real v : values)
        if (std::isnan(v)) throw std::invalid_argument("select_top_k: NaN value");
}

}  // namespace

std::vector<std::size_t> select_top_k(std::span<const real> values, std::size_t k) {
    return select_top_k(values, {}, k);
}

std::vector<std::size_t> select_top_k(std::span<const real> values,
                                      std::span<const std::uint64_t> tie_keys, std::size_t k) {
    check_inputs(values, tie_keys);
    auto key = [&](std::size_t i) { return tie_keys.empty() ? std::uint64_t(i) : tie_keys[i]; };
    return select_impl(values.size(), k, [&](std::size_t x, std::size_t y) {
        if (values[x] != values[y]) return values[x] > values[y];
        return key(x) < key(y);
    });
}

std::vector<std::size_t> select_smallest_magnitude(std::span<const real> values,
                                                   std::span<const std::uint64_t> tie_keys,
                                                   std::size_t k) {
    check_inputs(values, tie_keys);
    auto key = [&](std::size_t i) { return tie_keys.empty() ? std::uint64_t(i) : tie_keys[i]; };
    return select_impl(values.size(), k, [&](std::size_t x, std::size_t y) {
        const real ax = std::abs(values[x]);
        const real ay = std::abs(values[y]);
        if (ax != ay) return ax < ay;
        return key(x) < key(y);
    });
}

}  // namespace sparsegrow
