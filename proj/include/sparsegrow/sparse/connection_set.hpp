#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsegrow/common.hpp"
#include "sparsegrow/sparse/formats.hpp"

namespace sparsegrow {

/// A connection (a, b) from input unit a to output unit b of one layer.
struct ConnectionIndex {
    std::uint32_t in_unit = 0;
    std::uint32_t out_unit = 0;

    /// Row-major position in the (out x in) weight matrix: b * n_in + a.
    std::uint64_t linear(std::size_t n_in) const noexcept {
        return std::uint64_t(out_unit) * n_in + in_unit;
    }

    friend bool operator==(const ConnectionIndex&, const ConnectionIndex&) = default;
};

/// Storage order: by output unit, then input unit. Rows of the CSR view are
/// output units, so this order is the CSR order.
inline bool storage_less(const ConnectionIndex& x, const ConnectionIndex& y) noexcept {
    return x.out_unit != y.out_unit ? x.out_unit < y.out_unit : x.in_unit < y.in_unit;
}

/// The active connections A of one layer with their weights and momentum
/// buffers. This is the only representation of a layer's weights; the dense
/// n_in x n_out matrix is never built.
///
/// Invariants: no duplicates, all indices in range, connections sorted by
/// (out_unit, in_unit), and |connections| == |weights| == |momentum|.
class ConnectionSet {
public:
    ConnectionSet() = default;
    ConnectionSet(std::size_t n_in, std::size_t n_out);
    /// Sorts the connections (carrying weights/momentum along) and validates.
    /// Empty weight/momentum vectors are zero-filled.
    ConnectionSet(std::size_t n_in, std::size_t n_out, std::vector<ConnectionIndex> connections,
                  std::vector<real> weights = {}, std::vector<real> momentum = {});

    std::size_t n_in() const noexcept { return n_in_; }
    std::size_t n_out() const noexcept { return n_out_; }
    std::size_t size() const noexcept { return connections_.size(); }
    bool empty() const noexcept { return connections_.empty(); }
    std::uint64_t capacity() const noexcept { return std::uint64_t(n_in_) * n_out_; }

    std::span<const ConnectionIndex> connections() const noexcept { return connections_; }
    std::span<real> weights() noexcept { return weights_; }
    std::span<const real> weights() const noexcept { return weights_; }
    std::span<real> momentum() noexcept { return momentum_; }
    std::span<const real> momentum() const noexcept { return momentum_; }

    /// CSR row offsets over output units (length n_out + 1). Column indices are
    /// connections()[i].in_unit and values are weights()[i].
    std::span<const std::uint32_t> row_offsets() const noexcept { return row_offsets_; }

    /// Position of a connection in storage order, or -1.
    std::ptrdiff_t find(ConnectionIndex c) const noexcept;
    bool contains(ConnectionIndex c) const noexcept { return find(c) >= 0; }

    /// Number of active connections into each output unit.
    std::vector<std::size_t> fan_in() const;

    /// Remove the connections at `pruned_positions` (storage positions) and
    /// insert `grown` with weight 0 and momentum 0. Grown connections must be
    /// inactive and distinct.
    void rewire(std::span<const std::size_t> pruned_positions,
                std::span<const ConnectionIndex> grown);

    CsrMatrix<real> to_csr() const;
    CooMatrix<real> to_coo() const;
    static ConnectionSet from_coo(const CooMatrix<real>& coo);

    friend bool operator==(const ConnectionSet& x, const ConnectionSet& y) {
        return x.n_in_ == y.n_in_ && x.n_out_ == y.n_out_ && x.connections_ == y.connections_ &&
               x.weights_ == y.weights_ && x.momentum_ == y.momentum_;
    }

private:
    void rebuild_offsets();

    std::size_t n_in_ = 0;
    std::size_t n_out_ = 0;
    std::vector<ConnectionIndex> connections_;
    std::vector<real> weights_;
    std::vector<real> momentum_;
    std::vector<std::uint32_t> row_offsets_;
};

/// Connections of `sampled` that are not active, each at most once, in order of
/// first appearance. Hash-based, O(|sampled| + |active|).
std::vector<ConnectionIndex> set_difference(std::span<const ConnectionIndex> sampled,
                                            const ConnectionSet& active);

/// All inactive connections of a layer in storage order. O(n_in * n_out);
/// only the dense-gradient baseline and oracles use it.
std::vector<ConnectionIndex> inactive_connections(const ConnectionSet& active);

}  // namespace sparsegrow
