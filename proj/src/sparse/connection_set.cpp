#include "sparsegrow/sparse/connection_set.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

namespace sparsegrow {

ConnectionSet::ConnectionSet(std::size_t n_in, std::size_t n_out) : n_in_(n_in), n_out_(n_out) {
    rebuild_offsets();
}

ConnectionSet::ConnectionSet(std::size_t n_in, std::size_t n_out,
                             std::vector<ConnectionIndex> connections, std::vector<real> weights,
                             std::vector<real> momentum)
    : n_in_(n_in), n_out_(n_out) {
    const std::size_t n = connections.size();
    if (weights.empty()) weights.assign(n, real(0));
    if (momentum.empty()) momentum.assign(n, real(0));
    if (weights.size() != n || momentum.size() != n)
        throw ShapeMismatch("ConnectionSet: weights/momentum length differs from connections");
    if (n > capacity()) throw ShapeMismatch("ConnectionSet: more connections than n_in * n_out");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return storage_less(connections[x], connections[y]);
    });
    connections_.reserve(n);
    weights_.reserve(n);
    momentum_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = connections[order[i]];
        if (c.in_unit >= n_in || c.out_unit >= n_out)
            throw ShapeMismatch("ConnectionSet: connection (" + std::to_string(c.in_unit) + "," +
                                std::to_string(c.out_unit) + ") out of bounds");
        if (!connections_.empty() && connections_.back() == c)
            throw ShapeMismatch("ConnectionSet: duplicate connection (" +
                                std::to_string(c.in_unit) + "," + std::to_string(c.out_unit) + ")");
        connections_.push_back(c);
        weights_.push_back(weights[order[i]]);
        momentum_.push_back(momentum[order[i]]);
    }
    rebuild_offsets();
}

void ConnectionSet::rebuild_offsets() {
    row_offsets_.assign(n_out_ + 1, 0);
    for (const auto& c : connections_) ++row_offsets_[c.out_unit + 1];
    std::partial_sum(row_offsets_.begin(), row_offsets_.end(), row_offsets_.begin());
}

std::ptrdiff_t ConnectionSet::find(ConnectionIndex c) const noexcept {
    if (c.out_unit >= n_out_ || c.in_unit >= n_in_) return -1;
    const auto first = connections_.begin() + row_offsets_[c.out_unit];
    const auto last = connections_.begin() + row_offsets_[c.out_unit + 1];
    const auto it = std::lower_bound(first, last, c, storage_less);
    if (it == last || !(*it == c)) return -1;
    return it - connections_.begin();
}

std::vector<std::size_t> ConnectionSet::fan_in() const {
    std::vector<std::size_t> out(n_out_);
    for (std::size_t b = 0; b < n_out_; ++b) out[b] = row_offsets_[b + 1] - row_offsets_[b];
    return out;
}

void ConnectionSet::rewire(std::span<const std::size_t> pruned_positions,
                           std::span<const ConnectionIndex> grown) {
    std::vector<char> drop(connections_.size(), 0);
    for (auto p : pruned_positions) {
        if (p >= connections_.size() || drop[p])
            throw ShapeMismatch("rewire: invalid or repeated pruned position");
        drop[p] = 1;
    }
    std::vector<ConnectionIndex> added(grown.begin(), grown.end());
    std::sort(added.begin(), added.end(), storage_less);
    for (std::size_t i = 0; i < added.size(); ++i) {
        const auto& c = added[i];
        if (c.in_unit >= n_in_ || c.out_unit >= n_out_)
            throw ShapeMismatch("rewire: grown connection out of bounds");
        if ((i > 0 && added[i - 1] == c) || contains(c))
            throw ShapeMismatch("rewire: grown connection is duplicate or already active");
    }

    // Merge the surviving connections with the grown ones, keeping storage order.
    std::vector<ConnectionIndex> conns;
    std::vector<real> w;
    std::vector<real> m;
    const std::size_t n = connections_.size() - pruned_positions.size() + added.size();
    conns.reserve(n);
    w.reserve(n);
    m.reserve(n);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < connections_.size() || j < added.size()) {
        if (i < connections_.size() && drop[i]) {
            ++i;
            continue;
        }
        const bool take_old =
            j == added.size() || (i < connections_.size() && storage_less(connections_[i], added[j]));
        if (take_old) {
            conns.push_back(connections_[i]);
            w.push_back(weights_[i]);
            m.push_back(momentum_[i]);
            ++i;
        } else {
            conns.push_back(added[j]);
            w.push_back(real(0));
            m.push_back(real(0));
            ++j;
        }
    }
    connections_ = std::move(conns);
    weights_ = std::move(w);
    momentum_ = std::move(m);
    rebuild_offsets();
}

CsrMatrix<real> ConnectionSet::to_csr() const {
    CsrMatrix<real> csr;
    csr.n_rows = n_out_;
    csr.n_cols = n_in_;
    csr.row_offsets = row_offsets_;
    csr.col_indices.reserve(size());
    for (const auto& c : connections_) csr.col_indices.push_back(c.in_unit);
    csr.values = weights_;
    return csr;
}

CooMatrix<real> ConnectionSet::to_coo() const {
    CooMatrix<real> coo;
    coo.n_rows = n_out_;
    coo.n_cols = n_in_;
    coo.row_indices.reserve(size());
    coo.col_indices.reserve(size());
    for (const auto& c : connections_) {
        coo.row_indices.push_back(c.out_unit);
        coo.col_indices.push_back(c.in_unit);
    }
    coo.values = weights_;
    return coo;
}

ConnectionSet ConnectionSet::from_coo(const CooMatrix<real>& coo) {
    std::vector<ConnectionIndex> conns(coo.nnz());
    for (std::size_t i = 0; i < coo.nnz(); ++i) conns[i] = {coo.col_indices[i], coo.row_indices[i]};
    return ConnectionSet(coo.n_cols, coo.n_rows, std::move(conns), coo.values);
}

std::vector<ConnectionIndex> set_difference(std::span<const ConnectionIndex> sampled,
                                            const ConnectionSet& active) {
    const std::size_t n_in = active.n_in();
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(active.size() + sampled.size());
    for (const auto& c : active.connections()) seen.insert(c.linear(n_in));
    std::vector<ConnectionIndex> out;
    out.reserve(sampled.size());
    for (const auto& c : sampled)
        if (seen.insert(c.linear(n_in)).second) out.push_back(c);
    return out;
}

std::vector<ConnectionIndex> inactive_connections(const ConnectionSet& active) {
    std::vector<ConnectionIndex> out;
    out.reserve(active.capacity() - active.size());
    const auto conns = active.connections();
    const auto offsets = active.row_offsets();
    for (std::uint32_t b = 0; b < active.n_out(); ++b) {
        auto i = offsets[b];
        for (std::uint32_t a = 0; a < active.n_in(); ++a) {
            if (i < offsets[b + 1] && conns[i].in_unit == a) {
                ++i;
                continue;
            }
            out.push_back({a, b});
        }
    }
    return out;
}

}  // namespace sparsegrow
