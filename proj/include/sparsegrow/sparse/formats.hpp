#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

/// Coordinate-list sparse matrix.
template <class T>
struct CooMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint32_t> row_indices;
    std::vector<std::uint32_t> col_indices;
    std::vector<T> values;

    std::size_t nnz() const noexcept { return values.size(); }
};

/// Compressed sparse row matrix. row_offsets[0] == 0, row_offsets[n_rows] ==
/// nnz, and column indices are strictly increasing within a row.
template <class T>
struct CsrMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint32_t> row_offsets;
    std::vector<std::uint32_t> col_indices;
    std::vector<T> values;

    std::size_t nnz() const noexcept { return values.size(); }

    bool valid() const {
        if (row_offsets.size() != n_rows + 1 || row_offsets.front() != 0 ||
            row_offsets.back() != col_indices.size() || col_indices.size() != values.size())
            return false;
        for (std::size_t r = 0; r < n_rows; ++r) {
            if (row_offsets[r + 1] < row_offsets[r]) return false;
            for (auto i = row_offsets[r]; i < row_offsets[r + 1]; ++i) {
                if (col_indices[i] >= n_cols) return false;
                if (i > row_offsets[r] && col_indices[i] <= col_indices[i - 1]) return false;
            }
        }
        return true;
    }
};

/// COO -> CSR. Entries are sorted by (row, col); duplicates are rejected.
template <class T>
CsrMatrix<T> coo_to_csr(const CooMatrix<T>& coo) {
    const std::size_t nnz = coo.nnz();
    std::vector<std::size_t> order(nnz);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return coo.row_indices[x] != coo.row_indices[y] ? coo.row_indices[x] < coo.row_indices[y]
                                                        : coo.col_indices[x] < coo.col_indices[y];
    });
    CsrMatrix<T> csr;
    csr.n_rows = coo.n_rows;
    csr.n_cols = coo.n_cols;
    csr.row_offsets.assign(coo.n_rows + 1, 0);
    csr.col_indices.reserve(nnz);
    csr.values.reserve(nnz);
    for (std::size_t i = 0; i < nnz; ++i) {
        const auto e = order[i];
        if (coo.row_indices[e] >= coo.n_rows || coo.col_indices[e] >= coo.n_cols)
            throw ShapeMismatch("coo_to_csr: entry out of bounds");
        if (i > 0) {
            const auto p = order[i - 1];
            if (coo.row_indices[p] == coo.row_indices[e] && coo.col_indices[p] == coo.col_indices[e])
                throw ShapeMismatch("coo_to_csr: duplicate entry");
        }
        ++csr.row_offsets[coo.row_indices[e] + 1];
        csr.col_indices.push_back(coo.col_indices[e]);
        csr.values.push_back(coo.values[e]);
    }
    std::partial_sum(csr.row_offsets.begin(), csr.row_offsets.end(), csr.row_offsets.begin());
    return csr;
}

template <class T>
CooMatrix<T> csr_to_coo(const CsrMatrix<T>& csr) {
    CooMatrix<T> coo;
    coo.n_rows = csr.n_rows;
    coo.n_cols = csr.n_cols;
    coo.row_indices.reserve(csr.nnz());
    for (std::size_t r = 0; r < csr.n_rows; ++r)
        for (auto i = csr.row_offsets[r]; i < csr.row_offsets[r + 1]; ++i)
            coo.row_indices.push_back(static_cast<std::uint32_t>(r));
    coo.col_indices = csr.col_indices;
    coo.values = csr.values;
    return coo;
}

}  // namespace sparsegrow
