#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparsegrow {

enum class SparseFormat { dense, coo, csr };

std::string to_string(SparseFormat f);
SparseFormat parse_format(const std::string& s);

/// One timed product: (n x n sparse matrix) times (n x batch dense matrix),
/// single precision.
struct BenchCase {
    SparseFormat format = SparseFormat::csr;
    std::size_t n_units = 1024;
    std::size_t batch = 128;
    double sparsity = 0.9;
    std::size_t repeats = 10;
    std::size_t warmup = 1;
    unsigned threads = 1;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless sparsity is in [0, 1) and repeats >= 3.
    void validate() const;
};

struct BenchResult {
    BenchCase config;
    double mean_seconds = 0;
    double std_seconds = 0;
    double flops_effective = 0;  // 2 nnz batch / mean_seconds
    std::size_t nnz = 0;
    double max_rel_error = 0;  // against the dense product
};

/// Every (format, size, sparsity) combination.
std::vector<BenchCase> bench_grid(std::span<const std::size_t> sizes, std::span<const double> sparsities,
                                  std::span<const SparseFormat> formats, std::size_t batch = 128,
                                  std::size_t repeats = 10, std::uint64_t seed = 0);

/// Times each case with a monotonic clock after its warmup runs. Cases that
/// share (n_units, batch, sparsity, seed) use the same random operands, and
/// each format's output is checked against the dense product before timing;
/// a relative deviation above 1e-6 throws NumericFailure. Results are sorted
/// by (format, n_units, sparsity).
std::vector<BenchResult> run_bench(std::span<const BenchCase> cases);

std::string bench_csv(std::span<const BenchResult> results);

struct Crossover {
    std::size_t n_units = 0;
    std::size_t batch = 0;
    std::optional<double> sparsity;  // empty when the format never wins
};

/// Per size, the sparsity where time(format) / time(dense) first drops to 1,
/// linearly interpolated between grid points. When the format already wins at
/// the lowest measured sparsity, that sparsity is reported.
std::vector<Crossover> crossover_report(std::span<const BenchResult> results,
                                        SparseFormat format = SparseFormat::csr);

std::string crossover_csv(std::span<const Crossover> rows);

}  // namespace sparsegrow
