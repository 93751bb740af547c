#include "sparsegrow/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "sparsegrow/common.hpp"
#include "sparsegrow/sparse/formats.hpp"
#include "sparsegrow/sparse/kernels.hpp"

namespace sparsegrow {

std::string to_string(SparseFormat f) {
    switch (f) {
        case SparseFormat::dense: return "dense";
        case SparseFormat::coo: return "coo";
        case SparseFormat::csr: return "csr";
    }
    return "?";
}

SparseFormat parse_format(const std::string& s) {
    if (s == "dense") return SparseFormat::dense;
    if (s == "coo") return SparseFormat::coo;
    if (s == "csr") return SparseFormat::csr;
    throw ConfigError("unknown matrix format '" + s + "'");
}

void BenchCase::validate() const {
    if (!(sparsity >= 0 && sparsity < 1)) throw ConfigError("benchmark sparsity must lie in [0, 1)");
    if (repeats < 3) throw ConfigError("benchmark needs at least 3 repeats");
    if (n_units == 0 || batch == 0) throw ConfigError("benchmark sizes must be >= 1");
}

std::vector<BenchCase> bench_grid(std::span<const std::size_t> sizes, std::span<const double> sparsities,
                                  std::span<const SparseFormat> formats, std::size_t batch, std::size_t repeats,
                                  std::uint64_t seed) {
    std::vector<BenchCase> out;
    for (auto f : formats)
        for (auto n : sizes)
            for (auto s : sparsities) {
                BenchCase c;
                c.format = f;
                c.n_units = n;
                c.batch = batch;
                c.sparsity = s;
                c.repeats = repeats;
                c.seed = seed;
                out.push_back(c);
            }
    return out;
}

namespace {

struct Operands {
    std::vector<float> dense;  // n x n with zeros
    CooMatrix<float> coo;
    CsrMatrix<float> csr;
    std::vector<float> x;          // n x batch
    std::vector<float> reference;  // dense product
};

// Uniform random pattern: each entry is kept independently with probability
// 1 - sparsity. COO entries come out in row-major order.
Operands make_operands(std::size_t n, std::size_t batch, double sparsity, std::uint64_t seed) {
    Rng rng = Rng(seed).fork(n * 1000003 + std::uint64_t(sparsity * 1e6));
    Operands o;
    o.dense.assign(n * n, 0.0f);
    o.coo.n_rows = o.coo.n_cols = n;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (rng.uniform() >= sparsity) {
                const float v = float(rng.normal());
                o.dense[r * n + c] = v;
                o.coo.row_indices.push_back(std::uint32_t(r));
                o.coo.col_indices.push_back(std::uint32_t(c));
                o.coo.values.push_back(v);
            }
    o.csr = coo_to_csr(o.coo);
    o.x.resize(n * batch);
    for (auto& v : o.x) v = float(rng.normal());
    o.reference.resize(n * batch);
    dense_matmul<float>(o.dense, n, n, o.x, batch, o.reference);
    return o;
}

void run_kernel(const BenchCase& c, const Operands& o, std::span<float> out) {
    switch (c.format) {
        case SparseFormat::dense: dense_matmul<float>(o.dense, c.n_units, c.n_units, o.x, c.batch, out); break;
        case SparseFormat::coo: coo_matmul<float>(o.coo, o.x, c.batch, out); break;
        case SparseFormat::csr: csr_matmul<float>(o.csr, o.x, c.batch, out, c.threads); break;
    }
}

double max_rel_error(std::span<const float> got, std::span<const float> want) {
    double e = 0;
    for (std::size_t i = 0; i < got.size(); ++i)
        e = std::max(e, std::abs(double(got[i]) - want[i]) / std::max(1.0, std::abs(double(want[i]))));
    return e;
}

}  // namespace

std::vector<BenchResult> run_bench(std::span<const BenchCase> cases) {
    for (const auto& c : cases) c.validate();

    // Group by operands so large matrices are generated once.
    using Key = std::tuple<std::size_t, std::size_t, double, std::uint64_t>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cases.size(); ++i)
        groups[{cases[i].n_units, cases[i].batch, cases[i].sparsity, cases[i].seed}].push_back(i);

    std::vector<BenchResult> results;
    for (const auto& [key, members] : groups) {
        const auto& [n, batch, sparsity, seed] = key;
        const Operands o = make_operands(n, batch, sparsity, seed);
        std::vector<float> out(n * batch);
        for (std::size_t i : members) {
            const BenchCase& c = cases[i];
            BenchResult r;
            r.config = c;
            r.nnz = o.csr.nnz();
            run_kernel(c, o, out);
            r.max_rel_error = max_rel_error(out, o.reference);
            if (r.max_rel_error > 1e-6)
                throw NumericFailure(to_string(c.format) + " product deviates from the dense product by " +
                                     std::to_string(r.max_rel_error));
            // The checked run doubles as the first warmup run.
            for (std::size_t w = 1; w < c.warmup; ++w) run_kernel(c, o, out);

            std::vector<double> times;
            for (std::size_t rep = 0; rep < c.repeats; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                run_kernel(c, o, out);
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            double mean = 0;
            for (double t : times) mean += t;
            mean /= double(times.size());
            double var = 0;
            for (double t : times) var += (t - mean) * (t - mean);
            r.mean_seconds = mean;
            r.std_seconds = std::sqrt(var / double(times.size() - 1));
            r.flops_effective = mean > 0 ? 2.0 * double(r.nnz) * double(batch) / mean : 0.0;
            results.push_back(r);
        }
    }
    std::sort(results.begin(), results.end(), [](const BenchResult& a, const BenchResult& b) {
        return std::tie(a.config.format, a.config.n_units, a.config.sparsity, a.config.batch) <
               std::tie(b.config.format, b.config.n_units, b.config.sparsity, b.config.batch);
    });
    return results;
}

std::string bench_csv(std::span<const BenchResult> results) {
    std::ostringstream os;
    os.precision(9);
    os << "format,n_units,batch,sparsity,mean_s,std_s\n";
    for (const auto& r : results)
        os << to_string(r.config.format) << ',' << r.config.n_units << ',' << r.config.batch << ','
           << r.config.sparsity << ',' << r.mean_seconds << ',' << r.std_seconds << '\n';
    return os.str();
}

std::vector<Crossover> crossover_report(std::span<const BenchResult> results, SparseFormat format) {
    struct Times {
        std::optional<double> dense, other;
    };
    std::map<std::pair<std::size_t, std::size_t>, std::map<double, Times>> table;  // (n, batch) -> sparsity
    for (const auto& r : results) {
        auto& cell = table[{r.config.n_units, r.config.batch}][r.config.sparsity];
        if (r.config.format == SparseFormat::dense) cell.dense = r.mean_seconds;
        if (r.config.format == format) cell.other = r.mean_seconds;
    }
    std::vector<Crossover> out;
    for (const auto& [size, curve] : table) {
        Crossover x{size.first, size.second, std::nullopt};
        std::vector<std::pair<double, double>> pts;  // (sparsity, ratio)
        for (const auto& [s, t] : curve)
            if (t.dense && t.other && *t.dense > 0) pts.emplace_back(s, *t.other / *t.dense);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].second > 1.0) continue;
            if (i == 0 || pts[i].second == 1.0) {
                x.sparsity = pts[i].first;
            } else {
                const auto [s0, r0] = pts[i - 1];
                const auto [s1, r1] = pts[i];
                x.sparsity = s0 + (r0 - 1.0) / (r0 - r1) * (s1 - s0);
            }
            break;
        }
        out.push_back(x);
    }
    return out;
}

std::string crossover_csv(std::span<const Crossover> rows) {
    std::ostringstream os;
    os << "n_units,batch,crossover_sparsity\n";
    for (const auto& r : rows) {
        os << r.n_units << ',' << r.batch << ',';
        if (r.sparsity)
            os << *r.sparsity;
        else
            os << "none";
        os << '\n';
    }
    return os.str();
}

}  // namespace sparsegrow
