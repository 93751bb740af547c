#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace sparsegrow {

/// When and how much to rewire.
struct PruneGrowSchedule {
    std::size_t period = 1000;    // T: steps between prune-grow rounds
    std::size_t end_step = 1000;  // T_end: last step that may rewire
    double alpha = 0.2;           // initial prune fraction, in (0, 1)
    double gamma = 1.0;           // subset factor, > 0

    void validate() const;
    /// True when t is a prune-grow step: t mod T == 0 and t <= T_end.
    bool is_round(std::size_t t) const noexcept { return t % period == 0 && t <= end_step; }
};

enum class GrowthStrategy { static_topology, set_random, gse_uniform, gse_grabo, gse_graest, rigl_dense };

std::string_view to_string(GrowthStrategy s) noexcept;
/// Accepts static, set_random (or set), gse_uniform, gse_grabo, gse_graest,
/// rigl_dense (or rigl). Throws ConfigError otherwise.
GrowthStrategy parse_strategy(std::string_view name);
bool is_gse(GrowthStrategy s) noexcept;

/// alpha_t = alpha/2 * (1 + cos(pi * t / T_end)) for t in [0, T_end]; nullopt
/// once the schedule has expired (t > T_end).
std::optional<double> cosine_decay(std::size_t t, double alpha, std::size_t end_step);

/// ceil(factor * n), ignoring floating error below 1e-9 relative so that e.g.
/// 0.1 * 30 counts as 3, not 4.
std::size_t ceil_count(double factor, std::size_t n);

}  // namespace sparsegrow
