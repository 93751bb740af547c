#include "sparsegrow/dst/schedule.hpp"

#include <cmath>
#include <numbers>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

void PruneGrowSchedule::validate() const {
    if (period < 1) throw ConfigError("update period T must be >= 1");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(gamma > 0)) throw ConfigError("gamma must be > 0");
    if (end_step < period) throw ConfigError("T_end must be >= T");
}

std::string_view to_string(GrowthStrategy s) noexcept {
    switch (s) {
        case GrowthStrategy::static_topology: return "static";
        case GrowthStrategy::set_random: return "set_random";
        case GrowthStrategy::gse_uniform: return "gse_uniform";
        case GrowthStrategy::gse_grabo: return "gse_grabo";
        case GrowthStrategy::gse_graest: return "gse_graest";
        case GrowthStrategy::rigl_dense: return "rigl_dense";
    }
    return "unknown";
}

GrowthStrategy parse_strategy(std::string_view name) {
    if (name == "static") return GrowthStrategy::static_topology;
    if (name == "set_random" || name == "set") return GrowthStrategy::set_random;
    if (name == "gse_uniform") return GrowthStrategy::gse_uniform;
    if (name == "gse_grabo") return GrowthStrategy::gse_grabo;
    if (name == "gse_graest") return GrowthStrategy::gse_graest;
    if (name == "rigl_dense" || name == "rigl") return GrowthStrategy::rigl_dense;
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

bool is_gse(GrowthStrategy s) noexcept {
    return s == GrowthStrategy::gse_uniform || s == GrowthStrategy::gse_grabo ||
           s == GrowthStrategy::gse_graest;
}

std::optional<double> cosine_decay(std::size_t t, double alpha, std::size_t end_step) {
    if (t > end_step) return std::nullopt;
    if (t == end_step) return 0.0;
    if (t == 0) return alpha;
    const double phase = std::numbers::pi * double(t) / double(end_step);
    return alpha / 2.0 * (1.0 + std::cos(phase));
}

std::size_t ceil_count(double factor, std::size_t n) {
    const double x = factor * double(n);
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace sparsegrow
