#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparsegrow/nn/model.hpp"
#include "sparsegrow/sparse/connection_set.hpp"

namespace sparsegrow {

// model.bin layout, all integers and doubles little-endian:
//   "SGMODEL\0"  u32 version  u32 layer_count  u64 step
//   layer table: per layer u32 n_in, u32 n_out, u64 nnz, u32 bias_len
//   per layer: nnz x (u32 in_unit, u32 out_unit, f64 weight), bias_len x f64
inline constexpr std::uint32_t kSidecarVersion = 1;

struct SidecarLayer {
    std::uint32_t n_in = 0;
    std::uint32_t n_out = 0;
    std::vector<ConnectionIndex> connections;
    std::vector<double> weights;
    std::vector<double> bias;
};

struct ModelSnapshot {
    std::uint32_t version = kSidecarVersion;
    std::uint64_t step = 0;
    std::vector<SidecarLayer> layers;
};

ModelSnapshot snapshot(const Model& model, std::uint64_t step);

std::vector<std::uint8_t> encode_sidecar(const ModelSnapshot& s);
/// Throws ParseError on a bad magic, unknown version or truncation.
ModelSnapshot decode_sidecar(std::span<const std::uint8_t> bytes);

void write_sidecar(const std::filesystem::path& path, const Model& model, std::uint64_t step);
ModelSnapshot read_sidecar(const std::filesystem::path& path);

}  // namespace sparsegrow
