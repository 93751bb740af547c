#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sparsegrow/common.hpp"

namespace sparsegrow {

enum class Split { train, test };

/// Images stored N x C x H x W as float (pixel values in [0, 1] until
/// normalized), one integer label per image.
struct Dataset {
    std::string name;
    Split split = Split::train;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t classes = 0;
    std::vector<float> images;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t sample_units() const noexcept { return channels * height * width; }
    std::span<const float> image(std::size_t i) const {
        return {images.data() + i * sample_units(), sample_units()};
    }
    /// Throws DatasetError if shapes or labels are inconsistent.
    void validate() const;
};

// ---------------------------------------------------------------- IDX (MNIST)

/// Raw IDX array: unsigned-byte payload with its dimensions.
struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;

    friend bool operator==(const IdxArray&, const IdxArray&) = default;
};

/// Parse an IDX byte stream (big-endian header: 0, 0, type, ndim, then ndim
/// uint32 sizes). Only the unsigned-byte type (0x08) is supported. Errors name
/// the byte offset where parsing failed.
IdxArray parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx(const IdxArray& a);

IdxArray read_idx(const std::filesystem::path& path);
void write_idx(const std::filesystem::path& path, const IdxArray& a);

/// Images (N x H x W, scaled to [0, 1]) and labels from a pair of IDX files.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::string name, Split split, std::size_t classes = 10);

/// MNIST from `dir` with the standard file names (train-* / t10k-*).
Dataset load_mnist(const std::filesystem::path& dir, Split split);

// ------------------------------------------------------------- CIFAR binary

/// CIFAR-10 binary records: 1 label byte + 3072 pixel bytes (R, G, B planes
/// of 32 x 32).
Dataset parse_cifar10(std::span<const std::uint8_t> bytes, Split split);
/// CIFAR-100 records: coarse label, fine label, 3072 pixel bytes. The fine
/// label is used.
Dataset parse_cifar100(std::span<const std::uint8_t> bytes, Split split);

Dataset load_cifar10_binary(std::span<const std::filesystem::path> files, Split split);
Dataset load_cifar100_binary(const std::filesystem::path& file, Split split);
/// CIFAR-10 from `dir` (data_batch_1..5.bin or test_batch.bin).
Dataset load_cifar10(const std::filesystem::path& dir, Split split);

/// Append b to a (same geometry).
void concatenate(Dataset& a, const Dataset& b);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace sparsegrow
