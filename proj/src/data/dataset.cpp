#include "sparsegrow/data/dataset.hpp"

#include <fstream>
#include <iterator>

namespace sparsegrow {

namespace fs = std::filesystem;

void Dataset::validate() const {
    if (images.size() != labels.size() * sample_units())
        throw DatasetError(name + ": image buffer does not match " + std::to_string(labels.size()) + " samples");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || std::size_t(labels[i]) >= classes)
            throw DatasetError(name + ": label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                               " is outside [0, " + std::to_string(classes) + ")");
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
    return std::uint32_t(b[off]) << 24 | std::uint32_t(b[off + 1]) << 16 | std::uint32_t(b[off + 2]) << 8 |
           std::uint32_t(b[off + 3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(std::uint8_t(v >> s));
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw ParseError("IDX: truncated header at offset " + std::to_string(bytes.size()));
    if (bytes[0] != 0 || bytes[1] != 0) throw ParseError("IDX: bad magic number at offset 0");
    if (bytes[2] != 0x08)
        throw ParseError("IDX: unsupported element type code " + std::to_string(bytes[2]) + " at offset 2");
    const std::size_t ndim = bytes[3];
    if (ndim == 0) throw ParseError("IDX: zero dimensions at offset 3");
    if (bytes.size() < 4 + 4 * ndim) throw ParseError("IDX: truncated dimension table at offset 4");
    IdxArray a;
    std::size_t count = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        a.dims.push_back(be32(bytes, 4 + 4 * d));
        count *= a.dims.back();
    }
    const std::size_t off = 4 + 4 * ndim;
    if (bytes.size() - off < count)
        throw ParseError("IDX: payload truncated at offset " + std::to_string(bytes.size()) + ", expected " +
                         std::to_string(off + count) + " bytes");
    if (bytes.size() - off > count)
        throw ParseError("IDX: trailing bytes after offset " + std::to_string(off + count));
    a.data.assign(bytes.begin() + std::ptrdiff_t(off), bytes.end());
    return a;
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& a) {
    std::vector<std::uint8_t> out{0, 0, 0x08, std::uint8_t(a.dims.size())};
    for (auto d : a.dims) put_be32(out, d);
    out.insert(out.end(), a.data.begin(), a.data.end());
    return out;
}

IdxArray read_idx(const fs::path& path) {
    try {
        return parse_idx(read_bytes(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_idx(const fs::path& path, const IdxArray& a) {
    const auto bytes = serialize_idx(a);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

Dataset load_idx(const fs::path& images, const fs::path& labels, std::string name, Split split,
                 std::size_t classes) {
    const auto img = read_idx(images);
    const auto lab = read_idx(labels);
    if (img.dims.size() != 3) throw ParseError(images.string() + ": expected a 3-dimensional image array");
    if (lab.dims.size() != 1) throw ParseError(labels.string() + ": expected a 1-dimensional label array");
    if (img.dims[0] != lab.dims[0])
        throw DatasetError(name + ": " + std::to_string(img.dims[0]) + " images but " +
                           std::to_string(lab.dims[0]) + " labels");
    Dataset d;
    d.name = std::move(name);
    d.split = split;
    d.channels = 1;
    d.height = img.dims[1];
    d.width = img.dims[2];
    d.classes = classes;
    d.images.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) d.images[i] = float(img.data[i]) / 255.0f;
    d.labels.assign(lab.data.begin(), lab.data.end());
    d.validate();
    return d;
}

Dataset load_mnist(const fs::path& dir, Split split) {
    const std::string prefix = split == Split::train ? "train" : "t10k";
    const auto images = dir / (prefix + "-images-idx3-ubyte");
    const auto labels = dir / (prefix + "-labels-idx1-ubyte");
    if (!fs::exists(images) || !fs::exists(labels))
        throw DatasetError("MNIST files not found in " + dir.string());
    return load_idx(images, labels, "mnist", split, 10);
}

namespace {

Dataset parse_cifar(std::span<const std::uint8_t> bytes, Split split, std::size_t label_bytes,
                    std::size_t classes, const char* name) {
    constexpr std::size_t kPixels = 3 * 32 * 32;
    const std::size_t record = label_bytes + kPixels;
    if (bytes.size() % record != 0)
        throw DatasetError(std::string(name) + ": " + std::to_string(bytes.size()) +
                           " bytes is not a multiple of the " + std::to_string(record) + "-byte record");
    const std::size_t n = bytes.size() / record;
    Dataset d;
    d.name = name;
    d.split = split;
    d.channels = 3;
    d.height = 32;
    d.width = 32;
    d.classes = classes;
    d.images.resize(n * kPixels);
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto* r = bytes.data() + i * record;
        d.labels[i] = r[label_bytes - 1];
        for (std::size_t j = 0; j < kPixels; ++j) d.images[i * kPixels + j] = float(r[label_bytes + j]) / 255.0f;
    }
    d.validate();
    return d;
}

}  // namespace

Dataset parse_cifar10(std::span<const std::uint8_t> bytes, Split split) {
    return parse_cifar(bytes, split, 1, 10, "cifar10");
}

Dataset parse_cifar100(std::span<const std::uint8_t> bytes, Split split) {
    return parse_cifar(bytes, split, 2, 100, "cifar100");
}

void concatenate(Dataset& a, const Dataset& b) {
    if (a.channels != b.channels || a.height != b.height || a.width != b.width || a.classes != b.classes)
        throw DatasetError("cannot concatenate datasets of different geometry");
    a.images.insert(a.images.end(), b.images.begin(), b.images.end());
    a.labels.insert(a.labels.end(), b.labels.begin(), b.labels.end());
}

Dataset load_cifar10_binary(std::span<const fs::path> files, Split split) {
    if (files.empty()) throw DatasetError("cifar10: no files given");
    Dataset d = parse_cifar10(read_bytes(files[0]), split);
    for (std::size_t i = 1; i < files.size(); ++i) concatenate(d, parse_cifar10(read_bytes(files[i]), split));
    return d;
}

Dataset load_cifar100_binary(const fs::path& file, Split split) { return parse_cifar100(read_bytes(file), split); }

Dataset load_cifar10(const fs::path& dir, Split split) {
    std::vector<fs::path> files;
    if (split == Split::train)
        for (int i = 1; i <= 5; ++i) files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
    else
        files.push_back(dir / "test_batch.bin");
    for (const auto& f : files)
        if (!fs::exists(f)) throw DatasetError("CIFAR-10 file not found: " + f.string());
    return load_cifar10_binary(files, split);
}

}  // namespace sparsegrow
