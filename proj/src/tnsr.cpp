#include "interplay/tnsr.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "interplay/report.hpp"

namespace interplay {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', 'R'};
constexpr std::uint8_t kVersionByte = 1;
constexpr std::size_t kHeaderSize = 10;  // magic + version + dtype + ndim + 3 reserved

std::uint64_t load_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void store_u64_le(std::uint64_t v, std::string& out) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t load_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t TnsrFile::element_count() const {
    std::size_t total = 1;
    for (std::uint64_t d : dims) total *= static_cast<std::size_t>(d);
    return dims.empty() ? 0 : total;
}

TnsrFile tnsr_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TnsrError("path", "cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderSize)
        throw TnsrError("header", "file shorter than the 10-byte header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kMagic, 4) != 0)
        throw TnsrError("magic", "bad magic bytes (want \"TNSR\")");
    if (p[4] != kVersionByte)
        throw TnsrError("version", "unsupported version " + std::to_string(p[4]));
    if (p[5] > 1)
        throw TnsrError("dtype", "unknown dtype byte " + std::to_string(p[5]));
    const auto dtype = static_cast<TnsrDtype>(p[5]);
    const std::size_t ndim = p[6];
    if (ndim == 0) throw TnsrError("ndim", "zero-dimensional tensor");

    const std::size_t dims_bytes = 8 * ndim;
    if (bytes.size() < kHeaderSize + dims_bytes)
        throw TnsrError("dims", "file truncated inside the dims table");

    TnsrFile file;
    file.dtype = dtype;
    file.dims.resize(ndim);
    std::size_t total = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
        file.dims[i] = load_u64_le(p + kHeaderSize + 8 * i);
        if (file.dims[i] == 0) throw TnsrError("dims", "zero dimension");
        if (file.dims[i] > std::numeric_limits<std::size_t>::max() / total)
            throw TnsrError("dims", "dimension product overflows");
        total *= static_cast<std::size_t>(file.dims[i]);
    }
    const std::size_t elem_size = dtype == TnsrDtype::F32 ? 4 : 8;
    const std::size_t want = kHeaderSize + dims_bytes + total * elem_size;
    if (bytes.size() != want)
        throw TnsrError("payload", "payload length " +
                                       std::to_string(bytes.size() - kHeaderSize -
                                                      dims_bytes) +
                                       " does not match dims (want " +
                                       std::to_string(total * elem_size) + ")");

    file.data.resize(total);
    const unsigned char* payload = p + kHeaderSize + dims_bytes;
    if (dtype == TnsrDtype::F32) {
        for (std::size_t i = 0; i < total; ++i)
            file.data[i] = std::bit_cast<float>(load_u32_le(payload + 4 * i));
    } else {
        for (std::size_t i = 0; i < total; ++i)
            file.data[i] = std::bit_cast<double>(load_u64_le(payload + 8 * i));
    }
    return file;
}

void tnsr_write(const std::filesystem::path& path, const TnsrFile& file) {
    if (file.dims.empty()) throw TnsrError("dims", "zero-dimensional tensor");
    if (file.dims.size() > 255) throw TnsrError("ndim", "too many dimensions");
    if (file.element_count() != file.data.size())
        throw TnsrError("payload", "data length does not match dims");

    std::string bytes;
    bytes.reserve(kHeaderSize + 8 * file.dims.size() + 8 * file.data.size());
    bytes.append(kMagic, 4);
    bytes.push_back(static_cast<char>(kVersionByte));
    bytes.push_back(static_cast<char>(file.dtype));
    bytes.push_back(static_cast<char>(file.dims.size()));
    bytes.append(3, '\0');
    for (std::uint64_t d : file.dims) store_u64_le(d, bytes);
    if (file.dtype == TnsrDtype::F32) {
        for (double v : file.data) {
            const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int i = 0; i < 4; ++i)
                bytes.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
        }
    } else {
        for (double v : file.data) store_u64_le(std::bit_cast<std::uint64_t>(v), bytes);
    }
    atomic_write(path, bytes);
}

}  // namespace interplay
