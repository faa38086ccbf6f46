#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace interplay {

// Binary tensor container:
//   "TNSR" | version u8 (=1) | dtype u8 (0=f32, 1=f64) | ndim u8 |
//   3 reserved zero bytes | ndim x u64 LE dims | row-major LE payload
enum class TnsrDtype : std::uint8_t { F32 = 0, F64 = 1 };

struct TnsrError : std::runtime_error {
    TnsrError(std::string field_, const std::string& message)
        : std::runtime_error(message), field(std::move(field_)) {}
    std::string field;
};

struct TnsrFile {
    TnsrDtype dtype = TnsrDtype::F64;
    std::vector<std::uint64_t> dims;
    std::vector<double> data;  // f32 payloads widened on load

    std::size_t element_count() const;
};

TnsrFile tnsr_read(const std::filesystem::path& path);

// Serializes at file.dtype (f32 written with round-to-nearest narrowing);
// writes to a temp file and renames, so no partial output survives errors.
void tnsr_write(const std::filesystem::path& path, const TnsrFile& file);

}  // namespace interplay
