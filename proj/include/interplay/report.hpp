#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace interplay {

inline constexpr std::string_view kVersion = "0.1.0";

// Shortest round-trip decimal form, locale-independent (std::to_chars), so
// identical configs always serialize to identical report bytes.
std::string fmt_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);

// 16-hex-digit FNV-1a of the canonical (ordered, compact) JSON dump.
std::string config_hash(const nlohmann::ordered_json& config);

// Write-to-temp then atomic rename into place.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

// Minimal deterministic CSV builder: fixed header, '\n' line ends,
// doubles via fmt_double.
class CsvWriter {
public:
    explicit CsvWriter(std::string_view header);

    void field(std::string_view v);
    void field(double v);
    void field(std::uint64_t v);
    void field(std::int64_t v);
    void field(bool v);
    void end_row();

    const std::string& str() const { return out_; }

private:
    std::string out_;
    bool row_open_ = false;
};

}  // namespace interplay
