#include "interplay/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace interplay {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const nlohmann::ordered_json& config) {
    const std::uint64_t h = fnv1a64(config.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("output: cannot open '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("output: write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("output: rename into '" + path.string() + "' failed");
    }
}

CsvWriter::CsvWriter(std::string_view header) {
    out_.append(header);
    out_.push_back('\n');
}

void CsvWriter::field(std::string_view v) {
    if (row_open_) out_.push_back(',');
    out_.append(v);
    row_open_ = true;
}

void CsvWriter::field(double v) { field(std::string_view(fmt_double(v))); }

void CsvWriter::field(std::uint64_t v) { field(std::string_view(std::to_string(v))); }

void CsvWriter::field(std::int64_t v) { field(std::string_view(std::to_string(v))); }

void CsvWriter::field(bool v) { field(std::string_view(v ? "1" : "0")); }

void CsvWriter::end_row() {
    out_.push_back('\n');
    row_open_ = false;
}

}  // namespace interplay
