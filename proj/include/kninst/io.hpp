#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

namespace kninst {

inline constexpr const char* kSchemaVersion = "1";

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// CSV writer: two '#' comment lines embedding the schema version and the
/// resolved config, then a mandatory header row; LF line endings.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const nlohmann::json& config,
              const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        out_ << "# schema_version=" << kSchemaVersion << "\n";
        out_ << "# config=" << config.dump() << "\n";
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << header[i] << (i + 1 < header.size() ? "," : "");
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

/// JSON result envelope with the schema version and resolved config.
inline nlohmann::json json_envelope(const nlohmann::json& config) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config;
    return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace kninst
