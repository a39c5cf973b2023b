#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace hfsim {

// Result record shared by every scan and verification routine.
struct ScanReport {
    std::string kind;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> series;
    std::map<std::string, std::string> notes;
    std::vector<std::string> flags;

    nlohmann::ordered_json to_json() const;
    static ScanReport from_json(const nlohmann::ordered_json& j);
};

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

// CSV table printed with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& row);
    std::string str() const;
    void write(const std::filesystem::path& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

std::string format_number(double v);

// 64-bit FNV-1a digest rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace hfsim
