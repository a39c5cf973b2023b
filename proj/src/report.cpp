#include "hfsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfsim {

namespace {

// JSON has no infinities or NaN; encode them as strings.
nlohmann::ordered_json encode(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double decode(const nlohmann::ordered_json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
}

}  // namespace

nlohmann::ordered_json ScanReport::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    auto& s = j["scalars"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : scalars) s[k] = encode(v);
    auto& ser = j["series"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : series) {
        auto arr = nlohmann::ordered_json::array();
        for (double x : v) arr.push_back(encode(x));
        ser[k] = std::move(arr);
    }
    j["notes"] = notes;
    j["flags"] = flags;
    return j;
}

ScanReport ScanReport::from_json(const nlohmann::ordered_json& j) {
    ScanReport r;
    r.kind = j.at("kind").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [k, v] : j.at("scalars").items()) r.scalars[k] = decode(v);
    for (const auto& [k, v] : j.at("series").items()) {
        auto& out = r.series[k];
        for (const auto& x : v) out.push_back(decode(x));
    }
    for (const auto& [k, v] : j.at("notes").items()) r.notes[k] = v.get<std::string>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    return r;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CSV table needs at least one column");
}

void CsvTable::add_row(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw std::invalid_argument("CSV row width differs from header");
    rows_.push_back(row);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << str();
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hfsim
