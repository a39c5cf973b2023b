#include "hfsim/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hfsim/report.hpp"

namespace hfsim {

namespace {

template <class T>
void put(std::ofstream& os, T v) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits = std::bit_cast<U>(v);
    unsigned char buf[sizeof(U)];
    for (std::size_t b = 0; b < sizeof(U); ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <class T>
T get(std::ifstream& is) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    unsigned char buf[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw std::runtime_error("checkpoint data file is truncated");
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(buf[b]) << (8 * b);
    return std::bit_cast<T>(bits);
}

void write_field(std::ofstream& os, const Field& f, Precision p) {
    for (const auto& v : f) {
        if (p == Precision::complex64) {
            put(os, static_cast<float>(v.real()));
            put(os, static_cast<float>(v.imag()));
        } else {
            put(os, v.real());
            put(os, v.imag());
        }
    }
}

Field read_field(std::ifstream& is, std::size_t n, Precision p) {
    Field f(n);
    for (auto& v : f) {
        if (p == Precision::complex64) {
            const float re = get<float>(is);
            const float im = get<float>(is);
            v = {re, im};
        } else {
            const double re = get<double>(is);
            const double im = get<double>(is);
            v = {re, im};
        }
    }
    return f;
}

std::filesystem::path with_ext(std::filesystem::path stem, const char* ext) {
    if (stem.extension() == ".json" || stem.extension() == ".bin") stem.replace_extension();
    stem += ext;
    return stem;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& stem, const Trajectory& traj, Precision precision) {
    traj.validate();
    const auto meta_path = with_ext(stem, ".json");
    const auto data_path = with_ext(stem, ".bin");
    const auto& g = *traj.grid;

    nlohmann::ordered_json j;
    j["format"] = "hfsim-trajectory";
    j["version"] = 1;
    j["grid"] = {{"d", g.dim()}, {"L", g.length()}, {"M", g.points_per_axis()}};
    j["alpha"] = traj.alpha;
    j["times"] = traj.times;
    j["particles"] = traj.particles();
    j["dtype"] = precision == Precision::complex64 ? "complex64" : "complex128";
    j["byte_order"] = "little";
    j["layout"] = "node, particle, sample; states then nonlinearity";
    j["has_nonlinearity"] = traj.has_nonlinearity();
    j["data_file"] = data_path.filename().string();
    write_json(meta_path, j);

    std::ofstream os(data_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + data_path.string());
    for (const auto& node : traj.states)
        for (const auto& f : node) write_field(os, f, precision);
    for (const auto& node : traj.nonlinearity)
        for (const auto& f : node) write_field(os, f, precision);
    if (!os) throw std::runtime_error("failed writing " + data_path.string());
}

Trajectory read_checkpoint(const std::filesystem::path& stem) {
    const auto meta_path = with_ext(stem, ".json");
    std::ifstream ms(meta_path);
    if (!ms) throw std::runtime_error("cannot open " + meta_path.string());
    const auto j = nlohmann::ordered_json::parse(ms);
    if (j.value("format", "") != "hfsim-trajectory") throw std::runtime_error("not a trajectory checkpoint");
    if (j.value("byte_order", "") != "little") throw std::runtime_error("unsupported byte order");
    const std::string dtype = j.at("dtype");
    Precision p;
    if (dtype == "complex64")
        p = Precision::complex64;
    else if (dtype == "complex128")
        p = Precision::complex128;
    else
        throw std::runtime_error("unsupported dtype " + dtype);

    Trajectory traj;
    const auto& gj = j.at("grid");
    traj.grid = std::make_shared<const SpectralGrid>(gj.at("d").get<int>(), gj.at("L").get<double>(),
                                                     gj.at("M").get<int>());
    traj.alpha = j.at("alpha");
    traj.times = j.at("times").get<std::vector<double>>();
    const std::size_t particles = j.at("particles");
    const std::size_t n = traj.grid->size();

    std::ifstream is(meta_path.parent_path() / j.at("data_file").get<std::string>(), std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint data file");
    auto read_block = [&] {
        std::vector<std::vector<Field>> block(traj.times.size());
        for (auto& node : block) {
            node.reserve(particles);
            for (std::size_t k = 0; k < particles; ++k) node.push_back(read_field(is, n, p));
        }
        return block;
    };
    traj.states = read_block();
    if (j.value("has_nonlinearity", false)) traj.nonlinearity = read_block();
    if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("checkpoint data file has trailing bytes");
    traj.validate();
    return traj;
}

}  // namespace hfsim
