#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hfsim/illposedness.hpp"
#include "hfsim/norms.hpp"
#include "hfsim/solver.hpp"
#include "hfsim/trilinear.hpp"

namespace hfsim {

enum class ExperimentKind { simulate, verify_factorization, verify_trilinear, norms, illposedness_scan, counterexample };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

// Parameter cone checked before dispatch.
enum class Regime {
    none,          // basic ranges only
    lp,            // alpha = 2, data in L^p cap L^2
    hat_lp,        // alpha = 2, data in L^p-hat cap L^2, any p
    hat_lp_high,   // p in (2, inf], gamma < 2d(1/2 - 1/p); a > 0 allows L^p-hat alone
    improved_1d,   // d = 1, alpha = 2, 0 < gamma < 1, p in (4/3, 4)
    ill_posed      // a = 0, p in (2, inf], gamma < 2d(1/2 - 1/p)
};

std::string to_string(Regime r);
Regime parse_regime(std::string_view name);

enum class InitialData { gaussian, bump };

struct GridSpec {
    double L = 32.0;
    int M = 512;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output = "out";

    ModelParams model;
    GridSpec grid;
    Regime regime = Regime::none;
    Exponent space_p{2.0};
    InitialData data = InitialData::gaussian;

    // simulate / norms
    std::string method = "splitstep";  // splitstep | picard
    SolveConfig solve;
    SplitStepConfig split;
    Exponent monitor_p{4.0};
    std::vector<AdmissiblePair> pairs;
    bool checkpoint = false;

    // norms
    Exponent zhou_p{2.0};
    Exponent zhou_q{4.0};
    double zhou_theta = 0.0;
    bool zhou_hat = false;
    std::vector<Exponent> isometry_p;

    // verify-factorization
    std::vector<double> times{0.25, 0.5, 1.0};

    // verify-trilinear
    EstimateSpec estimate;
    std::vector<double> identity_times{0.25, 1.0};
    int identity_triples = 20;
    int identity_points = 256;

    // illposedness-scan
    GrowthScanSpec scan;
    std::vector<double> scales{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    std::vector<double> taylor_times;

    // counterexample
    double counterexample_a = 0.1;

    static constexpr std::uint64_t default_seed = 1;
    std::uint64_t resolved_seed() const { return seed.value_or(default_seed); }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::vector<std::string> violations = {})
        : std::runtime_error(what), violations(std::move(violations)) {}
    std::vector<std::string> violations;
};

// Flat INI sections: [experiment] [model] [grid] [regime] [solve] [monitor]
// [norms] [factorization] [trilinear] [scan] [counterexample]. Unknown keys,
// malformed values and constraint violations throw ConfigError.
// `expected` fills a missing kind and must match a present one.
ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> expected = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected = std::nullopt);

// Every key, numbers with 17 significant digits; parse_config inverts it.
std::string serialize(const ExperimentConfig& cfg);

// Named violations of parameter cones and admissibility; empty when valid.
std::vector<std::string> constraint_violations(const ExperimentConfig& cfg);

// Serialized config with the output directory reset, so results do not depend on where they are written.
std::string provenance_text(const ExperimentConfig& cfg);

// fnv1a of provenance_text.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace hfsim
