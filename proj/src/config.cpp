#include "hfsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hfsim/report.hpp"

namespace hfsim {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using Document = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string at_line(int line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

Document tokenize(std::string_view text) {
    Document doc;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find_first_of("#;")));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at_line(line_no, "unterminated section header"));
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(at_line(line_no, "empty section name"));
            doc[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at_line(line_no, "expected key = value"));
        if (section.empty()) throw ConfigError(at_line(line_no, "key outside of a section"));
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ConfigError(at_line(line_no, "empty key"));
        auto [it, fresh] = doc[section].try_emplace(key, Entry{trim(std::string_view(line).substr(eq + 1)), line_no});
        if (!fresh)
            throw ConfigError(at_line(line_no, "duplicate key [" + section + "] " + key + " (first at line " +
                                                   std::to_string(it->second.line) + ")"));
    }
    return doc;
}

// Consumes keys so leftovers can be reported as unknown.
class Reader {
public:
    explicit Reader(Document doc) : doc_(std::move(doc)) {}

    template <class Fn>
    void take(const std::string& section, const std::string& key, Fn&& assign) {
        auto s = doc_.find(section);
        if (s == doc_.end()) return;
        auto k = s->second.find(key);
        if (k == s->second.end()) return;
        try {
            assign(k->second.value);
        } catch (const std::exception& e) {
            throw ConfigError(at_line(k->second.line, "[" + section + "] " + key + ": " + e.what()));
        }
        s->second.erase(k);
    }

    void finish() const {
        for (const auto& [section, keys] : doc_)
            for (const auto& [key, entry] : keys)
                throw ConfigError(at_line(entry.line, "unknown key [" + section + "] " + key));
    }

private:
    Document doc_;
};

double to_double(const std::string& s) {
    if (s == "inf") return INFINITY;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("'" + s + "' is not a number");
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("'" + s + "' is not an integer");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("'" + s + "' is not true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t b = 0;
    while (true) {
        const auto e = s.find(sep, b);
        out.push_back(trim(std::string_view(s).substr(b, e == std::string::npos ? std::string::npos : e - b)));
        if (e == std::string::npos) break;
        b = e + 1;
    }
    return out;
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(to_double(item));
    return out;
}

std::string fmt(double v) { return std::isinf(v) ? (v > 0 ? "inf" : "-inf") : format_number(v); }
std::string fmt(Exponent p) { return p.is_infinite() ? "inf" : format_number(p.value()); }
std::string fmt(bool b) { return b ? "true" : "false"; }

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
    return out;
}

std::string to_string(NormKind k) {
    switch (k) {
        case NormKind::lp: return "lp";
        case NormKind::hat_lp: return "hat_lp";
        case NormKind::lp_cap_l2: return "lp_cap_l2";
        case NormKind::hat_lp_cap_l2: return "hat_lp_cap_l2";
    }
    return "?";
}

NormKind parse_norm_kind(const std::string& s) {
    for (auto k : {NormKind::lp, NormKind::hat_lp, NormKind::lp_cap_l2, NormKind::hat_lp_cap_l2})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown norm '" + s + "'");
}

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid configuration";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::verify_factorization: return "verify-factorization";
        case ExperimentKind::verify_trilinear: return "verify-trilinear";
        case ExperimentKind::norms: return "norms";
        case ExperimentKind::illposedness_scan: return "illposedness-scan";
        case ExperimentKind::counterexample: return "counterexample";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
    for (auto k : {ExperimentKind::simulate, ExperimentKind::verify_factorization, ExperimentKind::verify_trilinear,
                   ExperimentKind::norms, ExperimentKind::illposedness_scan, ExperimentKind::counterexample})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::none: return "none";
        case Regime::lp: return "lp";
        case Regime::hat_lp: return "hat_lp";
        case Regime::hat_lp_high: return "hat_lp_high";
        case Regime::improved_1d: return "improved_1d";
        case Regime::ill_posed: return "ill_posed";
    }
    return "?";
}

Regime parse_regime(std::string_view name) {
    for (auto r : {Regime::none, Regime::lp, Regime::hat_lp, Regime::hat_lp_high, Regime::improved_1d,
                   Regime::ill_posed})
        if (to_string(r) == name) return r;
    throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

std::vector<std::string> constraint_violations(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    const auto& m = cfg.model;
    try {
        m.validate();
    } catch (const std::exception& e) {
        out.emplace_back(e.what());
    }
    if (!(cfg.grid.L > 0.0)) out.push_back("grid length L must be > 0");
    if (cfg.grid.M < 8 || (cfg.grid.M & (cfg.grid.M - 1))) out.push_back("grid points M must be a power of two >= 8");

    const int d = m.d;
    const double g = m.gamma;
    const double inv_p = cfg.space_p.reciprocal();
    const std::string p_txt = fmt(cfg.space_p);
    auto cone = [&](double bound, const std::string& text, const std::string& regime) {
        if (!(g > 0.0 && g < bound)) {
            std::ostringstream os;
            os << "gamma=" << format_number(g) << " violates 0<gamma<" << text << "=" << format_number(bound)
               << " for p=" << p_txt << ", d=" << d << " (" << regime << ")";
            out.push_back(os.str());
        }
    };
    auto need_alpha2 = [&](const char* regime) {
        if (m.alpha != 2.0) out.push_back(std::string(regime) + " regime needs alpha=2");
    };
    switch (cfg.regime) {
        case Regime::none: break;
        case Regime::lp:
            need_alpha2("lp");
            if (inv_p >= 0.75)
                cone(std::min(1.0, 2.0 * d * (inv_p - 0.5)), "min(1,2d(1/p-1/2))", "L^p cap L^2, 1<=p<=4/3");
            else
                cone(std::min(1.0, 0.5 * d), "min(1,d/2)", "L^p cap L^2, 4/3<=p<=inf");
            break;
        case Regime::hat_lp:
            need_alpha2("hat_lp");
            cone(std::min(2.0, 0.5 * d), "min(2,d/2)", "L^p-hat cap L^2, alpha=2");
            break;
        case Regime::hat_lp_high:
            if (!(inv_p < 0.5)) out.push_back("hat_lp_high regime needs p in (2, inf], got p=" + p_txt);
            else cone(2.0 * d * (0.5 - inv_p), "2d(1/2-1/p)", m.a > 0.0 ? "L^p-hat, a>0" : "L^p-hat cap L^2, a=0");
            break;
        case Regime::improved_1d:
            need_alpha2("improved_1d");
            if (d != 1) out.push_back("improved_1d regime needs d=1");
            if (!(inv_p > 0.25 && inv_p < 0.75)) out.push_back("improved_1d regime needs p in (4/3, 4), got p=" + p_txt);
            cone(1.0, "1", "improved 1D");
            break;
        case Regime::ill_posed:
            if (m.a != 0.0) out.push_back("ill_posed regime needs a=0");
            if (!(inv_p < 0.5)) out.push_back("ill_posed regime needs p in (2, inf], got p=" + p_txt);
            else cone(2.0 * d * (0.5 - inv_p), "2d(1/2-1/p)", "L^p-hat ill-posedness, a=0");
            break;
    }
    for (const auto& pr : cfg.pairs)
        if (!is_admissible(m.alpha, d, pr.q, pr.r))
            out.push_back("monitor pair (q,r)=(" + fmt(pr.q) + "," + fmt(pr.r) + ") is not admissible for alpha=" +
                          format_number(m.alpha) + ", d=" + std::to_string(d));

    auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            out.emplace_back(e.what());
        }
    };
    switch (cfg.kind) {
        case ExperimentKind::simulate:
            if (cfg.method == "splitstep") check([&] { cfg.split.validate(); });
            else if (cfg.method == "picard") check([&] { cfg.solve.validate(); });
            else out.push_back("method must be splitstep or picard, got " + cfg.method);
            break;
        case ExperimentKind::norms:
            check([&] { cfg.solve.validate(); });
            if (m.alpha != 2.0) out.push_back("norms runs the twisted solver and needs alpha=2");
            break;
        case ExperimentKind::verify_factorization:
            if (cfg.times.empty()) out.push_back("factorization needs at least one time");
            break;
        case ExperimentKind::verify_trilinear: {
            EstimateSpec e = cfg.estimate;
            const std::string v = e.hypothesis_violation();
            if (!v.empty() && e.enforce_hypothesis) out.push_back(v);
            if (cfg.identity_triples < 2) out.push_back("identity check needs at least two triples");
            break;
        }
        case ExperimentKind::illposedness_scan:
            if (cfg.scales.size() < 2) out.push_back("scan needs at least two scales");
            break;
        case ExperimentKind::counterexample:
            if (!(cfg.counterexample_a > 0.0)) out.push_back("counterexample a must be > 0");
            if (!(m.gamma > 0.0 && m.gamma < 1.0)) out.push_back("counterexample needs 0<gamma<1");
            break;
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> expected) {
    Reader rd(tokenize(text));
    ExperimentConfig c;
    bool has_kind = false;

    rd.take("experiment", "kind", [&](const std::string& v) {
        c.kind = parse_experiment_kind(v);
        has_kind = true;
    });
    rd.take("experiment", "seed", [&](const std::string& v) { c.seed = to_int<std::uint64_t>(v); });
    rd.take("experiment", "output", [&](const std::string& v) { c.output = v; });
    rd.take("experiment", "data", [&](const std::string& v) {
        if (v == "gaussian") c.data = InitialData::gaussian;
        else if (v == "bump") c.data = InitialData::bump;
        else throw std::invalid_argument("data must be gaussian or bump");
    });
    if (expected) {
        if (has_kind && c.kind != *expected)
            throw ConfigError("config kind " + to_string(c.kind) + " does not match subcommand " + to_string(*expected));
        c.kind = *expected;
    } else if (!has_kind) {
        throw ConfigError("missing [experiment] kind");
    }

    auto& m = c.model;
    rd.take("model", "d", [&](const std::string& v) { m.d = to_int<int>(v); });
    rd.take("model", "alpha", [&](const std::string& v) { m.alpha = to_double(v); });
    rd.take("model", "gamma", [&](const std::string& v) { m.gamma = to_double(v); });
    rd.take("model", "a", [&](const std::string& v) { m.a = to_double(v); });
    rd.take("model", "kappa", [&](const std::string& v) { m.kappa = to_double(v); });
    rd.take("model", "N", [&](const std::string& v) { m.N = to_int<int>(v); });
    rd.take("model", "variant", [&](const std::string& v) {
        if (v == "full") m.variant = Variant::full;
        else if (v == "reduced") m.variant = Variant::reduced;
        else throw std::invalid_argument("variant must be full or reduced");
    });

    rd.take("grid", "L", [&](const std::string& v) { c.grid.L = to_double(v); });
    rd.take("grid", "M", [&](const std::string& v) { c.grid.M = to_int<int>(v); });

    rd.take("regime", "name", [&](const std::string& v) { c.regime = parse_regime(v); });
    rd.take("regime", "p", [&](const std::string& v) { c.space_p = parse_exponent(v); });

    auto& s = c.solve;
    rd.take("solve", "method", [&](const std::string& v) { c.method = v; });
    rd.take("solve", "T", [&](const std::string& v) { s.T = c.split.T = to_double(v); });
    rd.take("solve", "n_t", [&](const std::string& v) { s.n_t = to_int<int>(v); });
    rd.take("solve", "tol", [&](const std::string& v) { s.tol = to_double(v); });
    rd.take("solve", "max_iter", [&](const std::string& v) { s.max_iter = to_int<int>(v); });
    rd.take("solve", "control", [&](const std::string& v) { s.control.kind = parse_norm_kind(v); });
    rd.take("solve", "control_p", [&](const std::string& v) { s.control.p = parse_exponent(v); });
    rd.take("solve", "require_convergence", [&](const std::string& v) { s.require_convergence = to_bool(v); });
    rd.take("solve", "dt", [&](const std::string& v) { c.split.dt = to_double(v); });
    rd.take("solve", "store_every", [&](const std::string& v) { c.split.store_every = to_int<int>(v); });
    rd.take("solve", "checkpoint", [&](const std::string& v) { c.checkpoint = to_bool(v); });

    rd.take("monitor", "p", [&](const std::string& v) { c.monitor_p = parse_exponent(v); });
    rd.take("monitor", "pairs", [&](const std::string& v) {
        c.pairs.clear();
        for (const auto& item : split(v, ',')) {
            const auto qr = split(item, ':');
            if (qr.size() != 2) throw std::invalid_argument("pairs are written q:r, got '" + item + "'");
            c.pairs.push_back({parse_exponent(qr[0]), parse_exponent(qr[1])});
        }
    });

    rd.take("norms", "p", [&](const std::string& v) { c.zhou_p = parse_exponent(v); });
    rd.take("norms", "q", [&](const std::string& v) { c.zhou_q = parse_exponent(v); });
    rd.take("norms", "theta", [&](const std::string& v) { c.zhou_theta = to_double(v); });
    rd.take("norms", "hat", [&](const std::string& v) { c.zhou_hat = to_bool(v); });
    rd.take("norms", "isometry_p", [&](const std::string& v) {
        c.isometry_p.clear();
        for (const auto& item : split(v, ',')) c.isometry_p.push_back(parse_exponent(item));
    });

    rd.take("factorization", "times", [&](const std::string& v) { c.times = to_doubles(v); });

    auto& e = c.estimate;
    rd.take("trilinear", "estimate", [&](const std::string& v) { e.id = parse_estimate_id(v); });
    rd.take("trilinear", "p", [&](const std::string& v) { e.p = to_double(v); });
    rd.take("trilinear", "t", [&](const std::string& v) { e.t = to_double(v); });
    rd.take("trilinear", "rho", [&](const std::string& v) { e.rho = to_double(v); });
    rd.take("trilinear", "samples", [&](const std::string& v) { e.samples = to_int<int>(v); });
    rd.take("trilinear", "box", [&](const std::string& v) { e.box = to_double(v); });
    rd.take("trilinear", "points", [&](const std::string& v) { e.points = to_int<int>(v); });
    rd.take("trilinear", "enforce_hypothesis", [&](const std::string& v) { e.enforce_hypothesis = to_bool(v); });
    rd.take("trilinear", "identity_times", [&](const std::string& v) { c.identity_times = to_doubles(v); });
    rd.take("trilinear", "identity_triples", [&](const std::string& v) { c.identity_triples = to_int<int>(v); });
    rd.take("trilinear", "identity_points", [&](const std::string& v) { c.identity_points = to_int<int>(v); });

    auto& sc = c.scan;
    rd.take("scan", "p", [&](const std::string& v) { sc.p = to_double(v); });
    rd.take("scan", "t", [&](const std::string& v) { sc.t = to_double(v); });
    rd.take("scan", "control_a", [&](const std::string& v) { sc.control_a = to_double(v); });
    rd.take("scan", "box", [&](const std::string& v) { sc.box = to_double(v); });
    rd.take("scan", "points", [&](const std::string& v) { sc.points = to_int<int>(v); });
    rd.take("scan", "nodes", [&](const std::string& v) { sc.nodes = to_int<int>(v); });
    rd.take("scan", "scales", [&](const std::string& v) { c.scales = to_doubles(v); });
    rd.take("scan", "taylor_times", [&](const std::string& v) { c.taylor_times = to_doubles(v); });

    rd.take("counterexample", "a", [&](const std::string& v) { c.counterexample_a = to_double(v); });
    rd.finish();

    e.d = m.d;
    e.gamma = m.gamma;
    e.a = m.a;
    e.seed = c.resolved_seed();
    sc.model = m;

    const auto v = constraint_violations(c);
    if (!v.empty()) throw ConfigError(join_violations(v), v);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), expected);
}

std::string serialize(const ExperimentConfig& c) {
    std::ostringstream os;
    const auto& m = c.model;
    os << "[experiment]\n"
       << "kind = " << to_string(c.kind) << "\n"
       << "seed = " << c.resolved_seed() << "\n"
       << "output = " << c.output.string() << "\n"
       << "data = " << (c.data == InitialData::gaussian ? "gaussian" : "bump") << "\n\n";
    os << "[model]\n"
       << "d = " << m.d << "\nalpha = " << fmt(m.alpha) << "\ngamma = " << fmt(m.gamma) << "\na = " << fmt(m.a)
       << "\nkappa = " << fmt(m.kappa) << "\nN = " << m.N
       << "\nvariant = " << (m.variant == Variant::full ? "full" : "reduced") << "\n\n";
    os << "[grid]\nL = " << fmt(c.grid.L) << "\nM = " << c.grid.M << "\n\n";
    os << "[regime]\nname = " << to_string(c.regime) << "\np = " << fmt(c.space_p) << "\n\n";
    os << "[solve]\nmethod = " << c.method << "\nT = " << fmt(c.solve.T) << "\nn_t = " << c.solve.n_t
       << "\ntol = " << fmt(c.solve.tol) << "\nmax_iter = " << c.solve.max_iter
       << "\ncontrol = " << to_string(c.solve.control.kind) << "\ncontrol_p = " << fmt(c.solve.control.p)
       << "\nrequire_convergence = " << fmt(c.solve.require_convergence) << "\ndt = " << fmt(c.split.dt)
       << "\nstore_every = " << c.split.store_every << "\ncheckpoint = " << fmt(c.checkpoint) << "\n\n";
    os << "[monitor]\np = " << fmt(c.monitor_p) << "\npairs = ";
    for (std::size_t i = 0; i < c.pairs.size(); ++i)
        os << (i ? ", " : "") << fmt(c.pairs[i].q) << ":" << fmt(c.pairs[i].r);
    os << "\n\n";
    os << "[norms]\np = " << fmt(c.zhou_p) << "\nq = " << fmt(c.zhou_q) << "\ntheta = " << fmt(c.zhou_theta)
       << "\nhat = " << fmt(c.zhou_hat) << "\nisometry_p = " << join(c.isometry_p) << "\n\n";
    os << "[factorization]\ntimes = " << join(c.times) << "\n\n";
    const auto& e = c.estimate;
    os << "[trilinear]\nestimate = " << to_string(e.id) << "\np = " << fmt(e.p) << "\nt = " << fmt(e.t)
       << "\nrho = " << fmt(e.rho) << "\nsamples = " << e.samples << "\nbox = " << fmt(e.box)
       << "\npoints = " << e.points << "\nenforce_hypothesis = " << fmt(e.enforce_hypothesis)
       << "\nidentity_times = " << join(c.identity_times) << "\nidentity_triples = " << c.identity_triples
       << "\nidentity_points = " << c.identity_points << "\n\n";
    const auto& s = c.scan;
    os << "[scan]\np = " << fmt(s.p) << "\nt = " << fmt(s.t) << "\ncontrol_a = " << fmt(s.control_a)
       << "\nbox = " << fmt(s.box) << "\npoints = " << s.points << "\nnodes = " << s.nodes
       << "\nscales = " << join(c.scales) << "\ntaylor_times = " << join(c.taylor_times) << "\n\n";
    os << "[counterexample]\na = " << fmt(c.counterexample_a) << "\n";
    return os.str();
}

std::string provenance_text(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.output = ExperimentConfig{}.output;
    return serialize(c);
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(provenance_text(cfg)); }

}  // namespace hfsim
