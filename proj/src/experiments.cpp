#include "hfsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hfsim/checkpoint.hpp"
#include "hfsim/illposedness.hpp"
#include "hfsim/propagator.hpp"
#include "hfsim/trilinear.hpp"

namespace hfsim {

namespace {

std::string label(Exponent e) { return e.is_infinite() ? "inf" : format_number(e.value()); }

void stamp(ScanReport& rep, const ExperimentConfig& cfg) {
    rep.seed = cfg.resolved_seed();
    rep.config_hash = config_hash(cfg);
    rep.notes["experiment"] = to_string(cfg.kind);
    rep.notes["seed_source"] = cfg.seed ? "config" : "default";
    rep.notes["config"] = provenance_text(cfg);
}

// Columns t, then l2, lp, hat_lp, drift for each particle.
CsvTable norm_table(const Trajectory& traj, Exponent p) {
    const SpectralGrid& g = *traj.grid;
    std::vector<std::string> header{"t"};
    for (std::size_t k = 1; k <= traj.particles(); ++k)
        for (const char* c : {"l2_", "lp_", "hat_lp_", "drift_"}) header.push_back(c + std::to_string(k));
    CsvTable table(header);
    for (std::size_t i = 0; i < traj.nodes(); ++i) {
        std::vector<double> row{traj.times[i]};
        for (std::size_t k = 0; k < traj.particles(); ++k) {
            const auto& f = traj.states[i][k];
            const double m0 = l2_norm(g, traj.states.front()[k]);
            const double m = l2_norm(g, f);
            row.push_back(m);
            row.push_back(lp_norm(g, f, p));
            row.push_back(hat_lp_norm(g, f, p));
            row.push_back(m0 > 0.0 ? std::abs(m - m0) / m0 : m);
        }
        table.add_row(row);
    }
    return table;
}

ScanReport simulate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    auto grid = std::make_shared<const SpectralGrid>(cfg.model.d, cfg.grid.L, cfg.grid.M);
    const Ensemble psi0 = initial_data(cfg, *grid);
    Trajectory traj;
    ScanReport extra;
    if (cfg.method == "picard") {
        PicardResult res = picard_solve_twisted(cfg.model, grid, psi0, cfg.solve);
        traj = std::move(res.traj);
        extra.scalars["iterations"] = res.iterations;
        extra.scalars["converged"] = res.converged ? 1.0 : 0.0;
        extra.series["picard_difference"] = res.differences;
    } else {
        traj = splitstep_evolve(cfg.model, grid, psi0, cfg.split);
    }
    ScanReport rep = conservation_report(traj, cfg.pairs);
    rep.kind = "simulate";
    rep.scalars.insert(extra.scalars.begin(), extra.scalars.end());
    rep.series.insert(extra.series.begin(), extra.series.end());
    rep.scalars["duhamel_residual"] = duhamel_residual(cfg.model, traj);
    rep.notes["method"] = cfg.method;
    norm_table(traj, cfg.monitor_p).write(out / "norms.csv");
    if (cfg.checkpoint) write_checkpoint(out / "trajectory", traj);
    return rep;
}

ScanReport verify_factorization(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const SpectralGrid g(cfg.model.d, cfg.grid.L, cfg.grid.M);
    const Field f = sample(g, [](const std::array<double, 3>& x) {
        return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])));
    });
    ScanReport rep;
    rep.kind = "verify-factorization";
    CsvTable table({"t", "forward", "inverse", "threshold", "commutation"});
    std::vector<double> fwd, inv;
    for (double t : cfg.times) {
        const FactorizationResidual r = factorization_residual(g, t, f);
        const double comm = commutation_residual(g, cfg.model.alpha, t, f) / l2_norm(g, f);
        table.add_row({t, r.forward, r.inverse, r.threshold, comm});
        fwd.push_back(r.forward);
        inv.push_back(r.inverse);
    }
    rep.series["t"] = cfg.times;
    rep.series["forward"] = fwd;
    rep.series["inverse"] = inv;
    rep.scalars["max_forward"] = *std::max_element(fwd.begin(), fwd.end());
    rep.scalars["max_inverse"] = *std::max_element(inv.begin(), inv.end());
    table.write(out / "factorization.csv");
    return rep;
}

ScanReport verify_trilinear(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    EstimateSpec spec = cfg.estimate;
    spec.d = cfg.model.d;
    spec.gamma = cfg.model.gamma;
    spec.a = cfg.model.a;
    spec.seed = cfg.resolved_seed();
    ScanReport rep = estimate_constant(spec);
    rep.kind = "verify-trilinear";
    {
        std::vector<std::string> header{"sample"};
        std::vector<const std::vector<double>*> cols;
        for (const auto& [name, v] : rep.series)
            if (name.rfind("ratio:", 0) == 0) {
                header.push_back(name);
                cols.push_back(&v);
            }
        CsvTable table(header);
        for (int i = 0; i < cfg.estimate.samples; ++i) {
            std::vector<double> row{static_cast<double>(i)};
            for (const auto* c : cols) row.push_back((*c)[i]);
            table.add_row(row);
        }
        table.write(out / "estimate.csv");
    }

    const InteractionKernel k = cfg.model.kernel();
    CsvTable table({"t", "triple", "ratio_re", "ratio_im", "residual"});
    for (std::size_t j = 0; j < cfg.identity_times.size(); ++j) {
        const double t = cfg.identity_times[j];
        const SpectralGrid g = matched_grid(k.d, t, cfg.identity_points);
        std::vector<cplx> ratios;
        double worst = 0.0;
        for (int i = 0; i < cfg.identity_triples; ++i) {
            auto rng = sample_rng(cfg.resolved_seed(), (j + 1) * 1000000 + static_cast<std::uint64_t>(i));
            const Field u1 = random_bandlimited(g, rng);
            const Field u2 = random_bandlimited(g, rng);
            const Field u3 = random_bandlimited(g, rng);
            const TwistedIdentityRatio r = twisted_identity_ratio(g, k, t, u1, u2, u3);
            ratios.push_back(r.ratio);
            worst = std::max(worst, r.residual);
            table.add_row({t, static_cast<double>(i), r.ratio.real(), r.ratio.imag(), r.residual});
        }
        const cplx mean = std::accumulate(ratios.begin(), ratios.end(), cplx(0.0)) / double(ratios.size());
        double var = 0.0;
        for (const auto& r : ratios) var += std::norm(r - mean);
        var /= double(ratios.size() - 1);
        const std::string key = format_number(t);
        rep.scalars["identity_cov:" + key] = std::sqrt(var) / std::abs(mean);
        rep.scalars["identity_residual:" + key] = worst;
        rep.scalars["identity_ratio:" + key] = std::abs(mean);
    }
    table.write(out / "identity.csv");
    return rep;
}

ScanReport norms(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    auto grid = std::make_shared<const SpectralGrid>(cfg.model.d, cfg.grid.L, cfg.grid.M);
    const SpectralGrid& g = *grid;
    const Ensemble psi0 = initial_data(cfg, g);
    const PicardResult res = picard_solve_twisted(cfg.model, grid, psi0, cfg.solve);
    ScanReport rep;
    rep.kind = "norms";
    rep.scalars["iterations"] = res.iterations;
    const ZhouNorm z = zhou_seminorm(res.traj, cfg.zhou_p, cfg.zhou_q, cfg.zhou_theta, cfg.zhou_hat);
    rep.scalars["zhou_initial"] = z.initial;
    rep.scalars["zhou_seminorm"] = z.seminorm;

    CsvTable pairs({"q", "r", "admissible", "norm"});
    for (const auto& pr : cfg.pairs) {
        const double v = spacetime_norm(res.traj, pr.q, pr.r, TimeTransform::identity);
        rep.scalars["spacetime:" + label(pr.q) + "," + label(pr.r)] = v;
        pairs.add_row({pr.q.is_infinite() ? INFINITY : pr.q.value(), pr.r.is_infinite() ? INFINITY : pr.r.value(),
                       is_admissible(cfg.model.alpha, g.dim(), pr.q, pr.r) ? 1.0 : 0.0, v});
    }
    pairs.write(out / "spacetime.csv");

    if (g.dim() == 1 && !cfg.monitor_p.is_infinite())
        rep.scalars["strichartz_1d:" + label(cfg.monitor_p)] = strichartz_1d_norm(res.traj, cfg.monitor_p.value());

    CsvTable iso({"p", "relative_error"});
    for (const Exponent& p : cfg.isometry_p) {
        double worst = 0.0;
        for (const auto& f : psi0) {
            const double before = hat_lp_norm(g, f, p);
            if (before == 0.0) continue;
            const double after = hat_lp_norm(g, free_propagate(g, cfg.model.alpha, cfg.solve.T, f), p);
            worst = std::max(worst, std::abs(after - before) / before);
        }
        rep.scalars["isometry:" + label(p)] = worst;
        iso.add_row({p.is_infinite() ? INFINITY : p.value(), worst});
    }
    iso.write(out / "isometry.csv");
    return rep;
}

ScanReport illposedness_scan(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    GrowthScanSpec spec = cfg.scan;
    spec.model = cfg.model;
    ScanReport rep = growth_scan(spec, bump_family(cfg.model.d, spec.p, cfg.scales));
    rep.kind = "illposedness-scan";
    CsvTable table({"h", "norm_coulomb", "norm_yukawa", "node_change_coulomb", "node_change_yukawa"});
    const auto& h = rep.series.at("h");
    for (std::size_t i = 0; i < h.size(); ++i)
        table.add_row({h[i], rep.series.at("norm:coulomb")[i], rep.series.at("norm:yukawa")[i],
                       rep.series.at("node_change:coulomb")[i], rep.series.at("node_change:yukawa")[i]});
    table.write(out / "scan.csv");

    if (!cfg.taylor_times.empty()) {
        const SpectralGrid g(cfg.model.d, cfg.grid.L, cfg.grid.M);
        const BumpPair bp = bump_pair(g);
        ModelParams m = cfg.model;
        m.a = 0.0;
        const Exponent p = std::isinf(spec.p) ? Exponent::infinity() : Exponent(spec.p);
        const ScanReport tr = taylor_remainder(m, g, std::vector<Field>{bp.lower, bp.upper}, cfg.taylor_times, p,
                                               spec.nodes);
        CsvTable tt({"t", "remainder", "node_change"});
        for (std::size_t i = 0; i < cfg.taylor_times.size(); ++i)
            tt.add_row({tr.series.at("t")[i], tr.series.at("remainder")[i], tr.series.at("node_change")[i]});
        tt.write(out / "taylor.csv");
        rep.scalars["taylor_spread"] = tr.scalars.at("spread");
        rep.scalars["taylor_max_halving_ratio"] = tr.scalars.at("max_halving_ratio");
    }
    return rep;
}

ScanReport counterexample(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const double gamma = cfg.model.gamma;
    const double a = cfg.counterexample_a;
    const double b = counterexample_solve(gamma, a);
    const CounterexampleMoments mom = counterexample_moments(gamma, a, b);
    ScanReport rep;
    rep.kind = "counterexample";
    rep.scalars["gamma"] = gamma;
    rep.scalars["a"] = a;
    rep.scalars["b"] = b;
    rep.scalars["root_residual"] = counterexample_g(gamma, b) - std::pow(a, gamma + 1.0);
    rep.scalars["full_moment"] = mom.full;
    rep.scalars["inner_moment"] = mom.inner;
    rep.scalars["inner_closed_form"] = 2.0 * std::pow(a, gamma + 1.0) / (gamma * (gamma + 1.0));
    CsvTable table({"x", "H"});
    const double reach = 4.0 + 2.0 * b;
    const int n = 801;
    for (int i = 0; i < n; ++i) {
        const double x = -reach + 2.0 * reach * i / (n - 1);
        table.add_row({x, h_ab_profile(a, b, x)});
    }
    table.write(out / "profile.csv");
    return rep;
}

}  // namespace

Ensemble initial_data(const ExperimentConfig& cfg, const SpectralGrid& g) {
    const int N = cfg.model.N;
    Ensemble psi;
    if (cfg.data == InitialData::bump) {
        const BumpPair bp = bump_pair(g);
        psi.push_back(bp.lower);
        if (N > 1) psi.push_back(bp.upper);
        while (static_cast<int>(psi.size()) < N) psi.emplace_back(g.size(), cplx(0.0));
        return psi;
    }
    auto r2 = [](const std::array<double, 3>& x, double shift) {
        return (x[0] - shift) * (x[0] - shift) + x[1] * x[1] + x[2] * x[2];
    };
    psi.push_back(sample(g, [&](const auto& x) { return cplx(std::exp(-r2(x, 0.0))); }));
    if (N > 1)
        psi.push_back(sample(g, [&](const auto& x) {
            return cplx(x[0] * std::exp(-r2(x, 1.0)), 0.3 * std::exp(-r2(x, 0.0)));
        }));
    for (int k = 2; k < N; ++k)
        psi.push_back(sample(g, [&](const auto& x) { return cplx(std::exp(-0.5 * r2(x, 0.5 * (k - 1)))); }));
    return psi;
}

ScanReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    ScanReport rep;
    switch (cfg.kind) {
        case ExperimentKind::simulate: rep = simulate(cfg, out); break;
        case ExperimentKind::verify_factorization: rep = verify_factorization(cfg, out); break;
        case ExperimentKind::verify_trilinear: rep = verify_trilinear(cfg, out); break;
        case ExperimentKind::norms: rep = norms(cfg, out); break;
        case ExperimentKind::illposedness_scan: rep = illposedness_scan(cfg, out); break;
        case ExperimentKind::counterexample: rep = counterexample(cfg, out); break;
    }
    stamp(rep, cfg);
    write_json(out / "report.json", rep.to_json());
    return rep;
}

nlohmann::ordered_json error_json(const std::string& type, const std::string& message,
                                  const std::vector<std::string>& violations) {
    nlohmann::ordered_json j;
    j["status"] = "error";
    j["type"] = type;
    j["message"] = message;
    j["violations"] = violations;
    return j;
}

}  // namespace hfsim
