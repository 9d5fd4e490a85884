#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "nle/diagnostics.hpp"
#include "nle/errors.hpp"
#include "nle/io.hpp"
#include "nle/local_eikonal.hpp"
#include "nle/scenario.hpp"
#include "nle/slepcev_engine.hpp"
#include "nle/weak_engine.hpp"

namespace nle {

namespace {

struct EngineRun {
    Trajectory u;
    std::vector<OccupancyField> chi;  // empty for engines without an occupancy
    Manifest extra;
    bool converged = true;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

int step_of(const Trajectory& t, const ScalarField& f) {
    if (t.dt <= 0.0) return 0;
    return int(std::lround((f.time - t.frames.front().time) / t.dt));
}

/// Keeps the initial frame, every `every`-th step and the last frame.
std::vector<std::size_t> kept_frames(const Trajectory& t, int every) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < t.frames.size(); ++k)
        if (step_of(t, t.frames[k]) % every == 0 || k + 1 == t.frames.size()) out.push_back(k);
    return out;
}

Trajectory subsample(const Trajectory& t, int every) {
    Trajectory out;
    out.dt = t.dt;
    out.steps = t.steps;
    out.store_every = every;
    for (std::size_t k : kept_frames(t, every)) out.frames.push_back(t.frames[k]);
    return out;
}

StepControl base_control(const ScenarioConfig& cfg) {
    StepControl c;
    c.cfl = cfg.cfl;
    c.t_end = cfg.horizon;
    c.tracked_level = cfg.collar_check_level;
    return c;
}

EngineRun run_engine(const ScenarioConfig& cfg) {
    EngineRun r;
    switch (cfg.engine) {
    case Engine::local: {
        const ScalarField u0 = make_signed_initial(cfg.grid, cfg.initial);
        StepControl ctrl = base_control(cfg);
        ctrl.speed_bound = std::max(cfg.c1.M1, 1e-12);
        ctrl.store_every = cfg.store_every;
        const Grid g = cfg.grid;
        const ExternalVelocity c1 = cfg.c1;
        r.u = solve_fixed_speed(
            u0, [g, c1](double t, double) { return SpeedField(c1.sample(g, t).values); }, ctrl);
        break;
    }
    case Engine::weak: {
        const ScalarField u0 = make_signed_initial(cfg.grid, cfg.initial);
        FixedPointConfig fp;
        fp.eps_schedule = cfg.eps_schedule;
        fp.max_picard = cfg.max_picard;
        fp.tol = cfg.tol;
        fp.relax = cfg.relax;
        fp.stepper = base_control(cfg);
        WeakSolution ws = solve_weak(u0, cfg.kernel, cfg.c1, fp);
        r.converged = ws.converged;
        r.extra["residual"] = fmt(ws.residual);
        r.extra["eps_final"] = fmt(ws.eps_final);
        r.extra["classical"] = ws.classical ? "1" : "0";
        r.extra["sandwich_violations"] = std::to_string(ws.sandwich.violations);
        r.extra["sandwich_out_of_band"] = std::to_string(ws.sandwich.out_of_band);
        std::string iters;
        for (int it : ws.iterations_per_eps) iters += (iters.empty() ? "" : ",") + std::to_string(it);
        r.extra["picard_iterations"] = iters;
        r.u = std::move(ws.u);
        r.chi = std::move(ws.chi);
        break;
    }
    case Engine::slepcev: {
        const ScalarField u0 = make_signed_initial(cfg.grid, cfg.initial);
        SlepcevConfig sc;
        sc.mode = cfg.mode;
        sc.stepper = base_control(cfg);
        sc.store_every = cfg.store_every;
        r.u = solve_slepcev(u0, cfg.kernel, cfg.c1, sc);
        r.extra["mode"] = cfg.mode.kind == SlepcevMode::Kind::exact ? "exact" : "binned";
        break;
    }
    case Engine::counterexample: {
        const double gamma = cfg.gamma;
        Counterexample ce = counterexample_family([gamma](double) { return gamma; }, cfg.grid, cfg.horizon, cfg.cfl);
        r.extra["gamma"] = fmt(gamma);
        r.u = std::move(ce.u);
        r.chi = std::move(ce.chi);
        break;
    }
    }
    return r;
}

std::filesystem::path output_dir(const ScenarioConfig& cfg) {
    if (cfg.directory.is_absolute()) return cfg.directory;
    if (const char* root = std::getenv("NLE_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / cfg.directory;
    return cfg.directory;
}

std::string numbered(const char* stem, int step, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05d.%s", stem, step, ext);
    return buf;
}

const char* engine_name(Engine e) {
    switch (e) {
    case Engine::weak: return "weak";
    case Engine::slepcev: return "slepcev";
    case Engine::local: return "local";
    case Engine::counterexample: return "counterexample";
    }
    return "?";
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg) {
    RunOutcome out;
    out.directory = output_dir(cfg);
    Manifest m;
    m["name"] = cfg.name;
    m["engine"] = engine_name(cfg.engine);
    m["config"] = cfg.resolved_json;
    m["dim"] = std::to_string(cfg.grid.dim());
    m["n"] = std::to_string(cfg.grid.n());
    m["h"] = fmt(cfg.grid.h());
    m["half_width"] = fmt(cfg.grid.half_width());
    m["M0"] = fmt(cfg.kernel.M0());
    m["L0"] = fmt(cfg.kernel.L0());
    m["M1"] = fmt(cfg.c1.M1);
    m["L1"] = fmt(cfg.c1.L1);

    auto finish = [&](int code, const std::string& msg) {
        out.exit_code = code;
        out.message = msg;
        m["exit_code"] = std::to_string(code);
        if (!msg.empty()) m["message"] = msg;
        try {
            std::filesystem::create_directories(out.directory);
            write_manifest(out.directory / "manifest.txt", m);
        } catch (const std::exception& e) {
            out.message += (out.message.empty() ? "" : "; ") + std::string("cannot write manifest: ") + e.what();
            if (out.exit_code == 0) out.exit_code = 2;
        }
        return out;
    };

    EngineRun run;
    std::optional<Trajectory> reference;
    try {
        run = run_engine(cfg);
        if (cfg.reference_json) {
            const ScenarioConfig rc = parse_config(*cfg.reference_json);
            if (!rc.grid.same_as(cfg.grid)) throw ConfigError("config field 'reference': grid differs from the run");
            reference = subsample(run_engine(rc).u, cfg.store_every);
        }
    } catch (const ConfigError& e) {
        return finish(1, e.what());
    } catch (const GridMismatch& e) {
        return finish(1, e.what());
    } catch (const NumericalError& e) {
        return finish(2, e.what());
    }

    m["steps"] = std::to_string(run.u.steps);
    m["dt"] = fmt(run.u.dt);
    m["t_end"] = fmt(run.u.back().time);
    m["converged"] = run.converged ? "1" : "0";
    for (const auto& [k, v] : run.extra) m[k] = v;

    try {
        std::filesystem::create_directories(out.directory);
        const Trajectory stored = subsample(run.u, cfg.store_every);
        const auto idx = kept_frames(run.u, cfg.store_every);
        for (std::size_t s = 0; s < idx.size(); ++s) {
            const ScalarField& f = run.u.frames[idx[s]];
            const int step = step_of(run.u, f);
            write_snapshot(out.directory / numbered("u", step, "dls"), f);
            if (!run.chi.empty()) {
                // chi on [t_s, t_s + dt); the final time has none, so the last interval's is repeated.
                const std::size_t c = std::min(std::size_t(step), run.chi.size() - 1);
                const OccupancyField& o = run.chi[c];
                write_snapshot(out.directory / numbered("chi", step, "dls"), ScalarField(o.grid, o.values, f.time));
            }
            if (cfg.images) write_pgm(out.directory / numbered("u", step, "pgm"), f, default_band(f));
            if (cfg.csv) write_field_csv(out.directory / numbered("u", step, "csv"), f);
        }
        RunReport report;
        try {
            report = build_report(stored, reference ? &*reference : nullptr);
        } catch (const GridMismatch& e) {
            return finish(1, std::string("config field 'reference': ") + e.what());
        }
        std::ofstream os(out.directory / "report.csv");
        report.write_csv(os);
        if (!os) throw NumericalError("cannot write report.csv");
    } catch (const NumericalError& e) {
        return finish(2, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return finish(2, e.what());
    }

    if (!run.converged) return finish(3, "fixed-point iteration did not reach the tolerance; results written");
    return finish(0, "");
}

RunOutcome run_config_file(const std::filesystem::path& path) {
    try {
        return run_scenario(load_config(path));
    } catch (const ConfigError& e) {
        RunOutcome o;
        o.exit_code = 1;
        o.message = e.what();
        return o;
    } catch (const nlohmann::json::exception& e) {
        RunOutcome o;
        o.exit_code = 1;
        o.message = std::string("config: ") + e.what();
        return o;
    }
}

namespace {

std::map<int, std::filesystem::path> snapshots(const std::filesystem::path& dir) {
    std::map<int, std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string f = e.path().filename().string();
        if (f.size() == 11 && f.rfind("u_", 0) == 0 && e.path().extension() == ".dls")
            out[std::stoi(f.substr(2, 5))] = e.path();
    }
    return out;
}

}  // namespace

int compare_runs(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out,
                 std::string& error) {
    for (const auto& d : {a, b}) {
        if (!std::filesystem::is_directory(d)) {
            error = "not a run directory: " + d.string();
            return 1;
        }
    }
    const auto sa = snapshots(a), sb = snapshots(b);
    if (sa.empty() || sb.empty()) {
        error = "run directory without snapshots";
        return 1;
    }
    Trajectory ta, tb;
    for (const auto& [step, path] : sa) {
        const auto it = sb.find(step);
        if (it == sb.end()) continue;
        ta.frames.push_back(read_snapshot(path));
        tb.frames.push_back(read_snapshot(it->second));
        if (!ta.frames.back().grid.same_as(tb.frames.back().grid)) {
            error = "grids differ between the runs";
            return 1;
        }
    }
    if (ta.frames.empty()) {
        error = "the runs share no stored time";
        return 1;
    }
    std::vector<double> alpha;
    try {
        alpha = alpha_series(ta, tb);
    } catch (const GridMismatch& e) {
        error = e.what();
        return 1;
    }
    out << "time,alpha,symdiff_closed,symdiff_open,radius_a,radius_b,radius_diff\n";
    out.precision(12);
    for (std::size_t s = 0; s < ta.frames.size(); ++s) {
        const ScalarField &fa = ta.frames[s], &fb = tb.frames[s];
        const auto ca = superlevel_indicator(fa, 0.0, false), cb = superlevel_indicator(fb, 0.0, false);
        const auto oa = superlevel_indicator(fa, 0.0, true), ob = superlevel_indicator(fb, 0.0, true);
        const double ra = max_radius(ca), rb = max_radius(cb);
        out << fa.time << ',' << alpha[s] << ',' << symmetric_difference(ca, cb) << ','
            << symmetric_difference(oa, ob) << ',' << ra << ',' << rb << ',' << std::abs(ra - rb) << '\n';
    }
    return 0;
}

}  // namespace nle
