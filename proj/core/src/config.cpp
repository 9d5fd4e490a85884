#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nle/io.hpp"
#include "nle/scenario.hpp"

namespace nle {

using nlohmann::json;

namespace {

struct Builtin {
    const char* name;
    const char* description;
    const char* json;
};

// The counterexample has c0 = 1; a box of radius 3 equals 1 on every pair of points the
// zero level can see, so the velocity of that level is unchanged.
const Builtin kBuiltins[] = {
    {"example_3_2", "1-D counterexample family U_gamma (gamma constant), horizon 2",
     R"({"name":"example_3_2","engine":"counterexample",
         "grid":{"dim":1,"n":801,"half_width":4.0},
         "kernel":{"type":"box","radius":3.0,"height":1.0},
         "c1":{"type":"example_3_2"},
         "initial":{"type":"interval","center":0.0,"half_length":1.0},
         "horizon":2.0,"solver":{"cfl":0.5,"gamma":1.0},
         "outputs":{"directory":"runs/example_3_2","store_every":50}})"},
    {"example_3_2_slepcev", "1-D level-set-invariant nonlocal solution of the counterexample data, horizon 2",
     R"({"name":"example_3_2_slepcev","engine":"slepcev",
         "grid":{"dim":1,"n":801,"half_width":4.0},
         "kernel":{"type":"box","radius":3.0,"height":1.0},
         "c1":{"type":"example_3_2"},
         "initial":{"type":"interval","center":0.0,"half_length":1.0},
         "horizon":2.0,"solver":{"cfl":0.5,"mode":"exact","collar_check_level":-0.02},
         "outputs":{"directory":"runs/example_3_2_slepcev","store_every":50}})"},
    {"example_3_2_weak", "1-D weak solution of the counterexample data on the shrinking phase, horizon 1",
     R"({"name":"example_3_2_weak","engine":"weak",
         "grid":{"dim":1,"n":801,"half_width":4.0},
         "kernel":{"type":"box","radius":3.0,"height":1.0},
         "c1":{"type":"example_3_2"},
         "initial":{"type":"interval","center":0.0,"half_length":1.0},
         "horizon":1.0,"solver":{"cfl":0.5,"max_picard":200,"tol":1e-6},
         "outputs":{"directory":"runs/example_3_2_weak","store_every":50}})"},
    {"expanding_two_disks", "2-D merger of two disks with speed bounded below by 1",
     R"({"name":"expanding_two_disks","engine":"weak",
         "grid":{"dim":2,"n":201,"half_width":2.0},
         "kernel":{"type":"gaussian_truncated","sigma":0.2,"radius":0.6,"amplitude":1.0},
         "c1":{"type":"constant","value":1.25},
         "initial":{"type":"disks","disks":[{"center":[-0.35,0.0],"radius":0.3},{"center":[0.35,0.0],"radius":0.3}]},
         "horizon":0.5,"solver":{"cfl":0.5,"max_picard":100,"tol":1e-6,"collar_check_level":-0.5},
         "outputs":{"directory":"runs/expanding_two_disks","store_every":10,"images":true}})"},
    {"radial_flat_kernel", "2-D disk under a flat kernel, front radius r' = c1 + pi r^2",
     R"({"name":"radial_flat_kernel","engine":"weak",
         "grid":{"dim":2,"n":201,"half_width":2.0},
         "kernel":{"type":"box","radius":1.0,"height":1.0},
         "c1":{"type":"constant","value":0.5},
         "initial":{"type":"disk","center":[0.0,0.0],"radius":0.2},
         "horizon":0.26,"solver":{"cfl":0.5,"max_picard":100,"tol":1e-6,"collar_check_level":-0.5},
         "outputs":{"directory":"runs/radial_flat_kernel","store_every":10}})"},
    {"expanding_interval", "1-D expanding interval, nonlocal speed at least 0.1",
     R"({"name":"expanding_interval","engine":"slepcev",
         "grid":{"dim":1,"n":401,"half_width":4.0},
         "kernel":{"type":"box","radius":0.5,"height":0.2},
         "c1":{"type":"constant","value":0.1},
         "initial":{"type":"interval","center":0.0,"half_length":0.5},
         "horizon":1.0,"solver":{"cfl":0.5},
         "outputs":{"directory":"runs/expanding_interval","store_every":20}})"},
    {"shrinking_interval", "1-D local eikonal with speed -1",
     R"({"name":"shrinking_interval","engine":"local",
         "grid":{"dim":1,"n":401,"half_width":4.0},
         "kernel":{"type":"zero"},
         "c1":{"type":"constant","value":-1.0},
         "initial":{"type":"interval","center":0.0,"half_length":1.0},
         "horizon":0.5,"solver":{"cfl":0.5},
         "outputs":{"directory":"runs/shrinking_interval","store_every":20}})"},
};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing required field");
    return j.at(key);
}

double num(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

double num_or(const json& j, const std::string& key, double dflt, const std::string& path) {
    return j.is_object() && j.contains(key) ? num(j, key, path) : dflt;
}

std::string str(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_string()) fail(path.empty() ? key : path + "." + key, "expected a string");
    return v.get<std::string>();
}

Point point(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || j.size() > 2) fail(path, "expected [x] or [x, y]");
    Point p{0.0, 0.0};
    for (std::size_t a = 0; a < j.size(); ++a) {
        if (!j[a].is_number()) fail(path, "expected numbers");
        p[a] = j[a].get<double>();
    }
    return p;
}

Engine parse_engine(const std::string& s) {
    if (s == "weak") return Engine::weak;
    if (s == "slepcev") return Engine::slepcev;
    if (s == "local") return Engine::local;
    if (s == "counterexample") return Engine::counterexample;
    fail("engine", "unknown engine '" + s + "' (weak, slepcev, local, counterexample)");
}

KernelSpec parse_kernel(const json& k, const Grid& g, const std::filesystem::path& base) {
    const std::string type = str(k, "type", "kernel");
    const int d = g.dim();
    const double h = g.h();
    KernelSpec spec;
    if (type == "zero") {
        spec = KernelSpec::zero(d, h);
    } else if (type == "box") {
        spec = KernelSpec::box(d, h, num(k, "radius", "kernel"), num_or(k, "height", 1.0, "kernel"));
    } else if (type == "gaussian_truncated") {
        spec = KernelSpec::gaussian_truncated(d, h, num(k, "sigma", "kernel"), num(k, "radius", "kernel"),
                                              num_or(k, "amplitude", 1.0, "kernel"));
    } else if (type == "cone") {
        spec = KernelSpec::cone(d, h, num(k, "radius", "kernel"), num_or(k, "height", 1.0, "kernel"));
    } else if (type == "file") {
        std::filesystem::path p = str(k, "path", "kernel");
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p)) fail("kernel.path", "file not found: " + p.string());
        spec = KernelSpec::from_field(read_snapshot(p));
        if (spec.dim() != d || std::abs(spec.h() - h) > 1e-12 * h)
            fail("kernel.path", "kernel snapshot must match the grid dimension and spacing");
    } else {
        fail("kernel.type", "unknown kernel '" + type + "' (zero, box, gaussian_truncated, cone, file)");
    }
    if (k.contains("N0")) spec.N0 = num(k, "N0", "kernel");
    return spec;
}

ExternalVelocity parse_c1(const json& c) {
    const std::string type = str(c, "type", "c1");
    if (type == "constant") return ExternalVelocity::constant(num(c, "value", "c1"));
    if (type == "example_3_2")
        return ExternalVelocity::of_time([](double t) { return 2.0 * (t - 1.0) * (2.0 - t); }, 0.5);
    if (type == "sine") {
        const double off = num_or(c, "offset", 0.0, "c1"), amp = num(c, "amplitude", "c1"),
                     freq = num(c, "frequency", "c1");
        return ExternalVelocity::of_space_time(
            [=](const Point& p, double) { return off + amp * std::sin(freq * p[0]); }, std::abs(off) + std::abs(amp),
            std::abs(amp * freq));
    }
    fail("c1.type", "unknown velocity '" + type + "' (constant, example_3_2, sine)");
}

ShapeSpec parse_initial(const json& s, int dim) {
    const std::string type = str(s, "type", "initial");
    if (type == "interval") {
        if (dim != 1) fail("initial.type", "interval needs grid.dim = 1");
        return IntervalShape{num_or(s, "center", 0.0, "initial"), num(s, "half_length", "initial")};
    }
    auto disk = [&](const json& d, const std::string& path) {
        DiskShape out;
        out.center = d.contains("center") ? point(d.at("center"), path + ".center") : Point{0.0, 0.0};
        out.radius = num(d, "radius", path);
        if (!(out.radius > 0.0)) fail(path + ".radius", "must be positive");
        return out;
    };
    if (type == "disk") return disk(s, "initial");
    if (type == "disks") {
        const json& arr = need(s, "disks", "initial");
        if (!arr.is_array() || arr.empty()) fail("initial.disks", "expected a nonempty array");
        DiskUnionShape u;
        for (std::size_t i = 0; i < arr.size(); ++i) u.disks.push_back(disk(arr[i], "initial.disks"));
        return u;
    }
    fail("initial.type", "unknown shape '" + type + "' (interval, disk, disks)");
}

json resolve(const json& raw) {
    json j = raw;
    if (raw.contains("scenario")) {
        if (!raw.at("scenario").is_string()) fail("scenario", "expected a built-in scenario name");
        json base = json::parse(builtin_json(raw.at("scenario").get<std::string>()));
        json patch = raw;
        patch.erase("scenario");
        base.merge_patch(patch);
        j = base;
    }
    return j;
}

}  // namespace

std::vector<std::string> builtin_scenarios() {
    std::vector<std::string> out;
    for (const auto& b : kBuiltins) out.emplace_back(b.name);
    return out;
}

std::string builtin_description(const std::string& name) {
    for (const auto& b : kBuiltins)
        if (name == b.name) return b.description;
    throw ConfigError("config field 'scenario': unknown built-in '" + name + "'");
}

std::string builtin_json(const std::string& name) {
    for (const auto& b : kBuiltins)
        if (name == b.name) return b.json;
    throw ConfigError("config field 'scenario': unknown built-in '" + name + "'");
}

ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json raw;
    try {
        raw = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    const json j = resolve(raw);

    ScenarioConfig c;
    c.name = j.contains("name") ? str(j, "name", "") : std::string("run");
    c.engine = parse_engine(str(j, "engine", ""));

    const json& g = need(j, "grid", "");
    const int dim = int(num(g, "dim", "grid"));
    const Point origin = g.contains("origin") ? point(g.at("origin"), "grid.origin") : Point{0.0, 0.0};
    c.grid = Grid::make(dim, num(g, "half_width", "grid"), int(num(g, "n", "grid")), origin);

    c.kernel = j.contains("kernel") ? parse_kernel(j.at("kernel"), c.grid, base_dir) : KernelSpec::zero(dim, c.grid.h());
    c.c1 = parse_c1(need(j, "c1", ""));
    c.initial = parse_initial(need(j, "initial", ""), dim);
    c.horizon = num(j, "horizon", "");
    if (!(c.horizon > 0.0)) fail("horizon", "must be positive");

    const json solver = j.contains("solver") ? j.at("solver") : json::object();
    c.cfl = num_or(solver, "cfl", 0.5, "solver");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) fail("solver.cfl", "must lie in (0, 1]");
    if (solver.contains("eps_schedule")) {
        for (const auto& e : solver.at("eps_schedule")) {
            if (!e.is_number()) fail("solver.eps_schedule", "expected numbers");
            c.eps_schedule.push_back(e.get<double>());
        }
    }
    if (solver.contains("eps_schedule_h")) {
        for (const auto& e : solver.at("eps_schedule_h")) {
            if (!e.is_number()) fail("solver.eps_schedule_h", "expected numbers");
            c.eps_schedule.push_back(e.get<double>() * c.grid.h());
        }
    }
    c.max_picard = int(num_or(solver, "max_picard", 200, "solver"));
    c.tol = num_or(solver, "tol", 1e-6, "solver");
    c.relax = num_or(solver, "relax", 1.0, "solver");
    if (solver.contains("mode")) {
        const std::string m = str(solver, "mode", "solver");
        if (m == "exact") {
            c.mode = SlepcevMode::exact();
        } else if (m == "binned") {
            c.mode = SlepcevMode::binned(int(num_or(solver, "bins", 64, "solver")));
            if (c.mode.bins < 2) fail("solver.bins", "must be >= 2");
        } else {
            fail("solver.mode", "expected 'exact' or 'binned'");
        }
    }
    c.gamma = num_or(solver, "gamma", 1.0, "solver");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("solver.gamma", "must lie in [0, 1]");
    if (solver.contains("collar_check_level")) {
        if (solver.at("collar_check_level").is_null())
            c.collar_check_level.reset();
        else
            c.collar_check_level = num(solver, "collar_check_level", "solver");
    }

    const json out = j.contains("outputs") ? j.at("outputs") : json::object();
    c.directory = out.contains("directory") ? std::filesystem::path(str(out, "directory", "outputs"))
                                            : std::filesystem::path("runs") / c.name;
    c.store_every = int(num_or(out, "store_every", 1, "outputs"));
    if (c.store_every < 1) fail("outputs.store_every", "must be >= 1");
    c.images = out.contains("images") && out.at("images").is_boolean() && out.at("images").get<bool>();
    c.csv = out.contains("csv") && out.at("csv").is_boolean() && out.at("csv").get<bool>();

    if (c.engine == Engine::counterexample && dim != 1) fail("grid.dim", "the counterexample engine is 1-D");
    if (c.engine == Engine::counterexample && c.horizon > 2.0) fail("horizon", "counterexample horizon is at most 2");
    if (c.engine == Engine::local && !c.kernel.is_zero()) fail("kernel", "the local engine takes no kernel");

    if (j.contains("reference")) {
        const json& r = j.at("reference");
        if (r.is_string()) {
            std::filesystem::path p = r.get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            std::ifstream is(p);
            if (!is) fail("reference", "file not found: " + p.string());
            std::stringstream ss;
            ss << is.rdbuf();
            c.reference_json = resolve(json::parse(ss.str())).dump();
        } else if (r.is_object()) {
            c.reference_json = resolve(r).dump();
        } else {
            fail("reference", "expected a config object or a path");
        }
    }
    c.resolved_json = j.dump();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    const auto base = path.parent_path();
    if (path.extension() == ".txt" || path.filename() == "manifest.txt") {
        const Manifest m = read_manifest(path);
        const auto it = m.find("config");
        if (it == m.end()) throw ConfigError("manifest has no config= line: " + path.string());
        return parse_config(it->second, base);
    }
    return parse_config(text, base);
}

}  // namespace nle
