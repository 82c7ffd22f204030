#include "vibratrak/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vibratrak/errors.hpp"

namespace vibratrak {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at '" + path + "': " + what);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  bool required, double fallback = 0.0) {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "missing required key");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key, bool required,
            int fallback = 0) {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "missing required key");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       bool required, const std::string& fallback = "") {
    if (!obj.contains(key)) {
        if (required) fail(path + "." + key, "missing required key");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

ForceModel parse_force(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    const std::string kind = get_string(obj, path, "kind", true);
    auto num = [&](const char* key, bool required = true, double fb = 0.0) {
        return get_number(obj, path, key, required, fb);
    };
    ForceModel force;
    if (kind == "stiffening_duffing") {
        reject_unknown(obj, path, {"kind", "alpha"});
        force = StiffeningDuffing{num("alpha")};
    } else if (kind == "quintic") {
        reject_unknown(obj, path, {"kind", "eta"});
        force = QuinticStiffness{num("eta")};
    } else if (kind == "softening_duffing") {
        reject_unknown(obj, path, {"kind", "alpha"});
        force = SofteningDuffing{num("alpha")};
    } else if (kind == "softening_ii") {
        reject_unknown(obj, path, {"kind", "k_t", "F_s", "chi", "beta"});
        force = SofteningII{num("k_t"), num("F_s"), num("chi", false, 0.0), num("beta", false, 0.0)};
    } else if (kind == "unilateral_spring") {
        reject_unknown(obj, path, {"kind", "k_nl"});
        force = UnilateralSpring{num("k_nl")};
    } else if (kind == "cubic_damping") {
        reject_unknown(obj, path, {"kind", "gamma"});
        force = CubicDamping{num("gamma")};
    } else if (kind == "jenkins") {
        reject_unknown(obj, path, {"kind", "k_t", "F_s"});
        force = Jenkins{num("k_t"), num("F_s")};
    } else if (kind == "iwan") {
        reject_unknown(obj, path, {"kind", "k_t", "F_s", "chi", "beta", "n_sliders"});
        force = Iwan{num("k_t"), num("F_s"), num("chi", false, 0.0), num("beta", false, 0.0),
                     get_int(obj, path, "n_sliders", false, 100)};
    } else {
        fail(path + ".kind", "unknown force kind '" + kind + "'");
    }
    try {
        validate(force);
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return force;
}

std::vector<double> parse_grid(const json& obj, const std::string& path) {
    if (obj.is_array()) {
        std::vector<double> values;
        for (const auto& v : obj) {
            if (!v.is_number()) fail(path, "expected numbers in the list");
            values.push_back(v.get<double>());
        }
        return values;
    }
    if (!obj.is_object()) fail(path, "expected a list of numbers or {min, max, count, scale}");
    reject_unknown(obj, path, {"min", "max", "count", "scale"});
    const double lo = get_number(obj, path, "min", true);
    const double hi = get_number(obj, path, "max", true);
    const int count = get_int(obj, path, "count", true);
    const std::string scale = get_string(obj, path, "scale", false, "log");
    if (count < 1) fail(path + ".count", "count must be >= 1");
    if (scale != "log" && scale != "linear") fail(path + ".scale", "expected 'log' or 'linear'");
    if (scale == "log" && !(lo > 0.0)) fail(path + ".min", "log scale needs min > 0");
    std::vector<double> values(count);
    for (int i = 0; i < count; ++i) {
        const double u = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        values[i] = scale == "log" ? lo * std::pow(hi / lo, u) : lo + u * (hi - lo);
    }
    return values;
}

}  // namespace

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Apriori: return "apriori";
        case RunMode::Frc: return "frc";
        case RunMode::Vprnm: return "vprnm";
        case RunMode::Compare: return "compare";
        case RunMode::Bench: return "bench";
        case RunMode::Validate: return "validate";
    }
    return "?";
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(doc, "",
                   {"mode", "system", "target_harmonic", "sweep", "continuation", "solver",
                    "compare", "output", "threads"});

    RunConfig cfg;
    const std::string mode = get_string(doc, "", "mode", true);
    if (mode == "apriori") cfg.mode = RunMode::Apriori;
    else if (mode == "frc") cfg.mode = RunMode::Frc;
    else if (mode == "vprnm") cfg.mode = RunMode::Vprnm;
    else if (mode == "compare") cfg.mode = RunMode::Compare;
    else if (mode == "bench") cfg.mode = RunMode::Bench;
    else if (mode == "validate") cfg.mode = RunMode::Validate;
    else fail("mode", "unknown mode '" + mode + "'");

    if (cfg.mode != RunMode::Validate) {
        if (!doc.contains("system")) fail("system", "missing required key");
        const json& sysj = doc.at("system");
        if (!sysj.is_object()) fail("system", "expected an object");
        reject_unknown(sysj, "system", {"m", "c", "k", "force", "H", "Nt", "x_ref"});
        if (!sysj.contains("force")) fail("system.force", "missing required key");
        const ForceModel force = parse_force(sysj.at("force"), "system.force");
        try {
            cfg.system = SystemConfig::make(
                get_number(sysj, "system", "m", false, 1.0), get_number(sysj, "system", "c", true),
                get_number(sysj, "system", "k", true), force, get_int(sysj, "system", "H", true),
                get_int(sysj, "system", "Nt", false, 1024),
                get_number(sysj, "system", "x_ref", false, 0.0));
        } catch (const std::invalid_argument& e) {
            fail("system", e.what());
        }
    }

    cfg.target_harmonic = get_int(doc, "", "target_harmonic", false, 3);

    if (doc.contains("sweep")) {
        const json& sw = doc.at("sweep");
        if (!sw.is_object()) fail("sweep", "expected an object");
        reject_unknown(sw, "sweep",
                       {"force_levels", "freq_range", "amplitudes", "omega", "x3_ratio"});
        if (sw.contains("force_levels"))
            cfg.sweep.force_levels_hat = parse_grid(sw.at("force_levels"), "sweep.force_levels");
        if (sw.contains("freq_range")) {
            const json& fr = sw.at("freq_range");
            if (!fr.is_array() || fr.size() != 2 || !fr[0].is_number() || !fr[1].is_number())
                fail("sweep.freq_range", "expected [min, max]");
            cfg.sweep.freq_min_hat = fr[0].get<double>();
            cfg.sweep.freq_max_hat = fr[1].get<double>();
            if (!(cfg.sweep.freq_min_hat > 0.0 && cfg.sweep.freq_max_hat >= cfg.sweep.freq_min_hat))
                fail("sweep.freq_range", "need 0 < min <= max");
        }
        if (sw.contains("amplitudes"))
            cfg.sweep.amplitudes_over_xref = parse_grid(sw.at("amplitudes"), "sweep.amplitudes");
        cfg.sweep.omega_hat = get_number(sw, "sweep", "omega", false, 0.0);
        cfg.sweep.x3_ratio = get_number(sw, "sweep", "x3_ratio", false, 0.0);
    }

    if (doc.contains("continuation")) {
        const json& co = doc.at("continuation");
        if (!co.is_object()) fail("continuation", "expected an object");
        reject_unknown(co, "continuation",
                       {"ds0", "ds_min", "ds_max", "max_points", "tol", "max_corrector_iter"});
        cfg.continuation.ds0 = get_number(co, "continuation", "ds0", false, cfg.continuation.ds0);
        cfg.continuation.ds_min =
            get_number(co, "continuation", "ds_min", false, cfg.continuation.ds_min);
        cfg.continuation.ds_max =
            get_number(co, "continuation", "ds_max", false, cfg.continuation.ds_max);
        cfg.continuation.max_points =
            get_int(co, "continuation", "max_points", false, cfg.continuation.max_points);
        cfg.continuation.tol = get_number(co, "continuation", "tol", false, cfg.continuation.tol);
        cfg.continuation.max_corrector_iter = get_int(co, "continuation", "max_corrector_iter",
                                                      false, cfg.continuation.max_corrector_iter);
        if (!(cfg.continuation.ds_min > 0.0 && cfg.continuation.ds_min <= cfg.continuation.ds0 &&
              cfg.continuation.ds0 <= cfg.continuation.ds_max))
            fail("continuation", "need 0 < ds_min <= ds0 <= ds_max");
    }

    if (doc.contains("solver")) {
        const json& so = doc.at("solver");
        if (!so.is_object()) fail("solver", "expected an object");
        reject_unknown(so, "solver", {"tol", "max_iter", "fast_aft"});
        cfg.solver.tol = get_number(so, "solver", "tol", false, cfg.solver.tol);
        cfg.solver.max_iter = get_int(so, "solver", "max_iter", false, cfg.solver.max_iter);
        if (so.contains("fast_aft")) {
            if (!so.at("fast_aft").is_boolean()) fail("solver.fast_aft", "expected a boolean");
            cfg.solver.fast_aft = so.at("fast_aft").get<bool>();
        }
    }

    if (doc.contains("compare")) {
        const json& cm = doc.at("compare");
        if (!cm.is_object()) fail("compare", "expected an object");
        reject_unknown(cm, "compare", {"freq_window_rel", "log_force"});
        if (cm.contains("freq_window_rel")) {
            const json& w = cm.at("freq_window_rel");
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
                fail("compare.freq_window_rel", "expected [lo, hi]");
            cfg.compare.window_lo = w[0].get<double>();
            cfg.compare.window_hi = w[1].get<double>();
        }
        if (cm.contains("log_force")) {
            if (!cm.at("log_force").is_boolean()) fail("compare.log_force", "expected a boolean");
            cfg.compare.log_force = cm.at("log_force").get<bool>();
        }
    }

    if (doc.contains("output")) {
        const json& out = doc.at("output");
        if (!out.is_object()) fail("output", "expected an object");
        reject_unknown(out, "output", {"dir", "format"});
        cfg.out_dir = get_string(out, "output", "dir", false, ".");
        cfg.format = get_string(out, "output", "format", false, "csv");
        if (cfg.format != "csv") fail("output.format", "only 'csv' is supported");
    }

    cfg.threads = get_int(doc, "", "threads", false, 0);

    // Mode-specific requirements.
    const bool needs_forces = cfg.mode == RunMode::Frc || cfg.mode == RunMode::Vprnm ||
                              cfg.mode == RunMode::Compare || cfg.mode == RunMode::Bench;
    if (needs_forces && cfg.sweep.force_levels_hat.empty())
        fail("sweep.force_levels", "this mode needs a non-empty force level list");
    for (double f : cfg.sweep.force_levels_hat)
        if (!(f > 0.0)) fail("sweep.force_levels", "force levels must be > 0");
    const bool needs_freq =
        cfg.mode == RunMode::Frc || cfg.mode == RunMode::Compare || cfg.mode == RunMode::Bench;
    if (needs_freq && !(cfg.sweep.freq_max_hat > 0.0))
        fail("sweep.freq_range", "this mode needs a frequency range");
    if (cfg.mode == RunMode::Apriori) {
        if (cfg.sweep.amplitudes_over_xref.empty())
            fail("sweep.amplitudes", "apriori mode needs an amplitude grid");
        if (!(cfg.sweep.omega_hat > 0.0))
            fail("sweep.omega", "apriori mode needs an evaluation frequency");
    }
    const bool needs_n = cfg.mode == RunMode::Apriori || cfg.mode == RunMode::Vprnm ||
                         cfg.mode == RunMode::Compare || cfg.mode == RunMode::Bench;
    if (needs_n && cfg.mode != RunMode::Validate) {
        if (cfg.target_harmonic < 2 || cfg.target_harmonic > cfg.system.H)
            fail("target_harmonic", "need 2 <= target_harmonic <= system.H");
    }

    cfg.echo = doc.dump(2);
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace vibratrak
