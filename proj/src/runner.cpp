#include "vibratrak/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vibratrak/errors.hpp"
#include "vibratrak/validate.hpp"

namespace vibratrak {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV writing: RFC-4180 style, '.' decimal, LF endings, 17 significant
/// digits; no timing or other non-reproducible data in data files.
class CsvWriter {
  public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file '" + path.string() + "'");
        for (size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt(values[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

std::vector<std::string> branch_columns(int H, int n) {
    std::vector<std::string> cols{"force_N", "frequency_rad_per_s"};
    cols.push_back("X0_m");
    for (int k = 1; k <= H; ++k) {
        cols.push_back("X" + std::to_string(k) + "c_m");
        cols.push_back("X" + std::to_string(k) + "s_m");
    }
    cols.push_back("total_amplitude_m");
    cols.push_back("phase_" + std::to_string(n) + "_rad");
    cols.push_back("residual_norm_N");
    return cols;
}

std::vector<double> branch_row(double F, double omega, const HarmonicVector& X, int n,
                               double residual_norm) {
    std::vector<double> row{F, omega};
    for (int i = 0; i < X.size(); ++i) row.push_back(X[i]);
    row.push_back(total_amplitude(X, omega));
    double phase = std::numeric_limits<double>::quiet_NaN();
    if (X[idx_cos(n)] != 0.0 || X[idx_sin(n)] != 0.0) phase = harmonic_phase(X, n);
    row.push_back(phase);
    row.push_back(residual_norm);
    return row;
}

void run_pool(int threads, int tasks, const std::function<void(int)>& work) {
    if (threads <= 1 || tasks <= 1) {
        for (int i = 0; i < tasks; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int nw = std::min(threads, tasks);
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) work(i);
        });
    }
    for (auto& t : pool) t.join();
}

int effective_threads(const RunConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ContinuationConfig scaled_continuation(const RunConfig& cfg) {
    ContinuationConfig c = cfg.continuation;
    c.ds0 = std::min(c.ds0 * cfg.step_scale, c.ds_max * cfg.step_scale);
    c.ds_max = c.ds_max * cfg.step_scale;
    return c;
}

json metadata_json(const RunConfig& cfg, double wall_s, long long solves) {
    json meta;
    meta["config"] = json::parse(cfg.echo);
    meta["version"] = VIBRATRAK_VERSION;
    meta["mode"] = to_string(cfg.mode);
    meta["wall_time_s"] = wall_s;
    meta["newton_solves"] = solves;
    meta["threads"] = effective_threads(cfg);
    meta["step_scale"] = cfg.step_scale;
    return meta;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

/// Dimensional force and frequency from the nondimensional sweep values.
struct Units {
    double force;  // multiply F_hat
    double omega;  // multiply omega_hat
};

Units units_of(const SystemConfig& sys) {
    const Scales sc = nondimensionalize(sys);
    return Units{sys.k_lin * sys.x_ref, sc.omega0};
}

}  // namespace

FrcBranch compute_frc(const SystemConfig& sys, double F, double omega_lo, double omega_hi,
                      const ContinuationConfig& ccfg, const HbmOptions& hbm,
                      BranchDiagnostics* diag) {
    const int nc = 2 * sys.H + 1;
    ResidualFn fn = [&sys, F, &hbm](const Eigen::VectorXd& y, Eigen::VectorXd& r,
                                    Eigen::MatrixXd& J) {
        const HbmResidual res = hbm_residual(sys, y.head(y.size() - 1), y[y.size() - 1], F, hbm);
        r = res.R;
        J.resize(r.size(), r.size() + 1);
        J.leftCols(r.size()) = res.dR_dX;
        J.col(r.size()) = res.dR_domega;
    };
    ContinuationConfig cfg = ccfg;
    cfg.lambda_min = omega_lo;
    cfg.lambda_max = omega_hi;
    cfg.tol = hbm.tol;

    BranchDiagnostics local;
    BranchDiagnostics& dg = diag ? *diag : local;
    BranchPoint start;
    try {
        start = initial_point(fn, omega_lo, linear_frf(sys, omega_lo, F), cfg, &dg.corrector_solves);
    } catch (const SolverError&) {
        start = initial_point(fn, omega_lo, robust_hbm_solve(sys, omega_lo, F, hbm), cfg,
                              &dg.corrector_solves);
    }

    FrcBranch branch;
    branch.F = F;
    branch.points = continue_branch(fn, start.y, cfg, &dg);
    (void)nc;
    return branch;
}

std::vector<FrcBranch> compute_frc_grid(const SystemConfig& sys, const std::vector<double>& forces,
                                        double omega_lo, double omega_hi,
                                        const ContinuationConfig& ccfg, const HbmOptions& hbm,
                                        int threads, long long* total_solves,
                                        std::vector<std::string>* row_errors) {
    std::vector<FrcBranch> out(forces.size());
    std::vector<long long> solves(forces.size(), 0);
    std::vector<std::string> errors(forces.size());
    run_pool(threads, static_cast<int>(forces.size()), [&](int i) {
        BranchDiagnostics diag;
        try {
            out[i] = compute_frc(sys, forces[i], omega_lo, omega_hi, ccfg, hbm, &diag);
        } catch (const SolverError& e) {
            out[i].F = forces[i];  // solver failures leave an empty branch, run continues
            errors[i] = e.what();
        }
        solves[i] = diag.corrector_solves;
    });
    if (total_solves)
        for (long long sv : solves) *total_solves += sv;
    if (row_errors) *row_errors = std::move(errors);
    return out;
}

CompareResult run_compare(const RunConfig& cfg) {
    const SystemConfig& sys = cfg.system;
    const Units u = units_of(sys);
    const int n = cfg.target_harmonic;
    const ContinuationConfig ccfg = scaled_continuation(cfg);

    CompareResult result;

    std::vector<double> forces;
    for (double fh : cfg.sweep.force_levels_hat) forces.push_back(fh * u.force);

    const double t0 = now_s();
    result.frcs = compute_frc_grid(sys, forces, cfg.sweep.freq_min_hat * u.omega,
                                   cfg.sweep.freq_max_hat * u.omega, ccfg, cfg.solver,
                                   effective_threads(cfg), &result.hbm_solves);
    result.hbm_wall_s = now_s() - t0;

    for (const auto& branch : result.frcs) {
        if (branch.points.empty()) continue;
        const auto peaks = extract_superharmonic_peaks(sys, branch, n, cfg.solver);
        if (peaks.empty()) continue;
        // the resonance of harmonic n is its largest peak along the branch
        const auto best = std::max_element(
            peaks.begin(), peaks.end(),
            [](const PeakRecord& a, const PeakRecord& b) { return a.Xn_peak < b.Xn_peak; });
        result.peaks.push_back(*best);
        result.bands.push_back(force_band(branch, cfg.compare.window_lo * best->omega_peak,
                                          cfg.compare.window_hi * best->omega_peak));
    }

    const double t1 = now_s();
    VprnmOptions vopts;
    vopts.hbm = cfg.solver;
    vopts.continuation = ccfg;
    BranchDiagnostics vdiag;
    result.backbone = vprnm_backbone(sys, n, forces.front(), forces.back(), vopts, &vdiag);
    result.vprnm_solves = vdiag.corrector_solves;
    result.vprnm_wall_s = now_s() - t1;

    const bool normalize = std::holds_alternative<UnilateralSpring>(sys.force);
    if (!result.peaks.empty() && result.backbone.size() >= 2) {
        result.accuracy_percent = accuracy_metric(result.backbone, result.peaks, result.bands,
                                                  cfg.compare.log_force, normalize);
    } else {
        result.accuracy_percent = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

namespace {

ResultSet run_apriori(const RunConfig& cfg) {
    const Units u = units_of(cfg.system);
    const auto samples = apriori_sweep(cfg.system, cfg.target_harmonic,
                                       cfg.sweep.amplitudes_over_xref, cfg.sweep.omega_hat * u.omega,
                                       cfg.sweep.x3_ratio, cfg.solver);
    const fs::path path = fs::path(cfg.out_dir) / "apriori.csv";
    CsvWriter csv(path, {"X1_m", "X3_m", "harmonic_n", "Fc_broad_N", "Fs_broad_N", "magnitude_N",
                         "phi_broad_rad", "phi_n_rad", "X1_over_xref", "magnitude_normalized"});
    for (const auto& s : samples)
        csv.row({s.X1, s.X3, static_cast<double>(s.n), s.Fc, s.Fs, s.magnitude, s.phi_broad,
                 s.phi_n, s.X1_norm, s.mag_norm});
    return ResultSet{0, {path.string()}, "apriori sweep: " + std::to_string(samples.size()) + " samples"};
}

ResultSet run_frc_mode(const RunConfig& cfg, json& meta) {
    const Units u = units_of(cfg.system);
    std::vector<double> forces;
    for (double fh : cfg.sweep.force_levels_hat) forces.push_back(fh * u.force);
    long long solves = 0;
    std::vector<std::string> row_errors;
    const auto frcs =
        compute_frc_grid(cfg.system, forces, cfg.sweep.freq_min_hat * u.omega,
                         cfg.sweep.freq_max_hat * u.omega, scaled_continuation(cfg), cfg.solver,
                         effective_threads(cfg), &solves, &row_errors);
    meta["newton_solves"] = solves;
    for (size_t i = 0; i < row_errors.size(); ++i)
        if (!row_errors[i].empty())
            meta["row_errors"][std::to_string(i)] = row_errors[i];

    ResultSet rs;
    int failures = 0;
    for (size_t i = 0; i < frcs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frc_%03zu.csv", i);
        const fs::path path = fs::path(cfg.out_dir) / name;
        CsvWriter csv(path, branch_columns(cfg.system.H, cfg.target_harmonic));
        for (const auto& p : frcs[i].points)
            csv.row(branch_row(frcs[i].F, p.lambda(), p.y.head(p.y.size() - 1),
                               cfg.target_harmonic, p.residual_norm));
        rs.files_written.push_back(path.string());
        if (frcs[i].points.empty()) ++failures;
    }
    rs.summary = "frc: " + std::to_string(frcs.size() - failures) + "/" +
                 std::to_string(frcs.size()) + " force levels traced";
    rs.exit_code = failures == static_cast<int>(frcs.size()) && !frcs.empty() ? 3 : 0;
    return rs;
}

void write_backbone_csv(const fs::path& path, const std::vector<VprnmPoint>& backbone, int H,
                        int n) {
    auto cols = branch_columns(H, n);
    cols.push_back("phase_" + std::to_string(n) + "_unwrapped_rad");
    cols.push_back("fbroad_norm_N");
    cols.push_back("constraint_residual");
    CsvWriter csv(path, cols);
    double unwrapped = backbone.empty() ? 0.0 : backbone.front().phi_n;
    double prev = unwrapped;
    for (const auto& p : backbone) {
        unwrapped += wrap_phase(p.phi_n - prev);
        prev = p.phi_n;
        auto row = branch_row(p.F, p.omega, p.X, n, p.residual_norm);
        row.push_back(unwrapped);
        row.push_back(p.fbroad_norm);
        row.push_back(p.constraint_residual);
        csv.row(row);
    }
}

ResultSet run_vprnm_mode(const RunConfig& cfg, json& meta) {
    const Units u = units_of(cfg.system);
    const auto& fl = cfg.sweep.force_levels_hat;
    const double F_min = fl.front() * u.force;
    const double F_max = fl.back() * u.force;
    VprnmOptions vopts;
    vopts.hbm = cfg.solver;
    vopts.continuation = scaled_continuation(cfg);
    BranchDiagnostics diag;
    const auto backbone = vprnm_backbone(cfg.system, cfg.target_harmonic, F_min, F_max, vopts, &diag);
    meta["newton_solves"] = diag.corrector_solves;
    if (diag.stalled) meta["stall"] = diag.message;

    const fs::path path = fs::path(cfg.out_dir) / "vprnm.csv";
    write_backbone_csv(path, backbone, cfg.system.H, cfg.target_harmonic);
    return ResultSet{backbone.empty() ? 3 : 0,
                     {path.string()},
                     "vprnm backbone: " + std::to_string(backbone.size()) + " points"};
}

ResultSet run_compare_mode(const RunConfig& cfg, json& meta) {
    const CompareResult cr = run_compare(cfg);
    const Units u = units_of(cfg.system);

    ResultSet rs;
    {
        const fs::path path = fs::path(cfg.out_dir) / "peaks.csv";
        CsvWriter csv(path, {"force_N", "force_hat", "omega_peak_rad_per_s", "X_super_m", "X_nom_m",
                             "phi_n_rad", "Xn_peak_m", "band_min_m", "band_max_m"});
        for (size_t i = 0; i < cr.peaks.size(); ++i) {
            const auto& p = cr.peaks[i];
            csv.row({p.F, p.F / u.force, p.omega_peak, p.X_super, p.X_nom, p.phi_n, p.Xn_peak,
                     cr.bands[i].amp_min, cr.bands[i].amp_max});
        }
        rs.files_written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(cfg.out_dir) / "vprnm.csv";
        write_backbone_csv(path, cr.backbone, cfg.system.H, cfg.target_harmonic);
        rs.files_written.push_back(path.string());
    }
    json summary;
    summary["accuracy_percent"] = cr.accuracy_percent;
    summary["target_harmonic"] = cfg.target_harmonic;
    summary["log_force_axis"] = cfg.compare.log_force;
    summary["peaks_found"] = cr.peaks.size();
    summary["backbone_points"] = cr.backbone.size();
    summary["hbm_newton_solves"] = cr.hbm_solves;
    summary["vprnm_newton_solves"] = cr.vprnm_solves;
    const fs::path path = fs::path(cfg.out_dir) / "accuracy.json";
    write_json(path, summary);
    rs.files_written.push_back(path.string());
    meta["newton_solves"] = cr.hbm_solves + cr.vprnm_solves;

    std::ostringstream ss;
    ss << "compare: accuracy " << cr.accuracy_percent << "% over " << cr.peaks.size() << " peaks";
    rs.summary = ss.str();
    rs.exit_code = cr.peaks.empty() ? 3 : 0;
    return rs;
}

ResultSet run_bench_mode(const RunConfig& cfg, json& meta) {
    const CompareResult cr = run_compare(cfg);
    json bench;
    bench["hbm"] = {{"wall_s", cr.hbm_wall_s},
                    {"newton_solves", cr.hbm_solves},
                    {"force_levels", cfg.sweep.force_levels_hat.size()}};
    bench["vprnm"] = {{"wall_s", cr.vprnm_wall_s},
                      {"newton_solves", cr.vprnm_solves},
                      {"points", cr.backbone.size()}};
    bench["solve_ratio"] =
        cr.vprnm_solves > 0 ? static_cast<double>(cr.hbm_solves) / cr.vprnm_solves : 0.0;
    bench["wall_ratio"] = cr.vprnm_wall_s > 0.0 ? cr.hbm_wall_s / cr.vprnm_wall_s : 0.0;
    const fs::path path = fs::path(cfg.out_dir) / "bench.json";
    write_json(path, bench);
    meta["newton_solves"] = cr.hbm_solves + cr.vprnm_solves;
    std::ostringstream ss;
    ss << "bench: solve ratio " << bench["solve_ratio"].get<double>() << ", wall ratio "
       << bench["wall_ratio"].get<double>();
    return ResultSet{0, {path.string()}, ss.str()};
}

ResultSet run_validate_mode(const RunConfig& cfg) {
    json doc;
    doc["checks"] = json::array();
    bool ok = true;
    const auto results = run_validation_suite([&](const CheckResult& r) {
        std::printf("%-38s %s  (measure %.3e, limit %.3e)%s%s\n", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.measure, r.limit, r.detail.empty() ? "" : "  ",
                    r.detail.c_str());
        std::fflush(stdout);
    });
    for (const auto& r : results) {
        ok = ok && r.pass;
        doc["checks"].push_back({{"name", r.name},
                                 {"pass", r.pass},
                                 {"measure", r.measure},
                                 {"limit", r.limit},
                                 {"detail", r.detail}});
    }
    doc["all_passed"] = ok;
    const fs::path path = fs::path(cfg.out_dir) / "validate.json";
    write_json(path, doc);
    return ResultSet{ok ? 0 : 4,
                     {path.string()},
                     ok ? "validation suite passed" : "validation suite FAILED"};
}

}  // namespace

ResultSet run(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double t0 = now_s();
    json meta = metadata_json(cfg, 0.0, 0);

    ResultSet rs;
    switch (cfg.mode) {
        case RunMode::Apriori: rs = run_apriori(cfg); break;
        case RunMode::Frc: rs = run_frc_mode(cfg, meta); break;
        case RunMode::Vprnm: rs = run_vprnm_mode(cfg, meta); break;
        case RunMode::Compare: rs = run_compare_mode(cfg, meta); break;
        case RunMode::Bench: rs = run_bench_mode(cfg, meta); break;
        case RunMode::Validate: rs = run_validate_mode(cfg); break;
    }

    meta["wall_time_s"] = now_s() - t0;
    meta["summary"] = rs.summary;
    const fs::path meta_path = fs::path(cfg.out_dir) / "metadata.json";
    write_json(meta_path, meta);
    rs.files_written.push_back(meta_path.string());
    return rs;
}

}  // namespace vibratrak
