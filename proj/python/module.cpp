#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vibratrak/aft.hpp"
#include "vibratrak/analysis.hpp"
#include "vibratrak/errors.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/model.hpp"
#include "vibratrak/runner.hpp"
#include "vibratrak/validate.hpp"
#include "vibratrak/vprnm.hpp"

namespace py = pybind11;
using namespace vibratrak;

namespace {

/// Force models cross the boundary as (kind, parameter dict) pairs.
ForceModel force_from_dict(const py::dict& d) {
    const std::string kind = py::cast<std::string>(d["kind"]);
    auto num = [&](const char* key, double fallback = 0.0) {
        return d.contains(key) ? py::cast<double>(d[key]) : fallback;
    };
    ForceModel force;
    if (kind == "stiffening_duffing") force = StiffeningDuffing{num("alpha")};
    else if (kind == "quintic") force = QuinticStiffness{num("eta")};
    else if (kind == "softening_duffing") force = SofteningDuffing{num("alpha")};
    else if (kind == "softening_ii") force = SofteningII{num("k_t"), num("F_s"), num("chi"), num("beta")};
    else if (kind == "unilateral_spring") force = UnilateralSpring{num("k_nl")};
    else if (kind == "cubic_damping") force = CubicDamping{num("gamma")};
    else if (kind == "jenkins") force = Jenkins{num("k_t"), num("F_s")};
    else if (kind == "iwan")
        force = Iwan{num("k_t"), num("F_s"), num("chi"), num("beta"),
                     d.contains("n_sliders") ? py::cast<int>(d["n_sliders"]) : 100};
    else throw std::invalid_argument("unknown force kind '" + kind + "'");
    validate(force);
    return force;
}

}  // namespace

PYBIND11_MODULE(_vibratrak, m) {
    m.doc() = "Harmonic balance solver with superharmonic resonance tracking";
    m.attr("__version__") = VIBRATRAK_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](double mass, double c, double k, const py::dict& force, int H, int Nt,
                         double x_ref) {
                 return SystemConfig::make(mass, c, k, force_from_dict(force), H, Nt, x_ref);
             }),
             py::arg("m"), py::arg("c"), py::arg("k"), py::arg("force"), py::arg("H"),
             py::arg("Nt") = 1024, py::arg("x_ref") = 0.0)
        .def_readonly("m", &SystemConfig::m)
        .def_readonly("c", &SystemConfig::c)
        .def_readonly("k", &SystemConfig::k)
        .def_readonly("H", &SystemConfig::H)
        .def_readonly("Nt", &SystemConfig::Nt)
        .def_readonly("x_ref", &SystemConfig::x_ref)
        .def_readonly("k_lin", &SystemConfig::k_lin);

    py::class_<Scales>(m, "Scales")
        .def_readonly("omega0", &Scales::omega0)
        .def_readonly("zeta0", &Scales::zeta0)
        .def_readonly("k_hat", &Scales::k_hat)
        .def_readonly("k_t_hat", &Scales::k_t_hat)
        .def_readonly("k_nl_hat", &Scales::k_nl_hat)
        .def_readonly("alpha_hat", &Scales::alpha_hat)
        .def_readonly("eta_hat", &Scales::eta_hat)
        .def_readonly("gamma_hat", &Scales::gamma_hat)
        .def_readonly("F_s_hat", &Scales::F_s_hat);
    m.def("nondimensionalize", &nondimensionalize);

    m.def("linearized_stiffness",
          [](const py::dict& force) { return linearized_stiffness(force_from_dict(force)); });
    m.def("phi_max", &phi_max, py::arg("F_s"), py::arg("k_t"), py::arg("chi"), py::arg("beta"));
    m.def("eval_instantaneous", [](const py::dict& force, double x, double v) {
        const InstantEval e = eval_instantaneous(force_from_dict(force), x, v);
        return py::make_tuple(e.f, e.df_dx, e.df_dv);
    });

    py::class_<AftResult>(m, "AftResult")
        .def_readonly("F", &AftResult::F)
        .def_readonly("dF_dX", &AftResult::dF_dX)
        .def_readonly("dF_domega", &AftResult::dF_domega);
    m.def("synthesize_time_series", [](const Eigen::VectorXd& X, double omega, int Nt) {
        const TimeSeries ts = synthesize_time_series(X, omega, Nt);
        return py::make_tuple(ts.x, ts.v);
    });
    m.def("harmonic_coefficients", &harmonic_coefficients);
    m.def("find_critical_instants",
          [](const Eigen::VectorXd& x) { return find_critical_instants(x); });
    m.def(
        "aft",
        [](const py::dict& force, const Eigen::VectorXd& X, double omega, int Nt, bool jacobian) {
            return aft(force_from_dict(force), X, omega, Nt, jacobian);
        },
        py::arg("force"), py::arg("X"), py::arg("omega"), py::arg("Nt") = 1024,
        py::arg("jacobian") = true);
    m.def(
        "aft_fast_hysteretic",
        [](const py::dict& force, const Eigen::VectorXd& X, double omega, int Nt, bool jacobian) {
            return aft_fast_hysteretic(force_from_dict(force), X, omega, Nt, jacobian);
        },
        py::arg("force"), py::arg("X"), py::arg("omega"), py::arg("Nt") = 1024,
        py::arg("jacobian") = true);

    m.def("linear_frf", &linear_frf);
    m.def("solve_hbm",
          [](const SystemConfig& sys, const Eigen::VectorXd& guess, double omega, double F,
             double tol) { return solve_hbm(sys, guess, omega, F, HbmOptions{tol}); },
          py::arg("sys"), py::arg("guess"), py::arg("omega"), py::arg("F"), py::arg("tol") = 1e-9);
    m.def("hbm_residual_norm", [](const SystemConfig& sys, const Eigen::VectorXd& X, double omega,
                                  double F) {
        return hbm_residual(sys, X, omega, F).R.lpNorm<Eigen::Infinity>();
    });

    py::class_<BroadbandForce>(m, "BroadbandForce")
        .def_readonly("n", &BroadbandForce::n)
        .def_readonly("Fc", &BroadbandForce::Fc)
        .def_readonly("Fs", &BroadbandForce::Fs)
        .def("magnitude", &BroadbandForce::magnitude)
        .def("phase", &BroadbandForce::phase);
    m.def("broadband_force",
          [](const SystemConfig& sys, const Eigen::VectorXd& X, double omega, int n) {
              return broadband_force(sys, X, omega, n);
          });
    m.def("superposition_force",
          [](const SystemConfig& sys, const Eigen::VectorXd& X, double omega, int k, int n) {
              return superposition_force(sys, X, omega, k, n);
          });
    m.def("decomposition_check",
          [](const SystemConfig& sys, const Eigen::VectorXd& X, double omega, int n) {
              return decomposition_check(sys, X, omega, n);
          });
    m.def("expected_phase", &expected_phase);

    py::class_<VprnmPoint>(m, "VprnmPoint")
        .def_readonly("F", &VprnmPoint::F)
        .def_readonly("omega", &VprnmPoint::omega)
        .def_readonly("X", &VprnmPoint::X)
        .def_readonly("phi_n", &VprnmPoint::phi_n)
        .def_readonly("fbroad_norm", &VprnmPoint::fbroad_norm)
        .def_readonly("constraint_residual", &VprnmPoint::constraint_residual)
        .def_readonly("residual_norm", &VprnmPoint::residual_norm);
    m.def(
        "vprnm_backbone",
        [](const SystemConfig& sys, int n, double F_min, double F_max, double ds0, double ds_max,
           int max_points) {
            VprnmOptions opts;
            opts.continuation.ds0 = ds0;
            opts.continuation.ds_max = ds_max;
            opts.continuation.max_points = max_points;
            return vprnm_backbone(sys, n, F_min, F_max, opts);
        },
        py::arg("sys"), py::arg("n"), py::arg("F_min"), py::arg("F_max"), py::arg("ds0") = 0.01,
        py::arg("ds_max") = 0.05, py::arg("max_points") = 5000);

    py::class_<BranchPoint>(m, "BranchPoint")
        .def_readonly("y", &BranchPoint::y)
        .def_readonly("residual_norm", &BranchPoint::residual_norm)
        .def_readonly("arc", &BranchPoint::arc);
    py::class_<FrcBranch>(m, "FrcBranch")
        .def_readonly("F", &FrcBranch::F)
        .def_readonly("points", &FrcBranch::points);
    m.def(
        "compute_frc",
        [](const SystemConfig& sys, double F, double omega_lo, double omega_hi, double ds0,
           double ds_max, int max_points) {
            ContinuationConfig ccfg;
            ccfg.ds0 = ds0;
            ccfg.ds_max = ds_max;
            ccfg.max_points = max_points;
            return compute_frc(sys, F, omega_lo, omega_hi, ccfg, HbmOptions{});
        },
        py::arg("sys"), py::arg("F"), py::arg("omega_lo"), py::arg("omega_hi"),
        py::arg("ds0") = 0.01, py::arg("ds_max") = 0.05, py::arg("max_points") = 5000);

    py::class_<PeakRecord>(m, "PeakRecord")
        .def_readonly("F", &PeakRecord::F)
        .def_readonly("omega_peak", &PeakRecord::omega_peak)
        .def_readonly("X_super", &PeakRecord::X_super)
        .def_readonly("X_nom", &PeakRecord::X_nom)
        .def_readonly("phi_n", &PeakRecord::phi_n)
        .def_readonly("Xn_peak", &PeakRecord::Xn_peak);
    m.def("extract_superharmonic_peaks",
          [](const SystemConfig& sys, const FrcBranch& branch, int n) {
              return extract_superharmonic_peaks(sys, branch, n);
          });

    m.def("total_amplitude", &total_amplitude, py::arg("X"), py::arg("omega"),
          py::arg("Nt") = 1024);
    m.def("harmonic_phase", &harmonic_phase);
    m.def(
        "analytic_fbroad",
        [](const py::dict& force, double X1, double X3, double omega, int n) {
            return analytic_fbroad(force_from_dict(force), X1, X3, omega, n);
        },
        py::arg("force"), py::arg("X1"), py::arg("X3"), py::arg("omega"), py::arg("n"));
    py::class_<AprioriSample>(m, "AprioriSample")
        .def_readonly("X1", &AprioriSample::X1)
        .def_readonly("X3", &AprioriSample::X3)
        .def_readonly("n", &AprioriSample::n)
        .def_readonly("Fc", &AprioriSample::Fc)
        .def_readonly("Fs", &AprioriSample::Fs)
        .def_readonly("magnitude", &AprioriSample::magnitude)
        .def_readonly("phi_broad", &AprioriSample::phi_broad)
        .def_readonly("phi_n", &AprioriSample::phi_n)
        .def_readonly("X1_norm", &AprioriSample::X1_norm)
        .def_readonly("mag_norm", &AprioriSample::mag_norm);
    m.def(
        "apriori_sweep",
        [](const SystemConfig& sys, int n, const std::vector<double>& amps, double omega,
           double x3_ratio) { return apriori_sweep(sys, n, amps, omega, x3_ratio); },
        py::arg("sys"), py::arg("n"), py::arg("amplitudes_over_xref"), py::arg("omega"),
        py::arg("x3_ratio") = 0.0);

    m.def("run_validation_suite", []() {
        py::list out;
        for (const auto& r : run_validation_suite()) {
            py::dict d;
            d["name"] = r.name;
            d["pass"] = r.pass;
            d["measure"] = r.measure;
            d["limit"] = r.limit;
            out.append(d);
        }
        return out;
    });
}
