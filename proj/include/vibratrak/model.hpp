#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "vibratrak/types.hpp"

namespace vibratrak {

// ---------------------------------------------------------------------------
// Nonlinear force laws
// ---------------------------------------------------------------------------

struct StiffeningDuffing {
    double alpha;  // [N/m^3], > 0
};

struct QuinticStiffness {
    double eta;  // [N/m^5], > 0
};

struct SofteningDuffing {
    double alpha;  // [N/m^3], < 0
};

/// Conservative softening law shaped like the loading backbone of the
/// 4-parameter Iwan element: initial stiffness k_t, saturation at F_s.
struct SofteningII {
    double k_t;   // initial stiffness [N/m]
    double F_s;   // saturation force [N]
    double chi;   // curve shape, in (-1, 0]
    double beta;  // slope discontinuity weight at saturation, >= 0
};

struct UnilateralSpring {
    double k_nl;  // one-sided stiffness [N/m]
};

struct CubicDamping {
    double gamma;  // [N s^3/m^3]
};

/// Single stick-slip element with tangential stiffness k_t and slip force F_s.
struct Jenkins {
    double k_t;
    double F_s;
};

/// 4-parameter Iwan element: power-law distribution of stick-slip sliders
/// plus a Dirac component at phi_max, discretized with n_sliders equal
/// intervals (midpoint rule) and one extra slider for the Dirac term.
struct Iwan {
    double k_t;
    double F_s;
    double chi;   // in (-1, 0]
    double beta;  // >= 0
    int n_sliders = 100;
};

using ForceModel = std::variant<StiffeningDuffing, QuinticStiffness, SofteningDuffing,
                                SofteningII, UnilateralSpring, CubicDamping, Jenkins, Iwan>;

bool is_hysteretic(const ForceModel& force);
/// True for laws with f(-x,-v) = -f(x,v) (all but the unilateral spring;
/// the hysteretic elements are odd in the state-reflected sense).
bool is_odd(const ForceModel& force);
/// True for laws that dissipate energy over a cycle.
bool is_dissipative(const ForceModel& force);
std::string force_kind_name(const ForceModel& force);

/// Throws std::invalid_argument if the parameters violate the admissibility
/// constraints of the given law.
void validate(const ForceModel& force);

/// Displacement at which the softening-II / Iwan loading curve saturates.
double phi_max(double F_s, double k_t, double chi, double beta);

/// d f_nl/dx at (x, xdot) = (0, 0). The unilateral spring uses the symmetric
/// part k_nl/2 from splitting max(k_nl x, 0) = (k_nl/2) x + (k_nl/2)|x|.
double linearized_stiffness(const ForceModel& force);

// ---------------------------------------------------------------------------
// Pointwise evaluation
// ---------------------------------------------------------------------------

struct InstantEval {
    double f;
    double df_dx;
    double df_dv;
};

/// Evaluate one of the six history-free laws at (x, v) with exact partial
/// derivatives. At x = 0 the unilateral spring reports the right-limit k_nl.
/// Throws std::invalid_argument for Jenkins/Iwan.
InstantEval eval_instantaneous(const ForceModel& force, double x, double v);

// ---------------------------------------------------------------------------
// Hysteretic state and stepping
// ---------------------------------------------------------------------------

struct JenkinsState {
    double x0 = 0.0;
    double f0 = 0.0;  // |f0| <= F_s
};

struct IwanState {
    double x0 = 0.0;
    Eigen::VectorXd f_phi0;  // per-slider values, |f_phi0[i]| <= phi[i]
};

using HystereticState = std::variant<JenkinsState, IwanState>;

/// Initial state with all sliders centered at displacement x0.
HystereticState initial_state(const ForceModel& force, double x0);

struct HystStep {
    double f;      // force after the step; |f| <= F_s always
    double df_dx;  // local tangent: k_t times the stuck fraction
};

/// Advance a hysteretic element to displacement x, updating state in place.
/// Throws std::invalid_argument for non-hysteretic models or on a state /
/// slider-count mismatch.
HystStep eval_hysteretic_step(const ForceModel& force, double x, HystereticState& state);

// ---------------------------------------------------------------------------
// System definition and scaling
// ---------------------------------------------------------------------------

struct SystemConfig {
    double m = 1.0;  // mass [kg]
    double c = 0.0;  // viscous damping [kg/s]
    double k = 0.0;  // linear stiffness [N/m]
    ForceModel force = StiffeningDuffing{1.0};
    int H = 3;        // highest harmonic
    int Nt = 1024;    // time samples per period (power of two, >= 4H)
    double x_ref = 1.0;  // reference displacement [m]
    double k_lin = 0.0;  // k + linearized nonlinear stiffness; derived

    /// Validates invariants and fills the derived fields. Pass x_ref <= 0 to
    /// pick the conventional reference for the force law (saturation
    /// displacement for softening II / Iwan, F_s/k_t for Jenkins, 1 otherwise).
    static SystemConfig make(double m, double c, double k, ForceModel force, int H, int Nt,
                             double x_ref = 0.0);
};

/// Nondimensional parameter set built from (m, k_lin, x_ref).
struct Scales {
    double omega0 = 0.0;  // sqrt(k_lin/m) [rad/s]
    double zeta0 = 0.0;   // c / (2 sqrt(k_lin m))
    double k_hat = 0.0;
    double k_t_hat = 0.0;
    double k_nl_hat = 0.0;
    double alpha_hat = 0.0;
    double eta_hat = 0.0;
    double gamma_hat = 0.0;
    double F_s_hat = 0.0;
};

Scales nondimensionalize(const SystemConfig& sys);

}  // namespace vibratrak
