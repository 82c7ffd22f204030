#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vibratrak/model.hpp"
#include "vibratrak/types.hpp"

namespace vibratrak {

struct TimeSeries {
    Eigen::VectorXd x;  // displacement samples on [0, 2pi/omega - dt]
    Eigen::VectorXd v;  // exact time derivative samples
};

/// Sample the harmonic ansatz and its derivative at Nt uniform instants over
/// one period. Throws std::invalid_argument if Nt < 4H.
TimeSeries synthesize_time_series(const HarmonicVector& X, double omega, int Nt);

/// Discrete Fourier analysis of a sampled period: harmonics n >= 1 carry the
/// 2/Nt scaling, the zeroth coefficient is the period mean (1/Nt).
HarmonicVector harmonic_coefficients(const Eigen::VectorXd& f_samples, int H);

struct AftResult {
    HarmonicVector F;            // harmonic force coefficients, length 2H+1
    Eigen::MatrixXd dF_dX;       // (2H+1) x (2H+1); empty when not requested
    Eigen::VectorXd dF_domega;   // (2H+1); zero for displacement-only laws
};

/// Instrumentation for the hysteretic evaluation paths.
struct AftStats {
    long long element_evals = 0;        // hysteretic element evaluations (all sliders count as one)
    long long critical_path_evals = 0;  // sequential evaluations; the vectorizable
                                        // per-sample stage counts as a single step
    int reversal_count = 0;
    bool fell_back_to_standard = false;
};

/// Harmonic force coefficients of the nonlinear force under the motion X at
/// frequency omega, with derivative blocks assembled by the chain rule through
/// the sampled tangents. Hysteretic models are pre-cycled twice so the second
/// pass is the steady-state loop. Throws SolverError on non-finite samples.
AftResult aft(const ForceModel& force, const HarmonicVector& X, double omega, int Nt,
              bool jacobian = true, AftStats* stats = nullptr);

/// Indices j with sgn(x[j+1]-x[j]) != sgn(x[j]-x[j-1]), circular: the
/// velocity-reversal extrema of a sampled period. Constant series yield an
/// empty list.
std::vector<int> find_critical_instants(const Eigen::VectorXd& x);

/// Hysteresis evaluated only at the reversal instants (two passes), every
/// other sample resolved in one step from the most recent preceding reversal
/// state. Matches aft() within roundoff; requires a Jenkins or Iwan model.
/// Degenerate flat-topped series fall back to the standard path.
AftResult aft_fast_hysteretic(const ForceModel& force, const HarmonicVector& X, double omega,
                              int Nt, bool jacobian = true, AftStats* stats = nullptr);

/// aft(), except hysteretic models take the reversal-point path when
/// prefer_fast is set. Solvers use this; the two paths agree to roundoff.
inline AftResult aft_dispatch(const ForceModel& force, const HarmonicVector& X, double omega,
                              int Nt, bool jacobian = true, bool prefer_fast = true,
                              AftStats* stats = nullptr) {
    if (prefer_fast && is_hysteretic(force))
        return aft_fast_hysteretic(force, X, omega, Nt, jacobian, stats);
    return aft(force, X, omega, Nt, jacobian, stats);
}

}  // namespace vibratrak
