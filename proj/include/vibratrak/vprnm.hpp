#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vibratrak/continuation.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/model.hpp"

namespace vibratrak {

/// Excitation of harmonic n by the motion of harmonics 0..n-1 alone,
/// F_broad = -F_n{ f_nl(x_{0:n-1}) }.
struct BroadbandForce {
    int n = 0;
    double Fc = 0.0;
    double Fs = 0.0;
    double magnitude() const { return std::hypot(Fc, Fs); }
    /// Phase on the [-pi, pi) branch.
    double phase() const { return wrap_phase_low(std::atan2(Fs, Fc)); }
};

/// Throws std::invalid_argument unless 2 <= n <= H.
BroadbandForce broadband_force(const SystemConfig& sys, const HarmonicVector& X, double omega,
                               int n, const HbmOptions& opts = {});

/// Superposition-violation force on harmonic k from introducing harmonic n:
/// -F_k{ f(x) - f(x_n) - f(x_{0:n-1}) }. Diagnostic for where the phase
/// constraint degrades.
Eigen::Vector2d superposition_force(const SystemConfig& sys, const HarmonicVector& X, double omega,
                                    int k, int n, const HbmOptions& opts = {});

/// Defect of F_n{f(x)} = F_n{f(x_n)} - F_broad - F_sup; identically zero up
/// to roundoff by construction.
double decomposition_check(const SystemConfig& sys, const HarmonicVector& X, double omega, int n,
                           const HbmOptions& opts = {});

/// Phase at which harmonic n resonates under the given broadband excitation:
/// arctan2(Fs, Fc) + pi/2 wrapped to (-pi, pi]. Throws on zero magnitude.
double expected_phase(const BroadbandForce& broad);

struct VprnmResidual {
    Eigen::VectorXd r;   // 2H+2: HBM rows then the orthogonality constraint
    Eigen::MatrixXd J;   // (2H+2) x (2H+3): derivatives w.r.t. (X, omega, F)
    BroadbandForce broad;
};

/// Augmented residual: HBM plus (F_broad,n / |F_broad,n|) . (X_nc, X_ns).
/// Throws VanishingBroadband when the excitation magnitude is numerically zero.
VprnmResidual vprnm_residual(const SystemConfig& sys, const HarmonicVector& X, double omega,
                             double F, int n, const HbmOptions& opts = {});

struct VprnmPoint {
    double F = 0.0;
    double omega = 0.0;
    HarmonicVector X;
    double phi_n = 0.0;             // phase of the tracked harmonic, (-pi, pi]
    double fbroad_norm = 0.0;
    double constraint_residual = 0.0;
    double residual_norm = 0.0;     // HBM rows only
    double arc = 0.0;
};

struct VprnmOptions {
    HbmOptions hbm;
    ContinuationConfig continuation;
    /// Target maximum cycle amplitude, as a fraction of x_ref, for the
    /// auto-selected seed force level.
    double seed_amplitude_fraction = 0.05;
};

/// Track the n:1 superharmonic resonance across force levels [F_min, F_max].
/// The seed starts in the low-amplitude regime at omega ~ omega0/n (falling
/// back to F_min when the low-amplitude excitation of harmonic n vanishes,
/// as for a fully stuck Jenkins element), then continuation runs in F.
std::vector<VprnmPoint> vprnm_backbone(const SystemConfig& sys, int n, double F_min, double F_max,
                                       const VprnmOptions& opts, BranchDiagnostics* diag = nullptr);

}  // namespace vibratrak
