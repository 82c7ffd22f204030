#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vibratrak/continuation.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/model.hpp"

namespace vibratrak {

struct VprnmPoint;

/// Peak cycle amplitude max_t |x(t)|, located on Nt samples and refined by a
/// local quadratic fit.
double total_amplitude(const HarmonicVector& X, double omega, int Nt = 1024);

/// Phase of harmonic k in X_k cos(k w t - phi_k) form: arctan2(X_ks, X_kc),
/// wrapped to (-pi, pi]. Throws std::domain_error on a zero harmonic.
double harmonic_phase(const HarmonicVector& X, int k);

/// One frequency response branch at a fixed force level; y = X (+) omega.
struct FrcBranch {
    double F = 0.0;
    std::vector<BranchPoint> points;
};

struct PeakRecord {
    double F = 0.0;
    double omega_peak = 0.0;   // frequency of the local max of |X_n|
    double X_super = 0.0;      // total amplitude at the peak
    double X_nom = 0.0;        // total amplitude re-solved at 1.1 * omega_peak
    double phi_n = 0.0;        // phase of harmonic n at the peak
    double Xn_peak = 0.0;      // |X_n| at the peak
};

/// Locate strict local maxima of |X_n| along an FRC branch (quadratic
/// interpolation over arc-adjacent triples), re-converge the peak by HBM and
/// evaluate the nominal response at 1.1 times the peak frequency. Returns an
/// empty list when the branch has no resolvable superharmonic resonance.
std::vector<PeakRecord> extract_superharmonic_peaks(const SystemConfig& sys,
                                                    const FrcBranch& branch, int n,
                                                    const HbmOptions& opts = {});

struct EnvelopeBand {
    Eigen::VectorXd freq;
    Eigen::VectorXd amp_min;
    Eigen::VectorXd amp_max;
};

/// Min/max band of total amplitude across several FRCs on a common 400-point
/// log frequency grid; optionally normalized by each branch's force level.
/// Throws std::invalid_argument when the frequency supports are disjoint.
EnvelopeBand frc_envelope(const std::vector<FrcBranch>& branches, bool normalize_by_force,
                          int grid_points = 400);

/// Per-force-level amplitude extent of an FRC over a frequency window.
struct ForceBand {
    double F = 0.0;
    double amp_min = 0.0;
    double amp_max = 0.0;
};

ForceBand force_band(const FrcBranch& branch, double omega_lo, double omega_hi);

/// Percent area between the backbone total-amplitude-vs-force curve and the
/// peak-amplitude curve, relative to the area of the FRC min/max band, on a
/// linear or log force axis.
double accuracy_metric(const std::vector<VprnmPoint>& backbone,
                       const std::vector<PeakRecord>& peaks, const std::vector<ForceBand>& bands,
                       bool log_force, bool normalize_by_force = false);

struct AprioriSample {
    double X1 = 0.0;        // fundamental amplitude [m]
    double X3 = 0.0;        // locked third-harmonic amplitude [m], 0 when unused
    int n = 0;
    double Fc = 0.0;
    double Fs = 0.0;
    double magnitude = 0.0;
    double phi_broad = 0.0;  // NaN when the excitation vanishes
    double phi_n = 0.0;      // NaN when the excitation vanishes
    double X1_norm = 0.0;    // X1 / x_ref
    double mag_norm = 0.0;   // magnitude / (k_lin x_ref F_s_hat-scaling)
};

/// Broadband excitation of harmonic n for fundamental motion X1 cos(w t),
/// optionally with a third harmonic of amplitude x3_ratio * X1 locked in
/// phase with the broadband excitation of the third harmonic. Amplitudes are
/// given relative to x_ref.
std::vector<AprioriSample> apriori_sweep(const SystemConfig& sys, int n,
                                         const std::vector<double>& amplitudes_over_xref,
                                         double omega, double x3_ratio = 0.0,
                                         const HbmOptions& opts = {});

/// Closed-form broadband excitation for the polynomial laws, the unilateral
/// spring and cubic damping. Throws std::invalid_argument for combinations
/// without a closed form (hysteretic and softening II laws are numeric only).
std::pair<double, double> analytic_fbroad(const ForceModel& force, double X1, double X3,
                                          double omega, int n);

}  // namespace vibratrak
