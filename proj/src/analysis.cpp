#include "vibratrak/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vibratrak/aft.hpp"
#include "vibratrak/errors.hpp"
#include "vibratrak/vprnm.hpp"

namespace vibratrak {

namespace {

double eval_series_at(const HarmonicVector& X, double theta) {
    const int H = num_harmonics(X);
    double x = X[0];
    for (int k = 1; k <= H; ++k)
        x += X[idx_cos(k)] * std::cos(k * theta) + X[idx_sin(k)] * std::sin(k * theta);
    return x;
}

/// Vertex abscissa of the parabola through (-1, ym), (0, y0), (+1, yp),
/// clamped to [-1, 1]; 0 when the triple is degenerate.
double parabola_vertex(double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (denom == 0.0) return 0.0;
    return std::clamp(0.5 * (ym - yp) / denom, -1.0, 1.0);
}

double branch_omega(const BranchPoint& p) { return p.y[p.y.size() - 1]; }

HarmonicVector branch_X(const BranchPoint& p) { return p.y.head(p.y.size() - 1); }

}  // namespace

double total_amplitude(const HarmonicVector& X, double omega, int Nt) {
    (void)omega;  // the cycle shape does not depend on the frequency
    const int H = num_harmonics(X);
    Nt = std::max(Nt, 8 * H);
    int jmax = 0;
    double amax = -1.0;
    Eigen::VectorXd absx(Nt);
    for (int j = 0; j < Nt; ++j) {
        absx[j] = std::abs(eval_series_at(X, 2.0 * M_PI * j / Nt));
        if (absx[j] > amax) {
            amax = absx[j];
            jmax = j;
        }
    }
    const double ym = absx[(jmax + Nt - 1) % Nt];
    const double yp = absx[(jmax + 1) % Nt];
    const double s = parabola_vertex(ym, amax, yp);
    const double theta = 2.0 * M_PI * (jmax + s) / Nt;
    return std::max(amax, std::abs(eval_series_at(X, theta)));
}

double harmonic_phase(const HarmonicVector& X, int k) {
    const int H = num_harmonics(X);
    if (k < 1 || k > H) throw std::invalid_argument("harmonic_phase: k out of range");
    const double xc = X[idx_cos(k)], xs = X[idx_sin(k)];
    if (xc == 0.0 && xs == 0.0)
        throw std::domain_error("harmonic_phase: zero harmonic has undefined phase");
    return wrap_phase(std::atan2(xs, xc));
}

std::vector<PeakRecord> extract_superharmonic_peaks(const SystemConfig& sys,
                                                    const FrcBranch& branch, int n,
                                                    const HbmOptions& opts) {
    std::vector<PeakRecord> peaks;
    const auto& pts = branch.points;
    if (static_cast<int>(pts.size()) < 3 || n < 1 || n > sys.H) return peaks;

    const int N = static_cast<int>(pts.size());
    Eigen::VectorXd amp_n(N);
    double x_scale = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto& y = pts[i].y;
        amp_n[i] = std::hypot(y[idx_cos(n)], y[idx_sin(n)]);
        x_scale = std::max(x_scale, y.head(y.size() - 1).norm());
    }
    const double floor = 1e-7 * x_scale;  // ignore roundoff-level wiggles

    for (int i = 1; i + 1 < N; ++i) {
        if (!(amp_n[i] > amp_n[i - 1] && amp_n[i] > amp_n[i + 1])) continue;
        if (amp_n[i] < floor) continue;

        // Quadratic refinement in arclength, then linear state interpolation.
        const double sm = pts[i - 1].arc - pts[i].arc;
        const double sp = pts[i + 1].arc - pts[i].arc;
        const double t = parabola_vertex(amp_n[i - 1], amp_n[i], amp_n[i + 1]);
        const double s_star = t < 0.0 ? -t * sm : t * sp;
        const int other = t < 0.0 ? i - 1 : i + 1;
        const double span = t < 0.0 ? sm : sp;
        const double w = span != 0.0 ? s_star / span : 0.0;
        Eigen::VectorXd y_guess = (1.0 - w) * pts[i].y + w * pts[other].y;

        PeakRecord rec;
        rec.F = branch.F;
        const double omega_star = y_guess[y_guess.size() - 1];
        try {
            const HarmonicVector X_peak =
                solve_hbm(sys, y_guess.head(y_guess.size() - 1), omega_star, branch.F, opts);
            rec.omega_peak = omega_star;
            rec.X_super = total_amplitude(X_peak, omega_star, sys.Nt);
            rec.Xn_peak = std::hypot(X_peak[idx_cos(n)], X_peak[idx_sin(n)]);
            rec.phi_n = harmonic_phase(X_peak, n);
        } catch (const SolverError&) {
            continue;  // unresolvable wiggle, not a physical peak
        }

        // Nominal response at 1.1 * omega_peak: nearest branch crossing in
        // arclength gives the guess, then a fresh solve at exactly that
        // frequency.
        const double omega_nom = 1.1 * rec.omega_peak;
        int best = -1;
        double best_dist = std::numeric_limits<double>::max();
        for (int j = 0; j + 1 < N; ++j) {
            const double w0 = branch_omega(pts[j]), w1 = branch_omega(pts[j + 1]);
            if ((w0 - omega_nom) * (w1 - omega_nom) > 0.0) continue;
            const double dist = std::abs(0.5 * (pts[j].arc + pts[j + 1].arc) - pts[i].arc);
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        HarmonicVector guess;
        if (best >= 0) {
            const double w0 = branch_omega(pts[best]), w1 = branch_omega(pts[best + 1]);
            const double u = w1 != w0 ? (omega_nom - w0) / (w1 - w0) : 0.0;
            guess = (1.0 - u) * branch_X(pts[best]) + u * branch_X(pts[best + 1]);
        } else {
            guess = linear_frf(sys, omega_nom, branch.F);
        }
        try {
            const HarmonicVector X_nom = solve_hbm(sys, guess, omega_nom, branch.F, opts);
            rec.X_nom = total_amplitude(X_nom, omega_nom, sys.Nt);
        } catch (const SolverError&) {
            rec.X_nom = std::numeric_limits<double>::quiet_NaN();
        }
        peaks.push_back(rec);
    }
    return peaks;
}

EnvelopeBand frc_envelope(const std::vector<FrcBranch>& branches, bool normalize_by_force,
                          int grid_points) {
    if (branches.size() < 2) throw std::invalid_argument("frc_envelope: need at least 2 FRCs");

    double lo = 0.0, hi = std::numeric_limits<double>::max();
    for (const auto& br : branches) {
        double blo = std::numeric_limits<double>::max(), bhi = 0.0;
        for (const auto& p : br.points) {
            blo = std::min(blo, branch_omega(p));
            bhi = std::max(bhi, branch_omega(p));
        }
        lo = std::max(lo, blo);
        hi = std::min(hi, bhi);
    }
    if (!(hi > lo)) throw std::invalid_argument("frc_envelope: disjoint frequency supports");

    EnvelopeBand band;
    band.freq.resize(grid_points);
    for (int g = 0; g < grid_points; ++g)
        band.freq[g] = lo * std::pow(hi / lo, static_cast<double>(g) / (grid_points - 1));
    band.amp_min.setConstant(grid_points, std::numeric_limits<double>::max());
    band.amp_max.setConstant(grid_points, 0.0);

    for (const auto& br : branches) {
        const double scale = normalize_by_force && br.F != 0.0 ? 1.0 / br.F : 1.0;
        // Walk segments in arc order and fold the interpolated amplitude of
        // every grid frequency the segment spans into the band.
        for (size_t j = 0; j + 1 < br.points.size(); ++j) {
            const double w0 = branch_omega(br.points[j]), w1 = branch_omega(br.points[j + 1]);
            const double a0 = total_amplitude(branch_X(br.points[j]), w0) * scale;
            const double a1 = total_amplitude(branch_X(br.points[j + 1]), w1) * scale;
            const double wlo = std::min(w0, w1), whi = std::max(w0, w1);
            const auto gbeg = std::lower_bound(band.freq.data(), band.freq.data() + grid_points, wlo) -
                              band.freq.data();
            for (auto g = gbeg; g < grid_points && band.freq[g] <= whi; ++g) {
                const double u = w1 != w0 ? (band.freq[g] - w0) / (w1 - w0) : 0.0;
                const double a = (1.0 - u) * a0 + u * a1;
                band.amp_min[g] = std::min(band.amp_min[g], a);
                band.amp_max[g] = std::max(band.amp_max[g], a);
            }
        }
    }
    return band;
}

ForceBand force_band(const FrcBranch& branch, double omega_lo, double omega_hi) {
    ForceBand fb;
    fb.F = branch.F;
    fb.amp_min = std::numeric_limits<double>::max();
    fb.amp_max = 0.0;
    for (const auto& p : branch.points) {
        const double w = branch_omega(p);
        if (w < omega_lo || w > omega_hi) continue;
        const double a = total_amplitude(branch_X(p), w);
        fb.amp_min = std::min(fb.amp_min, a);
        fb.amp_max = std::max(fb.amp_max, a);
    }
    if (fb.amp_min > fb.amp_max) {
        fb.amp_min = fb.amp_max = 0.0;
    }
    return fb;
}

double accuracy_metric(const std::vector<VprnmPoint>& backbone,
                       const std::vector<PeakRecord>& peaks, const std::vector<ForceBand>& bands,
                       bool log_force, bool normalize_by_force) {
    if (backbone.size() < 2 || peaks.empty() || bands.empty())
        throw std::invalid_argument("accuracy_metric: empty inputs");

    // Backbone total amplitude as a function of force level.
    std::vector<std::pair<double, double>> bb;
    bb.reserve(backbone.size());
    for (const auto& p : backbone) {
        const double scale = normalize_by_force && p.F != 0.0 ? 1.0 / p.F : 1.0;
        bb.emplace_back(p.F, total_amplitude(p.X, p.omega) * scale);
    }
    auto bb_amp_at = [&](double F) -> std::optional<double> {
        for (size_t j = 0; j + 1 < bb.size(); ++j) {
            const double F0 = bb[j].first, F1 = bb[j + 1].first;
            if ((F0 - F) * (F1 - F) > 0.0) continue;
            const double u = F1 != F0 ? (F - F0) / (F1 - F0) : 0.0;
            return (1.0 - u) * bb[j].second + u * bb[j + 1].second;
        }
        return std::nullopt;
    };

    struct Row {
        double F, defect, width;
    };
    std::vector<Row> rows;
    for (const auto& pk : peaks) {
        const auto amp = bb_amp_at(pk.F);
        if (!amp) continue;
        const auto band = std::find_if(bands.begin(), bands.end(),
                                       [&](const ForceBand& b) { return b.F == pk.F; });
        if (band == bands.end()) continue;
        const double scale = normalize_by_force && pk.F != 0.0 ? 1.0 / pk.F : 1.0;
        rows.push_back(Row{pk.F, std::abs(*amp - pk.X_super * scale),
                           (band->amp_max - band->amp_min) * scale});
    }
    if (rows.size() < 2) throw std::invalid_argument("accuracy_metric: empty force overlap");
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.F < b.F; });

    double num = 0.0, den = 0.0;
    for (size_t j = 0; j + 1 < rows.size(); ++j) {
        const double du = log_force ? std::log(rows[j + 1].F / rows[j].F)
                                    : rows[j + 1].F - rows[j].F;
        num += 0.5 * (rows[j].defect + rows[j + 1].defect) * du;
        den += 0.5 * (rows[j].width + rows[j + 1].width) * du;
    }
    if (den == 0.0) return 0.0;
    return 100.0 * num / den;
}

std::vector<AprioriSample> apriori_sweep(const SystemConfig& sys, int n,
                                         const std::vector<double>& amplitudes_over_xref,
                                         double omega, double x3_ratio, const HbmOptions& opts) {
    if (n < 2 || n > sys.H) throw std::invalid_argument("apriori_sweep: need 2 <= n <= H");
    for (double a : amplitudes_over_xref)
        if (!(a > 0.0)) throw std::invalid_argument("apriori_sweep: amplitudes must be > 0");

    const Scales sc = nondimensionalize(sys);
    const double mag_scale =
        sys.k_lin * sys.x_ref * (sc.F_s_hat > 0.0 ? sc.F_s_hat : 1.0);

    std::vector<AprioriSample> out;
    out.reserve(amplitudes_over_xref.size());
    for (double a : amplitudes_over_xref) {
        AprioriSample s;
        s.X1 = a * sys.x_ref;
        s.n = n;
        HarmonicVector X = HarmonicVector::Zero(2 * sys.H + 1);
        X[idx_cos(1)] = s.X1;
        if (x3_ratio > 0.0) {
            if (sys.H < 3 || n <= 3)
                throw std::invalid_argument("apriori_sweep: locked X3 needs H >= 3 and n > 3");
            const BroadbandForce b3 = broadband_force(sys, X, omega, 3, opts);
            if (b3.magnitude() == 0.0)
                throw std::invalid_argument(
                    "apriori_sweep: this force law does not excite the third harmonic");
            s.X3 = x3_ratio * s.X1;
            const double phi3 = b3.phase();
            X[idx_cos(3)] = s.X3 * std::cos(phi3);
            X[idx_sin(3)] = s.X3 * std::sin(phi3);
        }
        const BroadbandForce broad = broadband_force(sys, X, omega, n, opts);
        s.Fc = broad.Fc;
        s.Fs = broad.Fs;
        s.magnitude = broad.magnitude();
        if (s.magnitude > 1e-15 * sys.k_lin * sys.x_ref) {
            s.phi_broad = broad.phase();
            s.phi_n = expected_phase(broad);
        } else {
            s.phi_broad = std::numeric_limits<double>::quiet_NaN();
            s.phi_n = std::numeric_limits<double>::quiet_NaN();
        }
        s.X1_norm = a;
        s.mag_norm = s.magnitude / mag_scale;
        out.push_back(s);
    }
    return out;
}

std::pair<double, double> analytic_fbroad(const ForceModel& force, double X1, double X3,
                                          double omega, int n) {
    if (const auto* m = std::get_if<StiffeningDuffing>(&force)) {
        if (n == 3) return {-m->alpha * X1 * X1 * X1 / 4.0, 0.0};
        if (n == 5) return {3.0 * m->alpha * (X1 * X1 * X3 - X1 * X3 * X3) / 4.0, 0.0};
    } else if (const auto* m = std::get_if<SofteningDuffing>(&force)) {
        if (n == 3) return {-m->alpha * X1 * X1 * X1 / 4.0, 0.0};
        if (n == 5) return {-3.0 * m->alpha * (X1 * X3 * X3 + X1 * X1 * X3) / 4.0, 0.0};
    } else if (const auto* m = std::get_if<QuinticStiffness>(&force)) {
        const double X1_2 = X1 * X1, X3_2 = X3 * X3;
        if (n == 3) return {-5.0 * m->eta * X1_2 * X1_2 * X1 / 16.0, 0.0};
        if (n == 5)
            return {-m->eta *
                        (X1_2 * X1_2 * X1 - 20.0 * X1_2 * X1_2 * X3 + 30.0 * X1_2 * X1 * X3_2 -
                         30.0 * X1_2 * X3_2 * X3 + 20.0 * X1 * X3_2 * X3_2) /
                        16.0,
                    0.0};
    } else if (const auto* m = std::get_if<UnilateralSpring>(&force)) {
        if (n == 2) return {-2.0 * m->k_nl * X1 / (3.0 * M_PI), 0.0};
        if (n == 4) return {2.0 * m->k_nl * X1 / (15.0 * M_PI), 0.0};
    } else if (const auto* m = std::get_if<CubicDamping>(&force)) {
        const double w3 = omega * omega * omega;
        if (n == 3) return {0.0, -m->gamma * w3 * X1 * X1 * X1 / 4.0};
        if (n == 5)
            return {-9.0 * m->gamma * w3 * X1 * X1 * X3 / 4.0,
                    -27.0 * m->gamma * w3 * X1 * X3 * X3 / 4.0};
    }
    throw std::invalid_argument("analytic_fbroad: no closed form for " + force_kind_name(force) +
                                " at harmonic " + std::to_string(n));
}

}  // namespace vibratrak
