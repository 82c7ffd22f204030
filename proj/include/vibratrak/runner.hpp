#pragma once

#include <string>
#include <vector>

#include "vibratrak/analysis.hpp"
#include "vibratrak/config.hpp"
#include "vibratrak/vprnm.hpp"

namespace vibratrak {

/// Trace the FRC at one force level (dimensional F) across a dimensional
/// frequency range, seeding from the linear prediction at omega_lo.
FrcBranch compute_frc(const SystemConfig& sys, double F, double omega_lo, double omega_hi,
                      const ContinuationConfig& ccfg, const HbmOptions& hbm,
                      BranchDiagnostics* diag = nullptr);

/// FRCs for a grid of force levels; levels run in a worker pool, output order
/// is the input order regardless of scheduling. A level whose solve fails
/// leaves an empty branch and its message in row_errors; the run continues.
std::vector<FrcBranch> compute_frc_grid(const SystemConfig& sys, const std::vector<double>& forces,
                                        double omega_lo, double omega_hi,
                                        const ContinuationConfig& ccfg, const HbmOptions& hbm,
                                        int threads, long long* total_solves = nullptr,
                                        std::vector<std::string>* row_errors = nullptr);

struct CompareResult {
    std::vector<FrcBranch> frcs;
    std::vector<PeakRecord> peaks;   // lowest peak per force level (tracked harmonic)
    std::vector<ForceBand> bands;    // FRC amplitude extent over the peak window
    std::vector<VprnmPoint> backbone;
    double accuracy_percent = 0.0;
    long long hbm_solves = 0;
    long long vprnm_solves = 0;
    double hbm_wall_s = 0.0;
    double vprnm_wall_s = 0.0;
};

/// Full comparison pipeline: FRC grid + peak extraction + VPRNM backbone +
/// the amplitude-shift accuracy metric.
CompareResult run_compare(const RunConfig& cfg);

struct ResultSet {
    int exit_code = 0;
    std::vector<std::string> files_written;
    std::string summary;
};

/// Execute a parsed configuration and persist results under cfg.out_dir.
ResultSet run(const RunConfig& cfg);

}  // namespace vibratrak
