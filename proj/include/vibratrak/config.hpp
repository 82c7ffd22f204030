#pragma once

#include <string>
#include <vector>

#include "vibratrak/continuation.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/model.hpp"

namespace vibratrak {

enum class RunMode { Apriori, Frc, Vprnm, Compare, Bench, Validate };

std::string to_string(RunMode mode);

/// Sweep definitions. Force levels and frequencies are given in the
/// nondimensional units of the force tables (F_hat = F/(k_lin x_ref),
/// omega_hat = omega/omega0); amplitudes are multiples of x_ref.
struct SweepSpec {
    std::vector<double> force_levels_hat;
    double freq_min_hat = 0.0;
    double freq_max_hat = 0.0;
    std::vector<double> amplitudes_over_xref;
    double omega_hat = 0.0;  // evaluation frequency for a-priori sweeps
    double x3_ratio = 0.0;
};

struct CompareSpec {
    double window_lo = 0.9;  // envelope window, times the peak frequency
    double window_hi = 1.1;
    bool log_force = true;
};

struct RunConfig {
    RunMode mode = RunMode::Validate;
    SystemConfig system;
    int target_harmonic = 3;
    SweepSpec sweep;
    ContinuationConfig continuation;
    HbmOptions solver;
    CompareSpec compare;
    std::string out_dir = ".";
    std::string format = "csv";
    int threads = 0;          // 0: decide at run time
    double step_scale = 1.0;  // multiplies ds0/ds_max; CLI --step-scale
    std::string echo;         // normalized JSON of the parsed document
};

/// Parse and fully validate a JSON configuration document. Unknown keys are
/// rejected with their path; missing required keys are enumerated. Defaults:
/// Nt = 1024, solver tol = 1e-9, Iwan n_sliders = 100.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

}  // namespace vibratrak
