#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vibratrak/config.hpp"
#include "vibratrak/errors.hpp"
#include "vibratrak/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"vibratrak - harmonic balance solver with superharmonic resonance tracking"};
    app.set_version_flag("--version", std::string(VIBRATRAK_VERSION));

    std::string mode;
    std::string config_path;
    std::string out_dir;
    int threads = -1;
    double step_scale = 1.0;

    app.add_option("mode", mode, "one of: apriori, frc, vprnm, compare, bench, validate")
        ->required();
    app.add_option("--config", config_path, "path to the JSON configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--threads", threads, "worker threads (fallback: VIBRATRAK_THREADS)");
    app.add_option("--step-scale", step_scale, "multiply continuation step sizes");

    CLI11_PARSE(app, argc, argv);

    try {
        vibratrak::RunConfig cfg = vibratrak::load_config_file(config_path);
        if (vibratrak::to_string(cfg.mode) != mode)
            throw vibratrak::ConfigError("config mode '" + vibratrak::to_string(cfg.mode) +
                                         "' does not match CLI mode '" + mode + "'");
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads >= 0) {
            cfg.threads = threads;
        } else if (cfg.threads == 0) {
            if (const char* env = std::getenv("VIBRATRAK_THREADS")) cfg.threads = std::atoi(env);
        }
        if (step_scale != 1.0) cfg.step_scale = step_scale;

        const vibratrak::ResultSet rs = vibratrak::run(cfg);
        std::cout << rs.summary << "\n";
        for (const auto& f : rs.files_written) std::cout << "wrote " << f << "\n";
        return rs.exit_code;
    } catch (const vibratrak::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vibratrak::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
