#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "specshare/configio.hpp"

namespace specshare {

// Built-in parameter sets for the batch reproduction runs. Each returns a
// fully resolved config; the drivers below add the experiment wiring.
LoadedConfig fig1_config();                  // symmetric ensemble, fixed PU power, NE averages
LoadedConfig fig2_config();                  // path-loss placement, single-draw trajectories
LoadedConfig fig36_config(double step);      // explicit-variance ensemble, step-size study
LoadedConfig fig7_config(double budget1);    // symmetric ensemble, leader budget sweep point
LoadedConfig fig8_config();                  // two-PU ensemble

// Leader budget sweep of the rate-comparison figure.
const std::vector<double>& fig7_budgets();

std::vector<std::string> figure_ids();       // fig1, fig2, fig3-6, fig7, fig8

struct FigureCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;   // measured quantity
    double bound = 0.0;   // tolerance/threshold it is compared against
    std::string note;
};

struct FigureResult {
    std::string id;
    std::vector<std::filesystem::path> outputs;  // files written (without the manifest)
    std::vector<FigureCheck> checks;
    json summary;                                // what went into <id>_summary.json
};

// Runs one figure reproduction into outdir. realizations == 0 keeps the
// figure's default; decimate thins iterate-indexed CSV rows. Throws
// std::invalid_argument for unknown ids.
FigureResult run_figure(const std::string& id, const std::filesystem::path& outdir,
                        std::uint64_t seed, std::size_t realizations, std::size_t decimate);

}  // namespace specshare
