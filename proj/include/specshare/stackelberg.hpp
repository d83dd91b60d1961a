#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "specshare/model.hpp"

namespace specshare {

struct SearchSpec {
    std::size_t restarts = 16;
    std::uint64_t seed = 0;
    double initial_step_frac = 0.25;   // of budget1
    double step_floor = 1e-6;
    bool grid_oracle = false;          // exhaustive simplex lattice instead of pattern search
    std::size_t grid_points = 60;      // lattice steps per axis (budget/grid_points)
};

struct SearchStats {
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::vector<double> best_history;  // best-so-far utility after each restart
};

struct SEResult {
    std::vector<double> pu_power;
    PowerProfile su_profile;           // full profile: PU row = pu_power, SU rows at NE
    double leader_utility = 0.0;
    std::vector<double> follower_utilities;
    SearchStats search_stats;
};

// Solves the follower sub-game at p1 and returns the leader's utility, or
// nullopt when the reaction violates the ISR cap. Throws std::invalid_argument
// if p1 itself breaks nonnegativity or the leader budget.
std::optional<double> anticipated_utility(const std::vector<double>& p1, const GainTensor& g,
                                          const NetworkConfig& cfg,
                                          PowerProfile* reaction_out = nullptr);

// Multi-start projected pattern search over {p1 >= 0, sum <= budget1}
// (or the exhaustive lattice when search.grid_oracle). Single-PU only.
SEResult solve_leader(const GainTensor& g, const NetworkConfig& cfg, const SearchSpec& search);

}  // namespace specshare
