#pragma once

#include <cstddef>
#include <vector>

namespace specshare {

struct WaterfillResult {
    std::vector<double> powers;
    double level = 0.0;                    // water level
    std::vector<std::size_t> active_set;   // indices with powers > 0
    double residual = 0.0;                 // budget - sum(powers)
};

// Classic water-filling: p_f = max(level - sigma_f, 0) with level chosen so
// sum p = budget. Bisection on [min sigma, min sigma + budget] followed by an
// exact active-set snap so the budget matches to machine precision.
WaterfillResult waterfill(const std::vector<double>& sigma, double budget);

// Floor-constrained variant: p_f = floor_f + max(level - sigma_f, 0), the
// residual budget water-filled on top of the floors with unadjusted sigma.
// Throws InfeasibleIsrError if sum(floors) > budget.
WaterfillResult waterfill_with_floors(const std::vector<double>& sigma, double budget,
                                      const std::vector<double>& floors);

}  // namespace specshare
