#pragma once

#include <cstddef>
#include <vector>

#include "specshare/model.hpp"

namespace specshare {

struct IterationSchedule {
    double eta = 0.1;                   // PU step, Algorithm 2
    double delta = 0.1;                 // PU step, Algorithm 3
    std::vector<double> eta_per_pu;     // Algorithm 4; falls back to eta when empty
    std::size_t inner_iters = 10;       // SU sweeps per outer round (Algorithm 2)
    std::size_t tau_factor = 3;         // Algorithm 3 PU epochs at n = tau_factor * k
    std::size_t max_outer = 500;
    std::size_t pu_inner_cap = 500;     // Algorithm 4 inner PU loop cap
    double tol = 1e-6;
    std::size_t window_len = 50;

    void validate() const;
};

enum class TraceStatus { Converged, Oscillating, MaxIterations };

const char* to_string(TraceStatus s);

struct SolveTrace {
    std::vector<PowerProfile> iterates;                 // one per outer round
    std::vector<std::vector<double>> utilities_per_iter;  // [iter][user]
    std::vector<std::vector<std::vector<double>>> isr_per_iter;  // [iter][pu][subchannel]
    TraceStatus status = TraceStatus::MaxIterations;
    std::size_t converged_at = 0;                       // valid when Converged
    PowerProfile final_profile;   // exact-snapped on convergence, else last iterate
    std::vector<std::vector<double>> final_isr;         // [pu][subchannel], of final_profile
};

// One relaxed PU update: (1-eta) p1 + eta [I/(rho g_kk) + waterfill residual].
// Throws InfeasibleIsrError when the ISR floors alone exceed the budget.
std::vector<double> pu_update(const std::vector<double>& p1_now,
                              const std::vector<double>& interference, const GainTensor& g,
                              const NetworkConfig& cfg, std::size_t pu, double eta);

// Classifier over the trailing window of iterates (aligned with the summed
// leader-utility history). Returns MaxIterations when neither converged nor
// oscillating yet.
TraceStatus classify(const std::vector<PowerProfile>& iterates,
                     const std::vector<double>& leader_utility, double tol,
                     std::size_t window_len);

SolveTrace run_alg2(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched, const std::vector<double>& init_p1);

SolveTrace run_alg3(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched, const std::vector<double>& init_p1,
                    const PowerProfile& init_su);

SolveTrace run_alg4(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched);

}  // namespace specshare
