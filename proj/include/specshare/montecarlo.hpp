#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specshare/iterative.hpp"
#include "specshare/model.hpp"
#include "specshare/stackelberg.hpp"
#include "specshare/subgame.hpp"

namespace specshare {

enum class ChannelKind { VarianceSpec, PathLoss };

// Declares h_target = scale * h_source for a whole (tx, rx) pair across all
// sub-channels, so power gains copy with scale^2. Targets must be unique and
// the link graph acyclic; sources are resolved first.
struct GainLink {
    std::size_t target_tx = 0, target_rx = 0;
    std::size_t source_tx = 0, source_rx = 0;
    double scale = 1.0;
};

// Random channel ensemble. `variances` holds E|h_{i,j}^f|^2 of the complex
// coefficient per pair and sub-channel. In PathLoss mode the coefficient is
// d_{i,j}^{-alpha} * h~ with h~ drawn from those variances and transmitter /
// receiver positions uniform in an area x area square, redrawn per
// realization.
struct ChannelModel {
    ChannelKind kind = ChannelKind::VarianceSpec;
    std::size_t n_users = 0, n_sub = 0;
    std::vector<double> variances;  // [tx][rx][f], flattened like GainTensor
    double alpha = 2.0;             // path-loss exponent
    double area = 10.0;             // square side
    std::vector<GainLink> links;

    static ChannelModel variance_spec(std::size_t n_users, std::size_t n_sub);
    static ChannelModel path_loss(std::size_t n_users, std::size_t n_sub, double alpha = 2.0,
                                  double area = 10.0);

    double var(std::size_t i, std::size_t j, std::size_t f) const {
        return variances[(i * n_users + j) * n_sub + f];
    }
    void set_pair(std::size_t i, std::size_t j, const std::vector<double>& v);

    // Links sorted so every source precedes its dependents; throws on cycles,
    // duplicate targets, self-links, or out-of-range indices.
    std::vector<GainLink> ordered_links() const;
    void validate() const;
};

// One realization of the power-gain tensor. Deterministic in realization_seed;
// every (i, j, f) consumes exactly one Gaussian pair in row-major order (after
// the position draws in PathLoss mode), so linked or zero-variance pairs do
// not shift the stream.
GainTensor draw_gains(const ChannelModel& model, const NetworkConfig& cfg,
                      std::uint64_t realization_seed);

enum class AlgorithmKind { NeClosedForm, NeIterative, Se, Alg2, Alg3, Alg4 };
enum class InitPolicy { Zeros, Waterfill, Given };

const char* to_string(AlgorithmKind k);

struct ExperimentSpec {
    NetworkConfig config;
    ChannelModel channel;
    std::size_t realizations = 10000;
    std::uint64_t seed = 1;
    AlgorithmKind algorithm = AlgorithmKind::NeClosedForm;
    IterationSchedule schedule;   // alg2/alg3/alg4
    SearchSpec search;            // SE (its seed is re-derived per realization)
    InitPolicy init = InitPolicy::Waterfill;  // PU starting power
    std::vector<double> init_p1;              // used when init == Given
    double ne_tol = 1e-8;                     // NE solves
    std::size_t ne_sweeps = 500;
    SweepOrder ne_order = SweepOrder::Simultaneous;
    std::size_t curve_cap = 0;                // stored curve length; 0 = schedule.max_outer

    void validate() const;
};

enum class OutcomeKind {
    Converged,
    MaxIterations,
    Oscillating,
    InfeasibleIsr,
    InfeasibleLeader,
    SolverError
};

const char* to_string(OutcomeKind k);

struct RealizationResult {
    OutcomeKind outcome = OutcomeKind::SolverError;
    PowerProfile profile;                     // final state (empty when aborted)
    std::vector<double> utilities;            // per user at the final state
    std::vector<std::vector<double>> curve;   // [iteration][user] utilities (trace runs)
    std::size_t iterations = 0;
    std::string error;                        // SolverError message
};

struct OutcomeCounts {
    std::size_t converged = 0, max_iterations = 0, oscillating = 0;
    std::size_t infeasible_isr = 0, infeasible_leader = 0, solver_error = 0;
    std::size_t total() const {
        return converged + max_iterations + oscillating + infeasible_isr + infeasible_leader +
               solver_error;
    }
};

struct ExperimentReport {
    std::size_t realizations = 0;
    OutcomeCounts counts;
    // Converged realizations only; empty when none converged.
    std::vector<double> mean_powers;     // [user * sub], PowerProfile layout
    std::vector<double> mean_utilities;  // [user]
    // Every realization that produced an iterate trace (converged, oscillating
    // or max-iterations); shorter traces are extended with their final value.
    std::vector<std::vector<double>> mean_curves;  // [user][iteration]
    std::size_t curve_total = 0;                   // traces contributing
    double mean_iterations = 0.0;                  // over traces
    double fraction_converged = 0.0;
    std::vector<std::string> error_samples;        // first few solver-error messages
};

// Worker cap: SPECSHARE_THREADS when set and positive, else the OpenMP
// default, else 1.
std::size_t worker_count();

// Runs one realization (index r); deterministic in (spec.seed, r). ISR and
// leader infeasibility come back as outcomes; other solver exceptions
// propagate.
RealizationResult run_realization(const ExperimentSpec& spec, std::size_t r);

// Batch run. Realizations are processed in fixed 64-realization blocks merged
// in index order, so results are bit-identical for any worker count; the
// serial variant runs the same reduction without OpenMP and is kept as the
// benchmark baseline. Throws only when more than half the realizations raise
// unexpected solver errors (infeasibility is a counted outcome, not an error).
ExperimentReport run_experiment(const ExperimentSpec& spec);
ExperimentReport run_experiment_serial(const ExperimentSpec& spec);

}  // namespace specshare
