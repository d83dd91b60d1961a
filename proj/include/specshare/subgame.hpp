#pragma once

#include <cstddef>
#include <vector>

#include "specshare/model.hpp"

namespace specshare {

struct NEResult {
    PowerProfile profile;     // full profile; PU rows as given, SU rows at the NE
    std::size_t iterations = 0;
    bool converged = false;
    double final_delta = 0.0;
};

struct DiagnosticReport {
    std::vector<std::vector<double>> m_matrix;   // |S| x |S|
    bool m_positive_definite = false;
    // per sub-channel: (inf-norm, 1-norm) of C^f
    std::vector<std::pair<double, double>> c_norms;
    bool contraction_holds = false;
    double max_spectral_radius = 0.0;            // informational, max over f
};

enum class SweepOrder { Simultaneous, Sequential };

// Water-fill best response of SU i against everyone else's current powers.
std::vector<double> best_response(std::size_t i, const PowerProfile& prof, const GainTensor& g,
                                  const NetworkConfig& cfg);

// Algorithm 1: iterate best responses from init until max |delta| <= tol.
// PU rows of init are held fixed throughout.
NEResult solve_ne(const PowerProfile& init, const GainTensor& g, const NetworkConfig& cfg,
                  double tol = 1e-8, std::size_t max_iter = 500,
                  SweepOrder order = SweepOrder::Simultaneous);

struct VerifyResult {
    bool ok = false;
    double max_deviation = 0.0;
};

// Checks the NE fixed-point property: each SU row equals its best response.
VerifyResult verify_ne(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
                       double tol);

// Uniqueness (M-matrix) and contraction diagnostics for the sub-game at the
// given PU powers.
DiagnosticReport diagnostics(const PowerProfile& pu_powers, const GainTensor& g,
                             const NetworkConfig& cfg);

// Symmetric eigenvalues via cyclic Jacobi rotations; exposed for tests.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a);

}  // namespace specshare
