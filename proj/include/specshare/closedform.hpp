#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specshare/model.hpp"

namespace specshare {

struct SymmetricParams {
    double c = 0.0;                       // common cross-to-direct ratio, < 1
    std::vector<double> sigma;            // sorted ascending
    std::vector<std::size_t> perm;        // perm[r] = original index of sorted rank r
    std::vector<std::size_t> su_order;    // SU indices, larger budget first
};

struct SymmetricDetect {
    bool ok = false;
    SymmetricParams params;
    std::string failed_family;            // set when !ok
    double worst_rel_err = 0.0;
};

struct ClosedFormNE {
    std::vector<double> p2, p3;           // original sub-carrier numbering; p2 = larger budget
    std::size_t k1 = 0, k2 = 0;
    double t1_star = 0.0, t2_star = 0.0;
};

// Checks the perfectly-symmetric-channel conditions (2 SUs, 1 PU): constant
// symmetric cross ratio, matching noise-to-gain and PU-gain ratios across the
// SU pair. Throws std::domain_error if the common ratio c >= 1.
SymmetricDetect detect_symmetric(const PowerProfile& pu_powers, const GainTensor& g,
                                 const NetworkConfig& cfg, double rel_tol = 1e-9);

// Closed-form two-user NE on a symmetric instance. Budgets follow
// params.su_order (budget2 >= budget3).
ClosedFormNE closed_form_ne(const SymmetricParams& params, double budget2, double budget3);

// Convenience: detect + closed form + assemble a full profile (PU rows from
// pu_powers, SU rows at the closed-form NE). Empty when not symmetric.
std::optional<PowerProfile> closed_form_profile(const PowerProfile& pu_powers, const GainTensor& g,
                                                const NetworkConfig& cfg, double rel_tol = 1e-9);

}  // namespace specshare
