#include "specshare/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specshare/waterfill.hpp"

namespace specshare {

namespace {

// worst relative disagreement within a set of values that should be equal
double rel_spread(const std::vector<double>& vals) {
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    double scale = std::max(std::abs(lo), std::abs(hi));
    if (scale == 0.0) return 0.0;
    return (hi - lo) / scale;
}

}  // namespace

SymmetricDetect detect_symmetric(const PowerProfile& pu_powers, const GainTensor& g,
                                 const NetworkConfig& cfg, double rel_tol) {
    if (cfg.sus.size() != 2 || cfg.pus.size() != 1)
        throw std::invalid_argument("detect_symmetric: needs exactly 2 SUs and 1 PU");
    SymmetricDetect det;
    const std::size_t i = cfg.sus[0], j = cfg.sus[1];
    const std::size_t pu = cfg.pus[0];
    const std::size_t N = cfg.n_sub;

    // family 1: cross ratios constant over f and symmetric across the pair
    std::vector<double> ratios;
    for (std::size_t f = 0; f < N; ++f) {
        ratios.push_back(g.at(i, j, f) / g.at(j, j, f));
        ratios.push_back(g.at(j, i, f) / g.at(i, i, f));
    }
    double err = rel_spread(ratios);
    if (err > rel_tol) {
        det.failed_family = "cross-ratio";
        det.worst_rel_err = err;
        return det;
    }
    double c = ratios[0];
    if (c >= 1.0)
        throw std::domain_error("detect_symmetric: cross ratio c >= 1");

    // family 2: noise-to-direct-gain ratio equal across the SU pair, per f
    double worst2 = 0.0;
    for (std::size_t f = 0; f < N; ++f) {
        double a = cfg.noise[i][f] / g.at(i, i, f);
        double b = cfg.noise[j][f] / g.at(j, j, f);
        worst2 = std::max(worst2, rel_spread({a, b}));
    }
    if (worst2 > rel_tol) {
        det.failed_family = "noise-ratio";
        det.worst_rel_err = worst2;
        return det;
    }

    // family 3: PU-to-direct-gain ratio equal across the SU pair, per f
    double worst3 = 0.0;
    for (std::size_t f = 0; f < N; ++f) {
        double a = g.at(pu, i, f) / g.at(i, i, f);
        double b = g.at(pu, j, f) / g.at(j, j, f);
        worst3 = std::max(worst3, rel_spread({a, b}));
    }
    if (worst3 > rel_tol) {
        det.failed_family = "pu-gain-ratio";
        det.worst_rel_err = worst3;
        return det;
    }

    det.ok = true;
    det.params.c = c;
    std::vector<double> sig(N);
    for (std::size_t f = 0; f < N; ++f)
        sig[f] = (cfg.noise[i][f] + pu_powers.at(pu, f) * g.at(pu, i, f)) / g.at(i, i, f);
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return sig[a] < sig[b]; });
    det.params.perm = perm;
    det.params.sigma.resize(N);
    for (std::size_t r = 0; r < N; ++r) det.params.sigma[r] = sig[perm[r]];
    if (cfg.budgets[i] >= cfg.budgets[j])
        det.params.su_order = {i, j};
    else
        det.params.su_order = {j, i};
    return det;
}

ClosedFormNE closed_form_ne(const SymmetricParams& params, double budget2, double budget3) {
    if (budget2 < budget3)
        throw std::invalid_argument("closed_form_ne: budget2 must be >= budget3");
    const double c = params.c;
    const std::vector<double>& s = params.sigma;
    const std::size_t N = s.size();
    const double inf = std::numeric_limits<double>::infinity();

    ClosedFormNE out;
    std::vector<double> p2s(N, 0.0), p3s(N, 0.0);
    if (budget2 <= 0.0) {
        out.p2.assign(N, 0.0);
        out.p3.assign(N, 0.0);
        return out;
    }

    // phi^2_k = (1/(1+c)) * sum_{i<=k} (sigma_k - sigma_i); breakpoints for user 3
    std::size_t k2 = 0;
    double t2 = 0.0;
    if (budget3 > 0.0) {
        std::vector<double> phi2(N + 2, 0.0);
        double csum = 0.0;
        for (std::size_t k = 1; k <= N; ++k) {
            csum += s[k - 1];
            phi2[k] = (static_cast<double>(k) * s[k - 1] - csum) / (1.0 + c);
        }
        phi2[N + 1] = inf;
        for (std::size_t k = 1; k <= N; ++k)
            if (phi2[k] < budget3 && budget3 <= phi2[k + 1]) {
                k2 = k;
                break;
            }
        double s_head = 0.0;
        for (std::size_t r = 0; r < k2; ++r) s_head += s[r];
        t2 = ((1.0 + c) * budget3 + s_head) / static_cast<double>(k2);
        for (std::size_t r = 0; r < k2; ++r) p3s[r] = (t2 - s[r]) / (1.0 + c);
    }

    // phi^1_k for user 2, k >= k2
    double s_head = 0.0;
    for (std::size_t r = 0; r < k2; ++r) s_head += s[r];
    auto phi1 = [&](std::size_t k) -> double {
        if (k > N) return inf;
        double acc = 0.0;
        for (std::size_t r = k2; r < k; ++r) acc += s[k - 1] - s[r];
        acc += (static_cast<double>(k2) * ((1.0 + c) * s[k - 1] - c * t2) - s_head) / (1.0 + c);
        return acc;
    };

    std::size_t k1;
    if (k2 > 0 && budget2 <= phi1(k2 + 1)) {
        k1 = k2;
    } else {
        k1 = N;
        for (std::size_t k = std::max<std::size_t>(k2, 1); k <= N; ++k)
            if (phi1(k) < budget2 && budget2 <= phi1(k + 1)) {
                k1 = k;
                break;
            }
    }

    double s_mid = 0.0;
    for (std::size_t r = k2; r < k1; ++r) s_mid += s[r];
    double t1 = (budget2 + s_mid +
                 (static_cast<double>(k2) * c * t2 + s_head) / (1.0 + c)) /
                static_cast<double>(k1);
    for (std::size_t r = 0; r < k1; ++r) {
        if (r < k2)
            p2s[r] = t1 - (c * t2 + s[r]) / (1.0 + c);
        else
            p2s[r] = t1 - s[r];
    }

    out.k1 = k1;
    out.k2 = k2;
    out.t1_star = t1;
    out.t2_star = t2;
    out.p2.assign(N, 0.0);
    out.p3.assign(N, 0.0);
    for (std::size_t r = 0; r < N; ++r) {
        out.p2[params.perm[r]] = p2s[r];
        out.p3[params.perm[r]] = p3s[r];
    }
    return out;
}

std::optional<PowerProfile> closed_form_profile(const PowerProfile& pu_powers, const GainTensor& g,
                                                const NetworkConfig& cfg, double rel_tol) {
    if (cfg.sus.size() != 2 || cfg.pus.size() != 1) return std::nullopt;
    auto det = detect_symmetric(pu_powers, g, cfg, rel_tol);
    if (!det.ok) return std::nullopt;
    auto ne = closed_form_ne(det.params, cfg.budgets[det.params.su_order[0]],
                             cfg.budgets[det.params.su_order[1]]);
    PowerProfile prof = pu_powers;
    prof.set_row(det.params.su_order[0], ne.p2);
    prof.set_row(det.params.su_order[1], ne.p3);
    return prof;
}

}  // namespace specshare
