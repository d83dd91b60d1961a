#include "specshare/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace specshare {

void NetworkConfig::validate() const {
    if (n_users == 0 || n_sub == 0)
        throw std::invalid_argument("config: empty dimensions");
    if (pus.empty())
        throw std::invalid_argument("config: at least one PU required");
    std::vector<bool> seen(n_users, false);
    for (auto grp : {&pus, &sus})
        for (std::size_t u : *grp) {
            if (u >= n_users)
                throw std::invalid_argument("config: user index out of range");
            if (seen[u])
                throw std::invalid_argument("config: user listed twice");
            seen[u] = true;
        }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw std::invalid_argument("config: every user must be a PU or an SU");
    if (budgets.size() != n_users)
        throw std::invalid_argument("config: budgets size mismatch");
    for (double b : budgets)
        if (!(b >= 0.0) || !std::isfinite(b))
            throw std::invalid_argument("config: budget must be finite and nonnegative");
    if (noise.size() != n_users)
        throw std::invalid_argument("config: noise size mismatch");
    for (const auto& row : noise) {
        if (row.size() != n_sub)
            throw std::invalid_argument("config: noise row size mismatch");
        for (double v : row)
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("config: noise must be positive and finite");
    }
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("config: rho must be positive and finite");
}

void validate_profile(const PowerProfile& prof, const NetworkConfig& cfg, double tol) {
    if (prof.n_users != cfg.n_users || prof.n_sub != cfg.n_sub)
        throw std::invalid_argument("profile: dimension mismatch");
    for (std::size_t i = 0; i < prof.n_users; ++i) {
        for (std::size_t f = 0; f < prof.n_sub; ++f)
            if (!(prof.at(i, f) >= -tol) || !std::isfinite(prof.at(i, f)))
                throw std::invalid_argument("profile: negative or non-finite power");
        if (prof.row_sum(i) > cfg.budgets[i] + tol)
            throw std::invalid_argument("profile: budget exceeded for user " + std::to_string(i));
    }
}

std::vector<double> interference_from(const PowerProfile& prof, const GainTensor& g,
                                      std::size_t rx, const std::vector<std::size_t>& interferers) {
    std::vector<double> out(prof.n_sub, 0.0);
    for (std::size_t j : interferers)
        for (std::size_t f = 0; f < prof.n_sub; ++f)
            out[f] += prof.at(j, f) * g.at(j, rx, f);
    return out;
}

std::vector<double> interference_plus_noise(const PowerProfile& prof, const GainTensor& g,
                                            const NetworkConfig& cfg, std::size_t i) {
    std::vector<double> out(cfg.noise[i]);
    for (std::size_t j = 0; j < prof.n_users; ++j) {
        if (j == i) continue;
        for (std::size_t f = 0; f < prof.n_sub; ++f)
            out[f] += prof.at(j, f) * g.at(j, i, f);
    }
    return out;
}

double utility(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
               std::size_t i) {
    auto denom = interference_plus_noise(prof, g, cfg, i);
    double u = 0.0;
    for (std::size_t f = 0; f < prof.n_sub; ++f)
        u += std::log1p(prof.at(i, f) * g.at(i, i, f) / denom[f]);
    return u;
}

std::vector<double> isr(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
                        std::size_t k) {
    std::vector<std::size_t> interferers;
    for (std::size_t u : cfg.pus)
        if (u != k) interferers.push_back(u);
    for (std::size_t u : cfg.sus) interferers.push_back(u);

    auto inter = interference_from(prof, g, k, interferers);
    std::vector<double> out(prof.n_sub, 0.0);
    for (std::size_t f = 0; f < prof.n_sub; ++f) {
        double sig = prof.at(k, f) * g.at(k, k, f);
        if (inter[f] <= 0.0)
            out[f] = 0.0;
        else if (sig <= 0.0)
            out[f] = std::numeric_limits<double>::infinity();
        else
            out[f] = inter[f] / sig;
    }
    return out;
}

}  // namespace specshare
