#include "specshare/subgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specshare/waterfill.hpp"

namespace specshare {

std::vector<double> best_response(std::size_t i, const PowerProfile& prof, const GainTensor& g,
                                  const NetworkConfig& cfg) {
    if (std::find(cfg.sus.begin(), cfg.sus.end(), i) == cfg.sus.end())
        throw std::invalid_argument("best_response: user is not an SU");
    auto denom = interference_plus_noise(prof, g, cfg, i);
    std::vector<double> sigma(cfg.n_sub);
    for (std::size_t f = 0; f < cfg.n_sub; ++f) {
        double gii = g.at(i, i, f);
        sigma[f] = gii > 0.0 ? denom[f] / gii : std::numeric_limits<double>::infinity();
    }
    return waterfill(sigma, cfg.budgets[i]).powers;
}

NEResult solve_ne(const PowerProfile& init, const GainTensor& g, const NetworkConfig& cfg,
                  double tol, std::size_t max_iter, SweepOrder order) {
    NEResult r;
    r.profile = init;
    PowerProfile next = init;
    for (std::size_t k = 0; k < max_iter; ++k) {
        double delta = 0.0;
        if (order == SweepOrder::Simultaneous) {
            for (std::size_t i : cfg.sus) {
                auto br = best_response(i, r.profile, g, cfg);
                for (std::size_t f = 0; f < cfg.n_sub; ++f)
                    delta = std::max(delta, std::abs(br[f] - r.profile.at(i, f)));
                next.set_row(i, br);
            }
            r.profile = next;
        } else {
            for (std::size_t i : cfg.sus) {
                auto br = best_response(i, r.profile, g, cfg);
                for (std::size_t f = 0; f < cfg.n_sub; ++f)
                    delta = std::max(delta, std::abs(br[f] - r.profile.at(i, f)));
                r.profile.set_row(i, br);
            }
        }
        r.iterations = k + 1;
        r.final_delta = delta;
        if (delta <= tol) {
            r.converged = true;
            break;
        }
    }
    return r;
}

VerifyResult verify_ne(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
                       double tol) {
    VerifyResult v;
    for (std::size_t i : cfg.sus) {
        auto br = best_response(i, prof, g, cfg);
        for (std::size_t f = 0; f < cfg.n_sub; ++f)
            v.max_deviation = std::max(v.max_deviation, std::abs(br[f] - prof.at(i, f)));
    }
    v.ok = v.max_deviation <= tol;
    return v;
}

std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

DiagnosticReport diagnostics(const PowerProfile& pu_powers, const GainTensor& g,
                             const NetworkConfig& cfg) {
    DiagnosticReport rep;
    const auto& su = cfg.sus;
    const std::size_t m = su.size();
    const std::size_t N = cfg.n_sub;

    // PU-side interference per SU receiver and sub-channel
    std::vector<std::vector<double>> pu_int(m, std::vector<double>(N, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t p : cfg.pus)
            for (std::size_t f = 0; f < N; ++f)
                pu_int[a][f] += pu_powers.at(p, f) * g.at(p, su[a], f);

    rep.m_matrix.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) {
                rep.m_matrix[a][b] = 1.0;
                continue;
            }
            std::size_t i = su[a], j = su[b];
            double worst = 0.0;
            for (std::size_t f = 0; f < N; ++f) {
                double num = cfg.noise[i][f] + pu_int[a][f];
                for (std::size_t lb = 0; lb < m; ++lb)
                    num += g.at(su[lb], i, f) * cfg.budgets[su[lb]];
                double den = cfg.noise[j][f] + pu_int[b][f];
                double ratio = (g.at(i, j, f) / g.at(i, i, f)) * (num / den);
                worst = std::max(worst, ratio);
            }
            rep.m_matrix[a][b] = -worst;
        }
    }
    std::vector<std::vector<double>> sym(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            sym[a][b] = 0.5 * (rep.m_matrix[a][b] + rep.m_matrix[b][a]);
    auto ev = symmetric_eigenvalues(sym);
    rep.m_positive_definite = !ev.empty() && ev.front() > 1e-12;

    rep.c_norms.resize(N);
    rep.contraction_holds = true;
    rep.max_spectral_radius = 0.0;
    for (std::size_t f = 0; f < N; ++f) {
        std::vector<std::vector<double>> C(m, std::vector<double>(m, 0.0));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                if (a != b) C[a][b] = g.at(su[a], su[b], f) / g.at(su[b], su[b], f);
        double inf_norm = 0.0, one_norm = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            double rsum = 0.0, csum = 0.0;
            for (std::size_t b = 0; b < m; ++b) {
                rsum += std::abs(C[a][b]);
                csum += std::abs(C[b][a]);
            }
            inf_norm = std::max(inf_norm, rsum);
            one_norm = std::max(one_norm, csum);
        }
        rep.c_norms[f] = {inf_norm, one_norm};
        if (std::min(inf_norm, one_norm) >= 1.0) rep.contraction_holds = false;

        // informational spectral radius: power iteration on the nonnegative C
        std::vector<double> v(m, 1.0);
        double lam = 0.0;
        for (int it = 0; it < 200; ++it) {
            std::vector<double> w(m, 0.0);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < m; ++b) w[a] += C[a][b] * v[b];
            double norm = 0.0;
            for (double x : w) norm = std::max(norm, std::abs(x));
            if (norm == 0.0) {
                lam = 0.0;
                break;
            }
            for (double& x : w) x /= norm;
            lam = norm;
            v = w;
        }
        rep.max_spectral_radius = std::max(rep.max_spectral_radius, lam);
    }
    return rep;
}

}  // namespace specshare
