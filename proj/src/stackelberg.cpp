#include "specshare/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "specshare/closedform.hpp"
#include "specshare/rng.hpp"
#include "specshare/subgame.hpp"
#include "specshare/waterfill.hpp"

namespace specshare {

namespace {

// Euclidean projection onto {p >= 0, sum p <= budget}
std::vector<double> project_simplex_cap(std::vector<double> p, double budget) {
    for (double& x : p) x = std::max(x, 0.0);
    double s = 0.0;
    for (double x : p) s += x;
    if (s <= budget) return p;
    std::vector<double> u = p;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        double t = (css - budget) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            k = i + 1;
            theta = t;
        }
    }
    (void)k;
    for (double& x : p) x = std::max(x - theta, 0.0);
    return p;
}

struct VecKeyHash {
    std::size_t operator()(const std::vector<long long>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (long long x : v) {
            h ^= static_cast<std::size_t>(x);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

class Evaluator {
public:
    Evaluator(const GainTensor& g, const NetworkConfig& cfg) : g_(g), cfg_(cfg) {}

    std::optional<double> eval(const std::vector<double>& p1, SearchStats& stats) {
        std::vector<long long> key(p1.size());
        for (std::size_t f = 0; f < p1.size(); ++f)
            key[f] = static_cast<long long>(std::llround(p1[f] * 1e10));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        ++stats.evaluations;
        auto u = anticipated_utility(p1, g_, cfg_);
        cache_.emplace(std::move(key), u);
        return u;
    }

private:
    const GainTensor& g_;
    const NetworkConfig& cfg_;
    std::unordered_map<std::vector<long long>, std::optional<double>, VecKeyHash> cache_;
};

PowerProfile subgame_reaction(const std::vector<double>& p1, const GainTensor& g,
                              const NetworkConfig& cfg) {
    PowerProfile prof(cfg.n_users, cfg.n_sub);
    prof.set_row(cfg.pus[0], p1);
    if (cfg.sus.size() == 2) {
        auto cf = closed_form_profile(prof, g, cfg);
        if (cf) return *cf;
    }
    return solve_ne(prof, g, cfg, 1e-8, 500).profile;
}

}  // namespace

std::optional<double> anticipated_utility(const std::vector<double>& p1, const GainTensor& g,
                                          const NetworkConfig& cfg, PowerProfile* reaction_out) {
    if (cfg.pus.size() != 1)
        throw std::invalid_argument("anticipated_utility: single-PU only");
    if (p1.size() != cfg.n_sub)
        throw std::invalid_argument("anticipated_utility: p1 size mismatch");
    double total = 0.0;
    for (double x : p1) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("anticipated_utility: p1 must be nonnegative");
        total += x;
    }
    const std::size_t pu = cfg.pus[0];
    if (total > cfg.budgets[pu] + 1e-9)
        throw std::invalid_argument("anticipated_utility: p1 exceeds leader budget");

    PowerProfile prof = subgame_reaction(p1, g, cfg);
    if (reaction_out) *reaction_out = prof;
    auto ratios = isr(prof, g, cfg, pu);
    for (double r : ratios)
        if (!(r <= cfg.rho + 1e-9)) return std::nullopt;
    return utility(prof, g, cfg, pu);
}

namespace {

struct BestPoint {
    bool found = false;
    double utility = 0.0;
    std::vector<double> p1;
};

void consider(const std::vector<double>& p1, const std::optional<double>& u, BestPoint& best) {
    if (!u) return;
    if (!best.found || *u > best.utility) {
        best.found = true;
        best.utility = *u;
        best.p1 = p1;
    }
}

void pattern_search(std::vector<double> p, const GainTensor& g, const NetworkConfig& cfg,
                    Evaluator& ev, SearchStats& stats, double budget, double init_step,
                    double step_floor, BestPoint& best) {
    const std::size_t N = p.size();
    auto u = ev.eval(p, stats);
    consider(p, u, best);
    double step = init_step;
    while (step > step_floor) {
        bool improved = false;
        std::vector<double> cand;
        for (std::size_t a = 0; a < N; ++a) {
            for (std::size_t b = 0; b < N; ++b) {
                if (a == b) continue;
                cand = p;
                cand[a] += step;
                cand[b] -= step;
                cand = project_simplex_cap(std::move(cand), budget);
                auto uc = ev.eval(cand, stats);
                if (uc && (!u || *uc > *u + 1e-12)) {
                    p = cand;
                    u = uc;
                    improved = true;
                }
            }
            for (double sgn : {1.0, -1.0}) {
                cand = p;
                cand[a] += sgn * step;
                cand = project_simplex_cap(std::move(cand), budget);
                auto uc = ev.eval(cand, stats);
                if (uc && (!u || *uc > *u + 1e-12)) {
                    p = cand;
                    u = uc;
                    improved = true;
                }
            }
        }
        consider(p, u, best);
        if (!improved) step *= 0.5;
    }
    consider(p, u, best);
}

void enumerate_lattice(std::vector<double>& p, std::size_t f, std::size_t remaining, double step,
                       const std::function<void(const std::vector<double>&)>& visit) {
    if (f + 1 == p.size()) {
        for (std::size_t i = 0; i <= remaining; ++i) {
            p[f] = static_cast<double>(i) * step;
            visit(p);
        }
        return;
    }
    for (std::size_t i = 0; i <= remaining; ++i) {
        p[f] = static_cast<double>(i) * step;
        enumerate_lattice(p, f + 1, remaining - i, step, visit);
    }
}

}  // namespace

SEResult solve_leader(const GainTensor& g, const NetworkConfig& cfg, const SearchSpec& search) {
    cfg.validate();
    if (cfg.pus.size() != 1)
        throw std::invalid_argument("solve_leader: single-PU only");
    const std::size_t pu = cfg.pus[0];
    const double budget = cfg.budgets[pu];
    const std::size_t N = cfg.n_sub;

    Evaluator ev(g, cfg);
    SEResult out;
    BestPoint best;

    if (search.grid_oracle) {
        double step = budget / static_cast<double>(search.grid_points);
        std::vector<double> p(N, 0.0);
        enumerate_lattice(p, 0, search.grid_points, step, [&](const std::vector<double>& q) {
            auto u = ev.eval(q, out.search_stats);
            consider(q, u, best);
        });
        out.search_stats.best_history.push_back(best.found ? best.utility : 0.0);
    } else {
        // start 0: leader's own water-fill, ignoring the SUs
        std::vector<double> sigma1(N);
        for (std::size_t f = 0; f < N; ++f)
            sigma1[f] = cfg.noise[pu][f] / g.at(pu, pu, f);
        std::vector<std::vector<double>> starts;
        starts.push_back(waterfill(sigma1, budget).powers);
        for (std::size_t r = 1; r < std::max<std::size_t>(search.restarts, 1); ++r) {
            NormalSampler rng(derive_seed(search.seed, r));
            std::vector<double> p(N);
            double s = 0.0;
            for (std::size_t f = 0; f < N; ++f) {
                double u = rng.uniform();
                while (u <= 0.0) u = rng.uniform();
                p[f] = -std::log(u);
                s += p[f];
            }
            for (std::size_t f = 0; f < N; ++f) p[f] *= budget / s;
            starts.push_back(std::move(p));
        }
        for (auto& st : starts) {
            pattern_search(st, g, cfg, ev, out.search_stats, budget,
                           budget * search.initial_step_frac, search.step_floor, best);
            ++out.search_stats.restarts;
            out.search_stats.best_history.push_back(best.found ? best.utility : 0.0);
        }
    }

    if (!best.found) throw InfeasibleLeaderError();

    out.pu_power = best.p1;
    PowerProfile reaction;
    anticipated_utility(best.p1, g, cfg, &reaction);
    out.su_profile = reaction;
    out.leader_utility = best.utility;
    for (std::size_t i : cfg.sus)
        out.follower_utilities.push_back(utility(reaction, g, cfg, i));
    return out;
}

}  // namespace specshare
