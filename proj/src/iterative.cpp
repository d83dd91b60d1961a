#include "specshare/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specshare/closedform.hpp"
#include "specshare/subgame.hpp"
#include "specshare/waterfill.hpp"

namespace specshare {

void IterationSchedule::validate() const {
    auto check_step = [](double s, const char* name) {
        if (!(s > 0.0) || !(s < 1.0))
            throw std::invalid_argument(std::string("schedule: ") + name + " must be in (0,1)");
    };
    check_step(eta, "eta");
    check_step(delta, "delta");
    for (double e : eta_per_pu) check_step(e, "eta_per_pu entry");
    if (tau_factor == 0)
        throw std::invalid_argument("schedule: tau_factor must be >= 1");
    if (max_outer == 0 || window_len < 2)
        throw std::invalid_argument("schedule: max_outer >= 1 and window_len >= 2 required");
    if (!(tol > 0.0))
        throw std::invalid_argument("schedule: tol must be positive");
}

const char* to_string(TraceStatus s) {
    switch (s) {
        case TraceStatus::Converged: return "Converged";
        case TraceStatus::Oscillating: return "Oscillating";
        default: return "MaxIterations";
    }
}

std::vector<double> pu_update(const std::vector<double>& p1_now,
                              const std::vector<double>& interference, const GainTensor& g,
                              const NetworkConfig& cfg, std::size_t pu, double eta) {
    if (!(eta > 0.0) || eta > 1.0)
        throw std::invalid_argument("pu_update: eta must be in (0,1]");
    const std::size_t N = cfg.n_sub;
    std::vector<double> floors(N), sigma(N);
    for (std::size_t f = 0; f < N; ++f) {
        double gkk = g.at(pu, pu, f);
        floors[f] = interference[f] / (cfg.rho * gkk);
        sigma[f] = (interference[f] + cfg.noise[pu][f]) / gkk;
    }
    auto wf = waterfill_with_floors(sigma, cfg.budgets[pu], floors);
    std::vector<double> out(N);
    for (std::size_t f = 0; f < N; ++f)
        out[f] = (1.0 - eta) * p1_now[f] + eta * wf.powers[f];
    return out;
}

namespace {

double profile_dist(const PowerProfile& a, const PowerProfile& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) d = std::max(d, std::abs(a.p[i] - b.p[i]));
    return d;
}

}  // namespace

TraceStatus classify(const std::vector<PowerProfile>& iterates,
                     const std::vector<double>& leader_utility, double tol,
                     std::size_t window_len) {
    const std::size_t n = iterates.size();
    if (n >= 2) {
        std::size_t lo = n > window_len ? n - window_len : 1;
        double worst = 0.0;
        for (std::size_t k = lo; k < n; ++k)
            worst = std::max(worst, profile_dist(iterates[k], iterates[k - 1]));
        if (worst <= tol) return TraceStatus::Converged;
    }
    if (n >= window_len) {
        // cycle rule: the last iterate revisits an earlier one (period >= 2)
        // with a genuine excursion in between
        const PowerProfile& last = iterates[n - 1];
        for (std::size_t m = 2; m < window_len; ++m) {
            if (profile_dist(last, iterates[n - 1 - m]) <= tol) {
                bool excursion = false;
                for (std::size_t j = 1; j < m; ++j)
                    if (profile_dist(last, iterates[n - 1 - j]) > tol) {
                        excursion = true;
                        break;
                    }
                if (excursion) return TraceStatus::Oscillating;
            }
        }
        // amplitude rule on the leader utility: sustained swing without drift
        std::size_t lo = n - window_len;
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (std::size_t k = lo; k < n; ++k) {
            mn = std::min(mn, leader_utility[k]);
            mx = std::max(mx, leader_utility[k]);
        }
        std::size_t half = window_len / 2;
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t k = lo; k < lo + half; ++k) m1 += leader_utility[k];
        for (std::size_t k = n - half; k < n; ++k) m2 += leader_utility[k];
        m1 /= static_cast<double>(half);
        m2 /= static_cast<double>(half);
        if (mx - mn > 100.0 * tol && std::abs(m2 - m1) < tol) return TraceStatus::Oscillating;
    }
    return TraceStatus::MaxIterations;
}

namespace {

// classification wrapper: returns true when the trace should stop
bool step_classify(SolveTrace& trace, const std::vector<double>& u_lead,
                   const IterationSchedule& sched, std::size_t n, bool& done) {
    const std::size_t count = trace.iterates.size();
    if (count >= 2) {
        std::size_t lo = count > sched.window_len ? count - sched.window_len : 1;
        double worst = 0.0;
        for (std::size_t k = lo; k < count; ++k)
            worst = std::max(worst, profile_dist(trace.iterates[k], trace.iterates[k - 1]));
        if (worst <= sched.tol) {
            trace.status = TraceStatus::Converged;
            trace.converged_at = n;
            done = true;
            return true;
        }
    }
    if (count >= sched.window_len) {
        TraceStatus s = classify(trace.iterates, u_lead, sched.tol, sched.window_len);
        if (s == TraceStatus::Oscillating) {
            trace.status = TraceStatus::Oscillating;
            done = true;
            return true;
        }
    }
    if (n + 1 >= sched.max_outer) {
        trace.status = TraceStatus::MaxIterations;
        done = true;
        return true;
    }
    return false;
}

void record(SolveTrace& trace, const PowerProfile& prof, const GainTensor& g,
            const NetworkConfig& cfg, std::vector<double>& u_lead) {
    trace.iterates.push_back(prof);
    std::vector<double> us(cfg.n_users);
    for (std::size_t i = 0; i < cfg.n_users; ++i) us[i] = utility(prof, g, cfg, i);
    trace.utilities_per_iter.push_back(us);
    std::vector<std::vector<double>> rats;
    double usum = 0.0;
    for (std::size_t k : cfg.pus) {
        rats.push_back(isr(prof, g, cfg, k));
        usum += us[k];
    }
    trace.isr_per_iter.push_back(std::move(rats));
    u_lead.push_back(usum);
}

void finalize_trace(SolveTrace& trace, const GainTensor& g, const NetworkConfig& cfg) {
    if (trace.final_profile.p.empty() && !trace.iterates.empty())
        trace.final_profile = trace.iterates.back();
    trace.final_isr.clear();
    for (std::size_t k : cfg.pus) trace.final_isr.push_back(isr(trace.final_profile, g, cfg, k));
}

PowerProfile solve_su_round(const PowerProfile& current, const GainTensor& g,
                            const NetworkConfig& cfg, std::size_t sweeps_cap, double tol) {
    // closed form when the instance is symmetric, else capped best-response sweeps
    if (cfg.sus.size() == 2 && cfg.pus.size() == 1) {
        auto cf = closed_form_profile(current, g, cfg);
        if (cf) return *cf;
    }
    return solve_ne(current, g, cfg, tol, sweeps_cap).profile;
}

}  // namespace

SolveTrace run_alg2(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched, const std::vector<double>& init_p1) {
    cfg.validate();
    sched.validate();
    if (cfg.pus.size() != 1)
        throw std::invalid_argument("run_alg2: single-PU only");
    const std::size_t pu = cfg.pus[0];

    SolveTrace trace;
    std::vector<double> u_lead;
    PowerProfile prof(cfg.n_users, cfg.n_sub);
    prof.set_row(pu, init_p1);

    bool done = false;
    for (std::size_t n = 0; !done; ++n) {
        prof = solve_su_round(prof, g, cfg, sched.inner_iters, sched.tol * 0.01);
        std::vector<double> inter =
            interference_from(prof, g, pu, cfg.sus);
        std::vector<double> p1_next;
        try {
            p1_next = pu_update(prof.row(pu), inter, g, cfg, pu, sched.eta);
        } catch (const InfeasibleIsrError& e) {
            throw InfeasibleIsrError(e.deficit, static_cast<long>(n), pu);
        }
        prof.set_row(pu, p1_next);
        record(trace, prof, g, cfg, u_lead);
        if (step_classify(trace, u_lead, sched, n, done) &&
            trace.status == TraceStatus::Converged) {
            // exact snap: eta=1 target against the final measured interference,
            // so the reported state meets the ISR cap exactly
            PowerProfile snapped = prof;
            snapped.set_row(pu, pu_update(prof.row(pu), inter, g, cfg, pu, 1.0));
            trace.final_profile = snapped;
        }
    }
    finalize_trace(trace, g, cfg);
    return trace;
}

SolveTrace run_alg3(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched, const std::vector<double>& init_p1,
                    const PowerProfile& init_su) {
    cfg.validate();
    sched.validate();
    if (cfg.pus.size() != 1)
        throw std::invalid_argument("run_alg3: single-PU only");
    const std::size_t pu = cfg.pus[0];

    SolveTrace trace;
    std::vector<double> u_lead;
    PowerProfile prof = init_su;
    prof.set_row(pu, init_p1);
    validate_profile(prof, cfg);
    for (double r : isr(prof, g, cfg, pu))
        if (r > cfg.rho + 1e-12)
            throw std::invalid_argument("run_alg3: initial profile violates the ISR cap");

    bool done = false;
    std::size_t k = 1;
    std::vector<double> last_inter(cfg.n_sub, 0.0);
    for (std::size_t n = 0; !done; ++n) {
        // one simultaneous best-response step for every SU
        PowerProfile next = prof;
        for (std::size_t i : cfg.sus) next.set_row(i, best_response(i, prof, g, cfg));
        prof = next;
        last_inter = interference_from(prof, g, pu, cfg.sus);
        if (n + 1 == sched.tau_factor * k) {
            std::vector<double> p1_next;
            try {
                p1_next = pu_update(prof.row(pu), last_inter, g, cfg, pu, sched.delta);
            } catch (const InfeasibleIsrError& e) {
                throw InfeasibleIsrError(e.deficit, static_cast<long>(n), pu);
            }
            prof.set_row(pu, p1_next);
            ++k;
        }
        record(trace, prof, g, cfg, u_lead);
        if (step_classify(trace, u_lead, sched, n, done) &&
            trace.status == TraceStatus::Converged) {
            PowerProfile snapped = prof;
            snapped.set_row(pu, pu_update(prof.row(pu), last_inter, g, cfg, pu, 1.0));
            trace.final_profile = snapped;
        }
    }
    finalize_trace(trace, g, cfg);
    return trace;
}

SolveTrace run_alg4(const GainTensor& g, const NetworkConfig& cfg,
                    const IterationSchedule& sched) {
    cfg.validate();
    sched.validate();
    SolveTrace trace;
    std::vector<double> u_lead;
    PowerProfile prof(cfg.n_users, cfg.n_sub);  // all PU rows start at zero

    auto eta_of = [&](std::size_t idx) {
        return sched.eta_per_pu.empty() ? sched.eta : sched.eta_per_pu[idx];
    };

    auto pu_interference = [&](const PowerProfile& state, std::size_t i) {
        std::vector<std::size_t> srcs;
        for (std::size_t l : cfg.pus)
            if (l != i) srcs.push_back(l);
        for (std::size_t s : cfg.sus) srcs.push_back(s);
        return interference_from(state, g, i, srcs);
    };

    bool done = false;
    for (std::size_t n = 0; !done; ++n) {
        // SU network reaches its NE for the current PU powers
        prof = solve_ne(prof, g, cfg, sched.tol * 0.01, 500).profile;
        // inner Jacobi loop over the PUs against the fresh SU powers
        for (std::size_t k = 0; k < sched.pu_inner_cap; ++k) {
            PowerProfile next = prof;
            double delta = 0.0;
            for (std::size_t idx = 0; idx < cfg.pus.size(); ++idx) {
                std::size_t i = cfg.pus[idx];
                auto inter = pu_interference(prof, i);
                std::vector<double> pn;
                try {
                    pn = pu_update(prof.row(i), inter, g, cfg, i, eta_of(idx));
                } catch (const InfeasibleIsrError& e) {
                    throw InfeasibleIsrError(e.deficit, static_cast<long>(n), i);
                }
                for (std::size_t f = 0; f < cfg.n_sub; ++f)
                    delta = std::max(delta, std::abs(pn[f] - prof.at(i, f)));
                next.set_row(i, pn);
            }
            prof = next;
            if (delta <= sched.tol) break;
        }
        record(trace, prof, g, cfg, u_lead);
        if (step_classify(trace, u_lead, sched, n, done) &&
            trace.status == TraceStatus::Converged) {
            // eta=1 Jacobi snap, keeping the iterate with the smallest residual
            PowerProfile snapped = prof;
            PowerProfile best = prof;
            double best_res = std::numeric_limits<double>::infinity();
            for (int it = 0; it < 50; ++it) {
                PowerProfile next = snapped;
                double res = 0.0;
                bool ok = true;
                for (std::size_t idx = 0; idx < cfg.pus.size(); ++idx) {
                    std::size_t i = cfg.pus[idx];
                    auto inter = pu_interference(snapped, i);
                    std::vector<double> pn;
                    try {
                        pn = pu_update(snapped.row(i), inter, g, cfg, i, 1.0);
                    } catch (const InfeasibleIsrError&) {
                        ok = false;
                        break;
                    }
                    for (std::size_t f = 0; f < cfg.n_sub; ++f)
                        res = std::max(res, std::abs(pn[f] - snapped.at(i, f)));
                    next.set_row(i, pn);
                }
                if (!ok) break;
                snapped = next;
                if (res < best_res) {
                    best_res = res;
                    best = snapped;
                }
                if (res <= 1e-13) break;
            }
            trace.final_profile = best;
        }
    }
    finalize_trace(trace, g, cfg);
    return trace;
}

}  // namespace specshare
