#include "specshare/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "specshare/closedform.hpp"
#include "specshare/rng.hpp"
#include "specshare/waterfill.hpp"

namespace specshare {

ChannelModel ChannelModel::variance_spec(std::size_t n_users, std::size_t n_sub) {
    ChannelModel m;
    m.kind = ChannelKind::VarianceSpec;
    m.n_users = n_users;
    m.n_sub = n_sub;
    m.variances.assign(n_users * n_users * n_sub, 0.0);
    return m;
}

ChannelModel ChannelModel::path_loss(std::size_t n_users, std::size_t n_sub, double alpha,
                                     double area) {
    ChannelModel m;
    m.kind = ChannelKind::PathLoss;
    m.n_users = n_users;
    m.n_sub = n_sub;
    m.variances.assign(n_users * n_users * n_sub, 1.0);
    m.alpha = alpha;
    m.area = area;
    return m;
}

void ChannelModel::set_pair(std::size_t i, std::size_t j, const std::vector<double>& v) {
    if (i >= n_users || j >= n_users || v.size() != n_sub)
        throw std::invalid_argument("channel: set_pair out of range");
    for (std::size_t f = 0; f < n_sub; ++f) variances[(i * n_users + j) * n_sub + f] = v[f];
}

std::vector<GainLink> ChannelModel::ordered_links() const {
    std::set<std::pair<std::size_t, std::size_t>> pending;
    for (const GainLink& l : links) {
        auto key = std::make_pair(l.target_tx, l.target_rx);
        if (!pending.insert(key).second)
            throw std::invalid_argument("channel: duplicate link target");
    }
    std::vector<GainLink> rest = links, ordered;
    while (!rest.empty()) {
        bool progressed = false;
        for (auto it = rest.begin(); it != rest.end();) {
            if (pending.count({it->source_tx, it->source_rx}) == 0) {
                ordered.push_back(*it);
                pending.erase({it->target_tx, it->target_rx});
                it = rest.erase(it);
                progressed = true;
            } else {
                ++it;
            }
        }
        if (!progressed) throw std::invalid_argument("channel: cyclic gain links");
    }
    return ordered;
}

void ChannelModel::validate() const {
    if (n_users == 0 || n_sub == 0)
        throw std::invalid_argument("channel: empty dimensions");
    if (variances.size() != n_users * n_users * n_sub)
        throw std::invalid_argument("channel: variance tensor has the wrong size");
    for (double v : variances)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("channel: variances must be finite and nonnegative");
    if (kind == ChannelKind::PathLoss) {
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("channel: alpha must be finite and nonnegative");
        if (!(area > 0.0) || !std::isfinite(area))
            throw std::invalid_argument("channel: area must be positive");
    }
    for (const GainLink& l : links) {
        if (l.target_tx >= n_users || l.target_rx >= n_users || l.source_tx >= n_users ||
            l.source_rx >= n_users)
            throw std::invalid_argument("channel: link index out of range");
        if (l.target_tx == l.source_tx && l.target_rx == l.source_rx)
            throw std::invalid_argument("channel: link targets itself");
        if (!(l.scale >= 0.0) || !std::isfinite(l.scale))
            throw std::invalid_argument("channel: link scale must be finite and nonnegative");
    }
    (void)ordered_links();  // surfaces cycles and duplicate targets
}

GainTensor draw_gains(const ChannelModel& model, const NetworkConfig& cfg,
                      std::uint64_t realization_seed) {
    model.validate();
    if (model.n_users != cfg.n_users || model.n_sub != cfg.n_sub)
        throw std::invalid_argument("channel: dimensions do not match the network config");
    const std::size_t L = cfg.n_users, N = cfg.n_sub;
    NormalSampler rng(realization_seed);

    // PathLoss: positions first, in user order (tx.x, tx.y, rx.x, rx.y), so the
    // coefficient stream below is identical across both channel kinds.
    std::vector<double> plg;
    if (model.kind == ChannelKind::PathLoss) {
        std::vector<double> txx(L), txy(L), rxx(L), rxy(L);
        for (std::size_t i = 0; i < L; ++i) {
            txx[i] = model.area * rng.uniform();
            txy[i] = model.area * rng.uniform();
            rxx[i] = model.area * rng.uniform();
            rxy[i] = model.area * rng.uniform();
        }
        plg.resize(L * L);
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < L; ++j) {
                double dx = txx[i] - rxx[j], dy = txy[i] - rxy[j];
                plg[i * L + j] = std::pow(dx * dx + dy * dy, -model.alpha);
            }
    }

    // One Gaussian pair per (i, j, f) in row-major order, consumed even for
    // zero-variance or link-target pairs, so linkage never shifts the stream.
    GainTensor g(L, N);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j)
            for (std::size_t f = 0; f < N; ++f) {
                double a, b;
                rng.normal_pair(a, b);
                double raw = 0.5 * model.var(i, j, f) * (a * a + b * b);
                if (model.kind == ChannelKind::PathLoss) raw *= plg[i * L + j];
                g.at(i, j, f) = raw;
            }

    for (const GainLink& l : model.ordered_links()) {
        double s2 = l.scale * l.scale;
        for (std::size_t f = 0; f < N; ++f)
            g.at(l.target_tx, l.target_rx, f) = s2 * g.at(l.source_tx, l.source_rx, f);
    }
    return g;
}

const char* to_string(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::NeClosedForm: return "ne-closed-form";
        case AlgorithmKind::NeIterative: return "ne-iterative";
        case AlgorithmKind::Se: return "se";
        case AlgorithmKind::Alg2: return "alg2";
        case AlgorithmKind::Alg3: return "alg3";
        default: return "alg4";
    }
}

const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Converged: return "converged";
        case OutcomeKind::MaxIterations: return "max-iterations";
        case OutcomeKind::Oscillating: return "oscillating";
        case OutcomeKind::InfeasibleIsr: return "infeasible-isr";
        case OutcomeKind::InfeasibleLeader: return "infeasible-leader";
        default: return "solver-error";
    }
}

void ExperimentSpec::validate() const {
    config.validate();
    channel.validate();
    if (channel.n_users != config.n_users || channel.n_sub != config.n_sub)
        throw std::invalid_argument("experiment: channel/network dimension mismatch");
    if (realizations == 0)
        throw std::invalid_argument("experiment: realizations must be >= 1");
    if (!(ne_tol > 0.0) || ne_sweeps == 0)
        throw std::invalid_argument("experiment: ne_tol must be positive, ne_sweeps >= 1");
    switch (algorithm) {
        case AlgorithmKind::NeClosedForm:
            if (config.sus.size() != 2 || config.pus.size() != 1)
                throw std::invalid_argument(
                    "experiment: the closed form needs exactly one PU and two SUs");
            break;
        case AlgorithmKind::Se:
        case AlgorithmKind::Alg2:
        case AlgorithmKind::Alg3:
            if (config.pus.size() != 1)
                throw std::invalid_argument("experiment: this algorithm is single-PU");
            break;
        default: break;
    }
    if (algorithm == AlgorithmKind::Alg2 || algorithm == AlgorithmKind::Alg3 ||
        algorithm == AlgorithmKind::Alg4)
        schedule.validate();
    if (init == InitPolicy::Given) {
        if (config.pus.size() != 1)
            throw std::invalid_argument("experiment: a given PU power needs exactly one PU");
        if (init_p1.size() != config.n_sub)
            throw std::invalid_argument("experiment: init_p1 must have one entry per sub-channel");
        double s = 0.0;
        for (double v : init_p1) {
            if (!(v >= 0.0)) throw std::invalid_argument("experiment: init_p1 must be nonnegative");
            s += v;
        }
        if (s > config.budgets[config.pus[0]] + 1e-9)
            throw std::invalid_argument("experiment: init_p1 exceeds the leader budget");
    }
}

namespace {

std::vector<double> pu_start_row(const ExperimentSpec& spec, const GainTensor& g, std::size_t k) {
    const NetworkConfig& cfg = spec.config;
    switch (spec.init) {
        case InitPolicy::Given: return spec.init_p1;
        case InitPolicy::Waterfill: {
            std::vector<double> sigma(cfg.n_sub);
            for (std::size_t f = 0; f < cfg.n_sub; ++f) {
                double gkk = g.at(k, k, f);
                sigma[f] = gkk > 0.0 ? cfg.noise[k][f] / gkk
                                     : std::numeric_limits<double>::infinity();
            }
            return waterfill(sigma, cfg.budgets[k]).powers;
        }
        default: return std::vector<double>(cfg.n_sub, 0.0);
    }
}

PowerProfile pu_start_profile(const ExperimentSpec& spec, const GainTensor& g) {
    PowerProfile prof(spec.config.n_users, spec.config.n_sub);
    for (std::size_t k : spec.config.pus) prof.set_row(k, pu_start_row(spec, g, k));
    return prof;
}

OutcomeKind outcome_of(TraceStatus s) {
    switch (s) {
        case TraceStatus::Converged: return OutcomeKind::Converged;
        case TraceStatus::Oscillating: return OutcomeKind::Oscillating;
        default: return OutcomeKind::MaxIterations;
    }
}

}  // namespace

RealizationResult run_realization(const ExperimentSpec& spec, std::size_t r) {
    const NetworkConfig& cfg = spec.config;
    std::uint64_t rs = derive_seed(spec.seed, r);
    GainTensor g = draw_gains(spec.channel, cfg, rs);
    RealizationResult out;

    switch (spec.algorithm) {
        case AlgorithmKind::NeClosedForm: {
            auto cf = closed_form_profile(pu_start_profile(spec, g), g, cfg);
            if (!cf) {
                out.outcome = OutcomeKind::SolverError;
                out.error = "realization is not perfectly symmetric";
                return out;
            }
            out.profile = *cf;
            out.outcome = OutcomeKind::Converged;
            break;
        }
        case AlgorithmKind::NeIterative: {
            NEResult res =
                solve_ne(pu_start_profile(spec, g), g, cfg, spec.ne_tol, spec.ne_sweeps,
                         spec.ne_order);
            out.profile = res.profile;
            out.iterations = res.iterations;
            out.outcome = res.converged ? OutcomeKind::Converged : OutcomeKind::MaxIterations;
            break;
        }
        case AlgorithmKind::Se: {
            SearchSpec s = spec.search;
            s.seed = derive_seed(rs, 1);
            try {
                SEResult se = solve_leader(g, cfg, s);
                out.profile = se.su_profile;
                out.iterations = se.search_stats.evaluations;
                out.outcome = OutcomeKind::Converged;
            } catch (const InfeasibleLeaderError& e) {
                out.outcome = OutcomeKind::InfeasibleLeader;
                out.error = e.what();
                return out;
            }
            break;
        }
        default: {
            try {
                SolveTrace t;
                if (spec.algorithm == AlgorithmKind::Alg2)
                    t = run_alg2(g, cfg, spec.schedule, pu_start_row(spec, g, cfg.pus[0]));
                else if (spec.algorithm == AlgorithmKind::Alg3)
                    t = run_alg3(g, cfg, spec.schedule, pu_start_row(spec, g, cfg.pus[0]),
                                 PowerProfile(cfg.n_users, cfg.n_sub));
                else
                    t = run_alg4(g, cfg, spec.schedule);
                out.profile = t.final_profile;
                out.iterations = t.iterates.size();
                out.curve = t.utilities_per_iter;
                out.outcome = outcome_of(t.status);
            } catch (const InfeasibleIsrError& e) {
                out.outcome = OutcomeKind::InfeasibleIsr;
                out.error = e.what();
                return out;
            }
            break;
        }
    }

    out.utilities.resize(cfg.n_users);
    for (std::size_t i = 0; i < cfg.n_users; ++i) out.utilities[i] = utility(out.profile, g, cfg, i);
    return out;
}

std::size_t worker_count() {
#ifdef _OPENMP
    std::size_t def = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
#else
    std::size_t def = 1;
#endif
    if (const char* e = std::getenv("SPECSHARE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(e, &end, 10);
        if (end != e && v > 0) return std::min(def, static_cast<std::size_t>(v));
    }
    return def;
}

namespace {

constexpr std::size_t kBlock = 64;  // fixed reduction block, independent of workers

struct BlockAccum {
    OutcomeCounts counts;
    std::vector<double> power_sum, util_sum;       // converged realizations
    std::vector<std::vector<double>> curve_sum;    // [user][iteration]
    std::size_t curve_n = 0;
    double iter_sum = 0.0;
    std::size_t iter_n = 0;
    std::vector<std::string> errors;
    std::string fatal;
};

BlockAccum run_block(const ExperimentSpec& spec, std::size_t lo, std::size_t hi,
                     std::size_t cap) {
    const NetworkConfig& cfg = spec.config;
    BlockAccum acc;
    acc.power_sum.assign(cfg.n_users * cfg.n_sub, 0.0);
    acc.util_sum.assign(cfg.n_users, 0.0);
    acc.curve_sum.assign(cfg.n_users, std::vector<double>(cap, 0.0));
    try {
        for (std::size_t r = lo; r < hi; ++r) {
            RealizationResult res;
            try {
                res = run_realization(spec, r);
            } catch (const std::exception& e) {
                res = RealizationResult{};
                res.outcome = OutcomeKind::SolverError;
                res.error = e.what();
            }
            switch (res.outcome) {
                case OutcomeKind::Converged: ++acc.counts.converged; break;
                case OutcomeKind::MaxIterations: ++acc.counts.max_iterations; break;
                case OutcomeKind::Oscillating: ++acc.counts.oscillating; break;
                case OutcomeKind::InfeasibleIsr: ++acc.counts.infeasible_isr; break;
                case OutcomeKind::InfeasibleLeader: ++acc.counts.infeasible_leader; break;
                default:
                    ++acc.counts.solver_error;
                    if (acc.errors.size() < 5) acc.errors.push_back(res.error);
                    break;
            }
            if (res.outcome == OutcomeKind::Converged) {
                for (std::size_t i = 0; i < acc.power_sum.size(); ++i)
                    acc.power_sum[i] += res.profile.p[i];
                for (std::size_t i = 0; i < cfg.n_users; ++i) acc.util_sum[i] += res.utilities[i];
            }
            bool traced = res.outcome == OutcomeKind::Converged ||
                          res.outcome == OutcomeKind::MaxIterations ||
                          res.outcome == OutcomeKind::Oscillating;
            if (traced) {
                acc.iter_sum += static_cast<double>(res.iterations);
                ++acc.iter_n;
            }
            if (traced && !res.curve.empty()) {
                ++acc.curve_n;
                const std::size_t len = res.curve.size();
                for (std::size_t u = 0; u < cfg.n_users; ++u)
                    for (std::size_t t = 0; t < cap; ++t)
                        acc.curve_sum[u][t] += res.curve[std::min(t, len - 1)][u];
            }
        }
    } catch (const std::exception& e) {
        acc.fatal = e.what();
    }
    return acc;
}

ExperimentReport assemble(const ExperimentSpec& spec, std::vector<BlockAccum>& blocks,
                          std::size_t cap) {
    const NetworkConfig& cfg = spec.config;
    BlockAccum total;
    total.power_sum.assign(cfg.n_users * cfg.n_sub, 0.0);
    total.util_sum.assign(cfg.n_users, 0.0);
    total.curve_sum.assign(cfg.n_users, std::vector<double>(cap, 0.0));
    for (const BlockAccum& b : blocks) {  // index order: worker-count independent
        if (!b.fatal.empty()) throw std::runtime_error("experiment block failed: " + b.fatal);
        total.counts.converged += b.counts.converged;
        total.counts.max_iterations += b.counts.max_iterations;
        total.counts.oscillating += b.counts.oscillating;
        total.counts.infeasible_isr += b.counts.infeasible_isr;
        total.counts.infeasible_leader += b.counts.infeasible_leader;
        total.counts.solver_error += b.counts.solver_error;
        for (std::size_t i = 0; i < total.power_sum.size(); ++i)
            total.power_sum[i] += b.power_sum[i];
        for (std::size_t i = 0; i < cfg.n_users; ++i) total.util_sum[i] += b.util_sum[i];
        for (std::size_t u = 0; u < cfg.n_users; ++u)
            for (std::size_t t = 0; t < cap; ++t) total.curve_sum[u][t] += b.curve_sum[u][t];
        total.curve_n += b.curve_n;
        total.iter_sum += b.iter_sum;
        total.iter_n += b.iter_n;
        for (const std::string& e : b.errors)
            if (total.errors.size() < 5) total.errors.push_back(e);
    }

    ExperimentReport rep;
    rep.realizations = spec.realizations;
    rep.counts = total.counts;
    rep.error_samples = total.errors;
    rep.fraction_converged =
        static_cast<double>(total.counts.converged) / static_cast<double>(spec.realizations);
    if (total.counts.converged > 0) {
        double inv = 1.0 / static_cast<double>(total.counts.converged);
        rep.mean_powers = total.power_sum;
        for (double& v : rep.mean_powers) v *= inv;
        rep.mean_utilities = total.util_sum;
        for (double& v : rep.mean_utilities) v *= inv;
    }
    if (total.curve_n > 0) {
        double inv = 1.0 / static_cast<double>(total.curve_n);
        rep.mean_curves = total.curve_sum;
        for (auto& row : rep.mean_curves)
            for (double& v : row) v *= inv;
        rep.curve_total = total.curve_n;
    }
    if (total.iter_n > 0)
        rep.mean_iterations = total.iter_sum / static_cast<double>(total.iter_n);

    if (2 * total.counts.solver_error > spec.realizations) {
        std::string msg = "experiment: more than half the realizations failed";
        if (!total.errors.empty()) msg += " (first: " + total.errors.front() + ")";
        throw std::runtime_error(msg);
    }
    return rep;
}

std::size_t curve_cap_of(const ExperimentSpec& spec) {
    bool traces = spec.algorithm == AlgorithmKind::Alg2 ||
                  spec.algorithm == AlgorithmKind::Alg3 || spec.algorithm == AlgorithmKind::Alg4;
    if (!traces) return 0;
    return spec.curve_cap > 0 ? spec.curve_cap : spec.schedule.max_outer;
}

}  // namespace

ExperimentReport run_experiment_serial(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t cap = curve_cap_of(spec);
    const std::size_t nblocks = (spec.realizations + kBlock - 1) / kBlock;
    std::vector<BlockAccum> blocks(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b)
        blocks[b] =
            run_block(spec, b * kBlock, std::min((b + 1) * kBlock, spec.realizations), cap);
    return assemble(spec, blocks, cap);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t cap = curve_cap_of(spec);
    const std::size_t nblocks = (spec.realizations + kBlock - 1) / kBlock;
    std::vector<BlockAccum> blocks(nblocks);
#ifdef _OPENMP
    int threads = static_cast<int>(std::min<std::size_t>(worker_count(), nblocks));
    if (threads < 1) threads = 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        blocks[static_cast<std::size_t>(b)] =
            run_block(spec, lo, std::min(lo + kBlock, spec.realizations), cap);
    }
#else
    for (std::size_t b = 0; b < nblocks; ++b)
        blocks[b] =
            run_block(spec, b * kBlock, std::min((b + 1) * kBlock, spec.realizations), cap);
#endif
    return assemble(spec, blocks, cap);
}

}  // namespace specshare
