#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace specshare {

// Indexing convention: g(i, j, f) is the power gain |h_{i,j}^f|^2 from the
// transmitter of user i to the receiver of user j on sub-channel f.
class GainTensor {
public:
    GainTensor() = default;
    GainTensor(std::size_t n_users, std::size_t n_sub)
        : n_users_(n_users), n_sub_(n_sub), g_(n_users * n_users * n_sub, 0.0) {
        if (n_users == 0 || n_sub == 0)
            throw std::invalid_argument("GainTensor: empty dimensions");
    }

    double& at(std::size_t i, std::size_t j, std::size_t f) {
        return g_[(i * n_users_ + j) * n_sub_ + f];
    }
    double at(std::size_t i, std::size_t j, std::size_t f) const {
        return g_[(i * n_users_ + j) * n_sub_ + f];
    }
    std::size_t users() const { return n_users_; }
    std::size_t subchannels() const { return n_sub_; }

    void check() const {
        for (double v : g_)
            if (!(v >= 0.0))
                throw std::invalid_argument("GainTensor: negative or non-finite gain");
    }

private:
    std::size_t n_users_ = 0, n_sub_ = 0;
    std::vector<double> g_;
};

// Flat row-major [user][subchannel] power matrix.
struct PowerProfile {
    std::size_t n_users = 0, n_sub = 0;
    std::vector<double> p;

    PowerProfile() = default;
    PowerProfile(std::size_t users, std::size_t sub)
        : n_users(users), n_sub(sub), p(users * sub, 0.0) {}

    double& at(std::size_t i, std::size_t f) { return p[i * n_sub + f]; }
    double at(std::size_t i, std::size_t f) const { return p[i * n_sub + f]; }

    std::vector<double> row(std::size_t i) const {
        return {p.begin() + static_cast<long>(i * n_sub),
                p.begin() + static_cast<long>((i + 1) * n_sub)};
    }
    void set_row(std::size_t i, const std::vector<double>& r) {
        for (std::size_t f = 0; f < n_sub; ++f) at(i, f) = r[f];
    }
    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (std::size_t f = 0; f < n_sub; ++f) s += at(i, f);
        return s;
    }
};

struct NetworkConfig {
    std::size_t n_users = 0, n_sub = 0;
    std::vector<std::size_t> pus;               // leader indices
    std::vector<std::size_t> sus;               // follower indices
    std::vector<double> budgets;                // per user
    std::vector<std::vector<double>> noise;     // [user][subchannel]
    double rho = 0.0;                           // ISR cap, per PU per sub-channel

    void validate() const;
};

// Validates a profile against budgets/nonnegativity. Throws on violation.
void validate_profile(const PowerProfile& prof, const NetworkConfig& cfg, double tol = 1e-9);

// Total interference + noise seen by user i's receiver on each sub-channel,
// excluding user i's own signal.
std::vector<double> interference_plus_noise(const PowerProfile& prof, const GainTensor& g,
                                            const NetworkConfig& cfg, std::size_t i);

// Interference alone at user i's receiver from the given interferer set.
std::vector<double> interference_from(const PowerProfile& prof, const GainTensor& g,
                                      std::size_t rx, const std::vector<std::size_t>& interferers);

// Shannon-style utility u_i = sum_f ln(1 + p_i^f g_ii^f / (I^f + N_i^f)), in nats.
double utility(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
               std::size_t i);

// ISR of PU k per sub-channel: sum over interferers of p g / (p_k g_kk).
// Zero PU power with nonzero interference gives +inf; 0/0 gives 0.
std::vector<double> isr(const PowerProfile& prof, const GainTensor& g, const NetworkConfig& cfg,
                        std::size_t k);

class InfeasibleIsrError : public std::runtime_error {
public:
    InfeasibleIsrError(double deficit, long round, std::size_t pu)
        : std::runtime_error("ISR floor sum exceeds budget (deficit " + std::to_string(deficit) +
                             ", round " + std::to_string(round) + ", pu " + std::to_string(pu) + ")"),
          deficit(deficit), round(round), pu(pu) {}
    double deficit;
    long round;
    std::size_t pu;
};

class InfeasibleLeaderError : public std::runtime_error {
public:
    InfeasibleLeaderError() : std::runtime_error("no ISR-feasible leader allocation found") {}
};

}  // namespace specshare
