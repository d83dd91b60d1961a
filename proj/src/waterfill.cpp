#include "specshare/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "specshare/model.hpp"

namespace specshare {

namespace {

double alloc_sum(const std::vector<double>& sigma, double level) {
    double s = 0.0;
    for (double sg : sigma)
        if (level > sg) s += level - sg;
    return s;
}

void finalize(WaterfillResult& r, const std::vector<double>& sigma, double budget) {
    r.powers.assign(sigma.size(), 0.0);
    r.active_set.clear();
    double total = 0.0;
    for (std::size_t f = 0; f < sigma.size(); ++f) {
        double p = r.level - sigma[f];
        if (p > 0.0) {
            r.powers[f] = p;
            r.active_set.push_back(f);
            total += p;
        }
    }
    r.residual = budget - total;
}

}  // namespace

WaterfillResult waterfill(const std::vector<double>& sigma, double budget) {
    if (sigma.empty())
        throw std::domain_error("waterfill: empty sigma");
    double lo = std::numeric_limits<double>::infinity();
    for (double s : sigma) {
        if (!(s > 0.0) || std::isnan(s))
            throw std::domain_error("waterfill: sigma entries must be positive");
        lo = std::min(lo, s);
    }
    if (!(budget >= 0.0) || !std::isfinite(budget))
        throw std::domain_error("waterfill: budget must be finite and nonnegative");

    WaterfillResult r;
    if (budget == 0.0 || !std::isfinite(lo)) {
        // zero budget, or no usable channel: nothing to allocate
        r.level = lo;
        r.powers.assign(sigma.size(), 0.0);
        r.residual = budget;
        return r;
    }

    double hi = lo + budget;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if (alloc_sum(sigma, mid) < budget)
            lo = mid;
        else
            hi = mid;
    }
    double level = 0.5 * (lo + hi);

    // Exact snap: with the active set fixed, level = (budget + sum sigma_A)/|A|.
    double ssum = 0.0;
    std::size_t count = 0;
    for (double s : sigma)
        if (level > s) {
            ssum += s;
            ++count;
        }
    if (count > 0) {
        double snapped = (budget + ssum) / static_cast<double>(count);
        std::size_t count2 = 0;
        for (double s : sigma)
            if (snapped > s) ++count2;
        if (count2 == count) level = snapped;
    }

    r.level = level;
    finalize(r, sigma, budget);
    return r;
}

WaterfillResult waterfill_with_floors(const std::vector<double>& sigma, double budget,
                                      const std::vector<double>& floors) {
    if (floors.size() != sigma.size())
        throw std::domain_error("waterfill_with_floors: floors size mismatch");
    double fsum = 0.0;
    for (double f : floors) {
        if (!(f >= 0.0) || !std::isfinite(f))
            throw std::domain_error("waterfill_with_floors: floors must be finite and nonnegative");
        fsum += f;
    }
    double deficit = fsum - budget;
    if (deficit > 1e-9)
        throw InfeasibleIsrError(deficit, -1, 0);

    WaterfillResult r = waterfill(sigma, std::max(budget - fsum, 0.0));
    for (std::size_t f = 0; f < sigma.size(); ++f) r.powers[f] += floors[f];
    r.active_set.clear();
    double total = 0.0;
    for (std::size_t f = 0; f < sigma.size(); ++f) {
        if (r.powers[f] > 0.0) r.active_set.push_back(f);
        total += r.powers[f];
    }
    r.residual = budget - total;
    return r;
}

}  // namespace specshare
