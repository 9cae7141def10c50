#include "glmamp/scalar_opt.hpp"

#include <cmath>
#include <limits>

namespace glmamp {

namespace {

bool finite(const ScalarEval& e) {
    return std::isfinite(e.f) && std::isfinite(e.g) && std::isfinite(e.h);
}

bool collapsed(double lo, double hi) {
    const double mag = std::max(std::abs(lo), std::abs(hi));
    return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(mag, 1e-300);
}

}  // namespace

MaximizeResult maximize_unimodal(const ScalarObjective& objective, double start,
                                 const MaximizeOptions& options) {
    if (!std::isfinite(start)) throw MaximizeError("maximize: non-finite starting point");

    double x = start;
    ScalarEval ex = objective(x);
    if (!finite(ex)) throw MaximizeError("maximize: objective not finite at starting point");
    MaximizeResult result{x, ex, 0};
    if (ex.residual <= options.tolerance) return result;

    // Bracket [lo, hi] with g(lo) > 0 > g(hi).
    double lo = x;
    double hi = x;
    {
        double step = (ex.h < 0.0) ? std::abs(ex.g / ex.h) : 1.0;
        step = std::max(step, 1e-8 * std::max(1.0, std::abs(x)));
        const double dir = ex.g > 0.0 ? 1.0 : -1.0;
        double inner = x;
        ScalarEval e_inner = ex;
        bool found = false;
        for (int k = 0; k < options.max_bracket_expansions; ++k) {
            const double probe = x + dir * step;
            const ScalarEval ep = objective(probe);
            if (!finite(ep)) {
                step *= 0.5;
                continue;
            }
            if ((dir > 0.0 && ep.g <= 0.0) || (dir < 0.0 && ep.g >= 0.0)) {
                lo = dir > 0.0 ? inner : probe;
                hi = dir > 0.0 ? probe : inner;
                found = true;
                break;
            }
            inner = probe;
            e_inner = ep;
            step *= 2.0;
        }
        if (!found) throw MaximizeError("maximize: no interior maximizer (bracket expansion failed)");
        x = inner;
        ex = e_inner;
    }

    for (int it = 1; it <= options.max_iterations; ++it) {
        double candidate = std::numeric_limits<double>::quiet_NaN();
        if (ex.h < 0.0) {
            double step = -ex.g / ex.h;
            candidate = x + step;
            if (candidate > lo && candidate < hi) {
                // Backtrack until f does not decrease. Near the optimum f is flat
                // to round-off, so a drop within that margin is not a decrease.
                const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ex.f));
                const auto worse = [&](const ScalarEval& e) { return !finite(e) || e.f < ex.f - slack; };
                ScalarEval ec = objective(candidate);
                int halvings = 0;
                while (worse(ec) && halvings < 30) {
                    step *= 0.5;
                    candidate = x + step;
                    ec = objective(candidate);
                    ++halvings;
                }
                if (worse(ec)) candidate = std::numeric_limits<double>::quiet_NaN();
            } else {
                candidate = std::numeric_limits<double>::quiet_NaN();
            }
        }
        if (!std::isfinite(candidate) || candidate == x) candidate = 0.5 * (lo + hi);

        x = candidate;
        ex = objective(x);
        if (!finite(ex)) throw MaximizeError("maximize: objective became non-finite");
        if (ex.g > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        result = {x, ex, it};
        if (ex.residual <= options.tolerance || ex.g == 0.0 || collapsed(lo, hi)) return result;
        // The stationarity residual can sit above the tolerance at round-off
        // level when the curvature is large; a Newton step below the spacing
        // of doubles around x means there is nothing left to resolve.
        if (ex.h < 0.0 && std::abs(ex.g / ex.h) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                     std::max(std::abs(x), 1e-300)) {
            return result;
        }
    }
    throw MaximizeError("maximize: no convergence after " + std::to_string(options.max_iterations) +
                        " iterations, residual " + std::to_string(ex.residual));
}

}  // namespace glmamp
