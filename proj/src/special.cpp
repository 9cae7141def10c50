#include "glmamp/special.hpp"

#include <cmath>

namespace glmamp::special {

namespace {

// Φ(−t)/φ(t) for t ≥ 5 by the Laplace continued fraction 1/(t+1/(t+2/(t+3/(t+…)))),
// evaluated with modified Lentz.
double mills_ratio_tail(double t) {
    constexpr double tiny = 1e-300;
    double f = t;
    double c = t;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = static_cast<double>(k);
        d = t + a * d;
        if (d == 0.0) d = tiny;
        c = t + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

constexpr double kTailSwitch = -5.0;

}  // namespace

double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double log_normal_cdf(double x) {
    if (x > kTailSwitch) return std::log(normal_cdf(x));
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio_tail(-x));
}

double inverse_mills(double x) {
    if (x > kTailSwitch) return normal_pdf(x) / normal_cdf(x);
    return 1.0 / mills_ratio_tail(-x);
}

double log_sigmoid(double u) {
    return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

}  // namespace glmamp::special
