#include "glmamp/output_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glmamp/quadrature.hpp"
#include "glmamp/scalar_opt.hpp"

namespace glmamp {

namespace {

constexpr double kMapTolerance = 1e-12;
constexpr double kLaplaceIdentityTolerance = 1e-10;

void require_observation(const OutputChannel& channel, double y) {
    if (!channel.in_support(y)) {
        throw std::invalid_argument("observation " + std::to_string(y) +
                                    " outside the support of " + channel.spec());
    }
}

// F_out(z) = f_out(z, y) − (z − p̂)²/(2τ) and its derivatives.
struct PenalizedLikelihood {
    const OutputChannel& channel;
    double y;
    double mean;
    double tau;

    double value(double z) const {
        const double d = z - mean;
        return channel.log_likelihood(z, y) - 0.5 * d * d / tau;
    }
    double d1(double z) const { return channel.d1(z, y) - (z - mean) / tau; }
    double d2(double z) const { return channel.d2(z, y) - 1.0 / tau; }
};

double positive_start(const GaussianBelief& belief) {
    return belief.mean() > 0.0 ? belief.mean() : std::sqrt(belief.variance());
}

// Mode and curvature of the integrand in the integration variable x, and the
// map from x back to z.
struct Laplace1d {
    double mode = 0.0;
    double curvature = 0.0;  // −ℓ''(mode) > 0
    bool log_scale = false;
};

Laplace1d integrand_laplace(const PenalizedLikelihood& F, const OutputChannel& channel,
                            const GaussianBelief& belief) {
    if (channel.domain() == Domain::RealLine) {
        const auto map = posterior_map_detail(channel, F.y, belief);
        return {map.stats.point, 1.0 / map.stats.variance, false};
    }
    // u = log z: ℓ(u) = F(e^u) + u, unimodal because F(z) + log z is concave in z.
    const ScalarObjective objective = [&F](double u) {
        const double z = std::exp(u);
        const double g1 = F.d1(z);
        const double lu = F.value(z) + u;
        const double gu = g1 * z + 1.0;
        const double hu = F.d2(z) * z * z + g1 * z;
        return ScalarEval{lu, gu, hu, std::abs(gu)};
    };
    MaximizeOptions opts;
    opts.tolerance = 1e-11;
    MaximizeResult res;
    try {
        res = maximize_unimodal(objective, std::log(positive_start(belief)), opts);
    } catch (const MaximizeError& e) {
        throw QuadratureError(std::string("quadrature centring failed: ") + e.what(),
                              std::numeric_limits<double>::infinity());
    }
    double curvature = -res.at.h;
    if (!(curvature > 0.0)) curvature = 1.0;
    return {res.argmax, curvature, true};
}

struct Moments {
    double mean;
    double variance;
};

Moments gh_moments(const PenalizedLikelihood& F, const Laplace1d& lap, int order) {
    const HermiteRule& rule = gauss_hermite(order);
    const double width = std::sqrt(2.0 / lap.curvature);
    const auto log_integrand = [&](double x) {
        return lap.log_scale ? F.value(std::exp(x)) + x : F.value(x);
    };
    const double ref = log_integrand(lap.mode);

    std::vector<double> z(order);
    std::vector<double> w(order);
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
        const double t = rule.nodes[i];
        const double x = lap.mode + width * t;
        const double lw = rule.log_weights[i] + t * t + log_integrand(x) - ref;
        w[i] = std::isfinite(lw) ? std::exp(lw) : 0.0;
        z[i] = lap.log_scale ? std::exp(x) : x;
        total += w[i];
    }
    double mean = 0.0;
    for (int i = 0; i < order; ++i) {
        if (w[i] > 0.0) mean += w[i] * z[i];
    }
    mean /= total;
    double var = 0.0;
    for (int i = 0; i < order; ++i) {
        if (!(w[i] > 0.0)) continue;
        const double d = z[i] - mean;
        var += w[i] * d * d;
    }
    var /= total;
    return {mean, var};
}

}  // namespace

double relative_residual(double a, double b, double floor) {
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    if (denom == 0.0) return 0.0;
    return std::abs(a - b) / denom;
}

MapPosterior posterior_map_detail(const OutputChannel& channel, double y,
                                  const GaussianBelief& belief) {
    require_observation(channel, y);
    const PenalizedLikelihood F{channel, y, belief.mean(), belief.variance()};

    MaximizeOptions opts;
    MaximizeResult res;
    try {
        if (channel.domain() == Domain::RealLine) {
            opts.tolerance = kMapTolerance * (1.0 + std::abs(channel.d1(belief.mean(), y)));
            const ScalarObjective objective = [&F](double z) {
                const double g = F.d1(z);
                return ScalarEval{F.value(z), g, F.d2(z), std::abs(g)};
            };
            res = maximize_unimodal(objective, belief.mean(), opts);
        } else {
            // Iterate in u = log z so every iterate stays feasible.
            const double start = positive_start(belief);
            opts.tolerance = kMapTolerance * (1.0 + std::abs(channel.d1(start, y)));
            const ScalarObjective objective = [&F](double u) {
                const double z = std::exp(u);
                const double g = F.d1(z);
                return ScalarEval{F.value(z), g * z, F.d2(z) * z * z + g * z, std::abs(g)};
            };
            res = maximize_unimodal(objective, std::log(start), opts);
            res.argmax = std::exp(res.argmax);
        }
    } catch (const MaximizeError& e) {
        throw MapSolveError(std::string("posterior_map(") + channel.spec() + "): " + e.what());
    }

    MapPosterior out;
    out.stats.point = res.argmax;
    out.f2 = channel.d2(res.argmax, y);
    out.stationarity = res.at.residual;
    out.iterations = res.iterations;
    const double precision = -out.f2 + 1.0 / belief.variance();
    if (!(precision > 0.0)) {
        throw std::logic_error("posterior_map: non-positive Laplace precision (non-concave f_out)");
    }
    out.stats.variance = 1.0 / precision;
    return out;
}

PosteriorStats posterior_map(const OutputChannel& channel, double y, const GaussianBelief& belief) {
    return posterior_map_detail(channel, y, belief).stats;
}

PosteriorStats posterior_mmse_quadrature(const OutputChannel& channel, double y,
                                         const GaussianBelief& belief,
                                         const QuadratureOptions& options) {
    require_observation(channel, y);
    const PenalizedLikelihood F{channel, y, belief.mean(), belief.variance()};
    const Laplace1d lap = integrand_laplace(F, channel, belief);

    int order = options.start_order;
    Moments prev = gh_moments(F, lap, order);
    double residual = std::numeric_limits<double>::infinity();
    while (order < options.max_order) {
        order = std::min(2 * order, options.max_order);
        const Moments next = gh_moments(F, lap, order);
        const double dm = std::abs(next.mean - prev.mean) /
                          std::max(std::abs(next.mean), std::sqrt(next.variance));
        const double dv = std::abs(next.variance - prev.variance) / next.variance;
        residual = std::max(dm, dv);
        prev = next;
        if (residual <= options.tolerance && std::isfinite(next.mean) && next.variance > 0.0) {
            return {next.mean, next.variance};
        }
    }
    throw QuadratureError("posterior_mmse(" + channel.spec() +
                              "): quadrature did not converge, residual " +
                              std::to_string(residual),
                          residual);
}

PosteriorStats posterior_mmse(const OutputChannel& channel, double y, const GaussianBelief& belief,
                              const QuadratureOptions& options) {
    require_observation(channel, y);
    if (auto exact = channel.closed_form_mmse(y, belief)) return *exact;
    return posterior_mmse_quadrature(channel, y, belief, options);
}

double neg_derivative_from_curvature(double f2, double tau) { return f2 / (tau * f2 - 1.0); }

double neg_derivative_from_variance(double variance, double tau) {
    return (tau - variance) / (tau * tau);
}

OutputEstimate g_out(const OutputChannel& channel, Mode mode, double y,
                     const GaussianBelief& belief, const QuadratureOptions& options) {
    const double tau = belief.variance();
    OutputEstimate out;
    if (mode == Mode::SumProduct) {
        out.stats = posterior_mmse(channel, y, belief, options);
        out.neg_derivative = neg_derivative_from_variance(out.stats.variance, tau);
    } else {
        const MapPosterior map = posterior_map_detail(channel, y, belief);
        out.stats = map.stats;
        const double direct = neg_derivative_from_curvature(map.f2, tau);
        const double via_laplace = neg_derivative_from_variance(map.stats.variance, tau);
        if (relative_residual(direct, via_laplace, 1e-4 / tau) > kLaplaceIdentityTolerance) {
            throw std::logic_error("g_out: max-sum curvature forms disagree");
        }
        out.neg_derivative = direct;
    }
    out.value = (out.stats.point - belief.mean()) / tau;
    return out;
}

AwgnOutput awgn_g_out(const ExtrinsicMessage& pseudo, const GaussianBelief& belief) {
    const double total = pseudo.pseudo_variance + belief.variance();
    return {(pseudo.pseudo_mean - belief.mean()) / total, 1.0 / total};
}

}  // namespace glmamp
