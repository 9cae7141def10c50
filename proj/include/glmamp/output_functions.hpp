#pragma once

// Module B: scalar posterior of z ~ N(p̂, τ_p) given one observation y, in
// either MMSE (sum-product) or MAP + Laplace (max-sum) form, and the GAMP
// output functions built on top of it.

#include <stdexcept>
#include <string>

#include "glmamp/channels.hpp"
#include "glmamp/gaussian.hpp"

namespace glmamp {

struct QuadratureOptions {
    int start_order = 61;
    int max_order = 1025;
    double tolerance = 1e-9;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_residual(achieved) {}
    double achieved_residual;
};

/// MAP solver failure: no interior maximizer or Newton/bisection exhausted.
class MapSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// E[z | y] and var(z | y). Closed form where the channel provides it
/// (AWGN, probit), adaptive Gauss–Hermite otherwise.
PosteriorStats posterior_mmse(const OutputChannel& channel, double y, const GaussianBelief& belief,
                              const QuadratureOptions& options = {});

/// Always by quadrature: centred at the mode of the integrand and scaled by its
/// curvature, order doubled until mean and variance settle to `tolerance`.
/// Positive-domain channels are integrated in u = log z.
PosteriorStats posterior_mmse_quadrature(const OutputChannel& channel, double y,
                                         const GaussianBelief& belief,
                                         const QuadratureOptions& options = {});

struct MapPosterior {
    PosteriorStats stats;  // ẑ⁰ and the Laplace variance
    double f2 = 0.0;       // f_out''(ẑ⁰, y)
    double stationarity = 0.0;
    int iterations = 0;
};

/// ẑ⁰ = argmax f_out(z, y) − (z − p̂)²/(2τ_p) with 1/var = −f_out''(ẑ⁰, y) + 1/τ_p.
MapPosterior posterior_map_detail(const OutputChannel& channel, double y,
                                  const GaussianBelief& belief);

PosteriorStats posterior_map(const OutputChannel& channel, double y, const GaussianBelief& belief);

/// Max-sum curvature written with the likelihood: f''/(τ f'' − 1).
double neg_derivative_from_curvature(double f2, double tau);
/// Curvature written with a posterior variance: (τ − var)/τ².
double neg_derivative_from_variance(double variance, double tau);

struct OutputEstimate {
    double value = 0.0;           // g_out
    double neg_derivative = 0.0;  // −g_out'
    PosteriorStats stats;
};

/// GAMP output function. Max-sum evaluates −g_out' both from f'' and from the
/// Laplace variance and throws std::logic_error if they disagree beyond 1e−10.
OutputEstimate g_out(const OutputChannel& channel, Mode mode, double y,
                     const GaussianBelief& belief, const QuadratureOptions& options = {});

struct AwgnOutput {
    double value = 0.0;
    double neg_derivative = 0.0;
};

/// Output function of an AWGN pseudo-channel with observation ỹ and noise σ̃².
AwgnOutput awgn_g_out(const ExtrinsicMessage& pseudo, const GaussianBelief& belief);

/// |a − b| / max(|a|, |b|, floor). The floor carries the quantity's natural
/// unit so that values at round-off level are not compared relatively.
double relative_residual(double a, double b, double floor);

}  // namespace glmamp
