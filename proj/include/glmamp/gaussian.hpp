#pragma once

// Scalar Gaussian message algebra used by both GAMP and the modular engine.
//
// Beliefs are stored as (mean, variance) at the boundary; every product and
// division is carried out on natural parameters (precision, precision*mean).

#include <cmath>
#include <stdexcept>
#include <string>

namespace glmamp {

inline constexpr double kDefaultVarianceFloor = 1e-11;

/// Scalar Gaussian belief N(mean, variance). variance > 0 and mean finite.
class GaussianBelief {
public:
    GaussianBelief(double mean, double variance);

    static GaussianBelief from_natural(double precision, double precision_mean);

    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    double precision() const noexcept { return 1.0 / variance_; }
    double precision_mean() const noexcept { return mean_ / variance_; }

private:
    double mean_;
    double variance_;
};

/// Pseudo-observation (ỹ, σ̃²) produced by EP division. `degenerate` is set when
/// the division produced a non-positive precision and the variance was floored.
struct ExtrinsicMessage {
    double pseudo_mean = 0.0;
    double pseudo_variance = 1.0;
    bool degenerate = false;

    GaussianBelief as_belief() const { return {pseudo_mean, pseudo_variance}; }
};

/// Scalar posterior summary: point estimate and (exact or Laplace) variance.
struct PosteriorStats {
    double point = 0.0;
    double variance = 1.0;
};

double floor_variance(double v, double floor = kDefaultVarianceFloor);

/// Gaussian product: precisions add, means are precision weighted.
GaussianBelief combine(const GaussianBelief& a, const GaussianBelief& b);

/// EP division posterior / cavity, i.e. the pseudo-observation whose product with
/// the cavity reproduces the posterior:
///   1/σ̃² = 1/var − 1/τ,   ỹ/σ̃² = ẑ/var − p̂/τ.
/// A non-positive extrinsic precision is not an error: the variance is floored
/// and the `degenerate` flag is raised.
ExtrinsicMessage ep_extrinsic(const PosteriorStats& posterior, const GaussianBelief& cavity,
                              double floor = kDefaultVarianceFloor);

/// Damped update of a Gaussian message in natural parameters:
/// λ ← β λ_new + (1 − β) λ_old, η likewise. β = 1 returns `fresh`.
ExtrinsicMessage damp(const ExtrinsicMessage& previous, const ExtrinsicMessage& fresh,
                      double damping);

}  // namespace glmamp
