#include "glmamp/priors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "glmamp/special.hpp"

namespace glmamp {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("denoise: tau must be positive and finite");
    }
}

// log N(r; m, v)
double log_normal(double r, double m, double v) {
    const double d = r - m;
    return -0.5 * d * d / v - 0.5 * std::log(2.0 * M_PI * v);
}

PosteriorStats gaussian_product(double prior_mean, double prior_var, double r, double tau) {
    const double var = prior_var * tau / (prior_var + tau);
    const double mean = (prior_mean * tau + r * prior_var) / (prior_var + tau);
    return {mean, var};
}

}  // namespace

double soft_threshold(double r, double threshold) {
    if (r > threshold) return r - threshold;
    if (r < -threshold) return r + threshold;
    return 0.0;
}

// --- Gaussian ---------------------------------------------------------------

GaussianPrior::GaussianPrior(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) throw std::invalid_argument("gaussian: mean must be finite");
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("gaussian: var must be positive");
    }
}

PosteriorStats GaussianPrior::denoise(Mode, double r, double tau) const {
    require_tau(tau);
    return gaussian_product(mean_, variance_, r, tau);
}

double GaussianPrior::sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> d(mean_, std::sqrt(variance_));
    return d(rng);
}

std::string GaussianPrior::spec() const {
    return "gaussian(mean=" + fmt(mean_) + ",var=" + fmt(variance_) + ")";
}

// --- Bernoulli–Gaussian -----------------------------------------------------

BernoulliGaussianPrior::BernoulliGaussianPrior(double rho, double slab_mean, double slab_variance)
    : rho_(rho), slab_mean_(slab_mean), slab_variance_(slab_variance) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("bg: rho out of [0,1]");
    if (!std::isfinite(slab_mean)) throw std::invalid_argument("bg: mean must be finite");
    if (!(slab_variance > 0.0) || !std::isfinite(slab_variance)) {
        throw std::invalid_argument("bg: var must be positive");
    }
}

double BernoulliGaussianPrior::mean() const { return rho_ * slab_mean_; }

double BernoulliGaussianPrior::variance() const {
    const double second = rho_ * (slab_variance_ + slab_mean_ * slab_mean_);
    const double m = mean();
    return std::max(second - m * m, kDefaultVarianceFloor);
}

double BernoulliGaussianPrior::slab_probability(double r, double tau) const {
    if (rho_ <= 0.0) return 0.0;
    if (rho_ >= 1.0) return 1.0;
    const double log_slab = std::log(rho_) + log_normal(r, slab_mean_, slab_variance_ + tau);
    const double log_spike = std::log1p(-rho_) + log_normal(r, 0.0, tau);
    // π = 1 / (1 + exp(log_spike − log_slab))
    return special::sigmoid(log_slab - log_spike);
}

PosteriorStats BernoulliGaussianPrior::denoise(Mode mode, double r, double tau) const {
    require_tau(tau);
    const double pi = slab_probability(r, tau);
    const PosteriorStats slab = gaussian_product(slab_mean_, slab_variance_, r, tau);
    if (mode == Mode::MaxSum) {
        if (pi > 0.5) return slab;
        return {0.0, kDefaultVarianceFloor};
    }
    const double mean = pi * slab.point;
    // var = π (v_s + μ_s²) − (π μ_s)² = π v_s + π (1 − π) μ_s²
    const double var = pi * slab.variance + pi * (1.0 - pi) * slab.point * slab.point;
    return {mean, std::max(var, kDefaultVarianceFloor)};
}

double BernoulliGaussianPrior::sample(std::mt19937_64& rng) const {
    std::bernoulli_distribution active(rho_);
    std::normal_distribution<double> slab(slab_mean_, std::sqrt(slab_variance_));
    const bool on = active(rng);
    const double value = slab(rng);
    return on ? value : 0.0;
}

std::string BernoulliGaussianPrior::spec() const {
    return "bg(rho=" + fmt(rho_) + ",mean=" + fmt(slab_mean_) + ",var=" + fmt(slab_variance_) + ")";
}

// --- Laplace ----------------------------------------------------------------

LaplacePrior::LaplacePrior(double rate) : rate_(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("laplace: lambda must be positive");
}

// Posterior ∝ exp(−λ|x|) N(x; r, τ) splits into two truncated Gaussians:
//   x > 0: N(x; r − λτ, τ) restricted to x > 0, weight e^{−λr} Φ((r − λτ)/√τ)
//   x < 0: N(x; r + λτ, τ) restricted to x < 0, weight e^{+λr} Φ(−(r + λτ)/√τ)
PosteriorStats LaplacePrior::denoise(Mode mode, double r, double tau) const {
    require_tau(tau);
    if (mode == Mode::MaxSum) return {soft_threshold(r, rate_ * tau), tau};

    const double s = std::sqrt(tau);
    const double a_pos = r - rate_ * tau;
    const double a_neg = r + rate_ * tau;
    const double alpha_pos = a_pos / s;    // P(x > 0) under N(a_pos, τ)
    const double alpha_neg = -a_neg / s;   // P(x < 0) under N(a_neg, τ)

    const double log_w_pos = -rate_ * r + special::log_normal_cdf(alpha_pos);
    const double log_w_neg = rate_ * r + special::log_normal_cdf(alpha_neg);
    const double p_pos = special::sigmoid(log_w_pos - log_w_neg);
    const double p_neg = 1.0 - p_pos;

    // Truncated-normal moments.
    const double lam_pos = special::inverse_mills(alpha_pos);
    const double mean_pos = a_pos + s * lam_pos;
    const double var_pos = tau * (1.0 - lam_pos * (lam_pos + alpha_pos));
    const double lam_neg = special::inverse_mills(alpha_neg);
    const double mean_neg = a_neg - s * lam_neg;
    const double var_neg = tau * (1.0 - lam_neg * (lam_neg + alpha_neg));

    const double mean = p_pos * mean_pos + p_neg * mean_neg;
    const double dpos = mean_pos - mean;
    const double dneg = mean_neg - mean;
    const double var = p_pos * (var_pos + dpos * dpos) + p_neg * (var_neg + dneg * dneg);
    return {mean, std::max(var, kDefaultVarianceFloor)};
}

double LaplacePrior::sample(std::mt19937_64& rng) const {
    std::exponential_distribution<double> mag(rate_);
    std::bernoulli_distribution sign(0.5);
    const double m = mag(rng);
    return sign(rng) ? m : -m;
}

std::string LaplacePrior::spec() const { return "laplace(lambda=" + fmt(rate_) + ")"; }

}  // namespace glmamp
