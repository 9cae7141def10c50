#pragma once

// Scalar input estimators for the x side: posterior of x under the prior given
// the AWGN pseudo-observation r = x + N(0, tau).

#include <memory>
#include <random>
#include <string>

#include "glmamp/channels.hpp"
#include "glmamp/gaussian.hpp"

namespace glmamp {

class InputPrior {
public:
    virtual ~InputPrior() = default;

    /// SumProduct: exact posterior mean/variance. MaxSum: MAP point and the
    /// Laplace variance of the same scalar model.
    virtual PosteriorStats denoise(Mode mode, double r, double tau) const = 0;

    virtual double mean() const = 0;
    virtual double variance() const = 0;
    virtual double sample(std::mt19937_64& rng) const = 0;
    virtual std::string spec() const = 0;
    virtual std::string family() const = 0;
};

using PriorPtr = std::shared_ptr<const InputPrior>;

class GaussianPrior final : public InputPrior {
public:
    GaussianPrior(double mean, double variance);

    PosteriorStats denoise(Mode mode, double r, double tau) const override;
    double mean() const override { return mean_; }
    double variance() const override { return variance_; }
    double sample(std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "gaussian"; }

private:
    double mean_;
    double variance_;
};

/// (1 − ρ) δ(x) + ρ N(x; mean, var).
///
/// MaxSum picks the mixture component with the larger posterior mass and
/// returns that component's mode; the spike's zero variance is floored to
/// kDefaultVarianceFloor.
class BernoulliGaussianPrior final : public InputPrior {
public:
    BernoulliGaussianPrior(double rho, double slab_mean, double slab_variance);

    PosteriorStats denoise(Mode mode, double r, double tau) const override;
    double mean() const override;
    double variance() const override;
    double sample(std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "bg"; }

    double rho() const noexcept { return rho_; }
    double slab_mean() const noexcept { return slab_mean_; }
    double slab_variance() const noexcept { return slab_variance_; }
    /// Posterior probability that x came from the slab.
    double slab_probability(double r, double tau) const;

private:
    double rho_;
    double slab_mean_;
    double slab_variance_;
};

/// (λ/2) exp(−λ|x|).
///
/// MaxSum is soft thresholding at λ·tau. The Laplace variance is tau away from
/// the kink; at the kink (point 0) the curvature is undefined and tau is used
/// as well.
class LaplacePrior final : public InputPrior {
public:
    explicit LaplacePrior(double rate);

    PosteriorStats denoise(Mode mode, double r, double tau) const override;
    double mean() const override { return 0.0; }
    double variance() const override { return 2.0 / (rate_ * rate_); }
    double sample(std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "laplace"; }

    double rate() const noexcept { return rate_; }

private:
    double rate_;
};

double soft_threshold(double r, double threshold);

}  // namespace glmamp
