#pragma once

// Scalar output channels p(y|z). Each channel exposes its log-likelihood
// f_out(z, y) = log p(y|z) together with the first two z-derivatives, which is
// all the MAP/Laplace path needs; the MMSE path additionally uses closed-form
// moments where a channel has them.

#include <memory>
#include <optional>
#include <random>
#include <string>

#include "glmamp/gaussian.hpp"

namespace glmamp {

enum class Mode { SumProduct, MaxSum };

std::string to_string(Mode mode);
/// "mmse" | "map"; throws std::invalid_argument otherwise.
Mode parse_mode(const std::string& text);

/// Where z may live for the likelihood to be finite.
enum class Domain { RealLine, Positive };

class OutputChannel {
public:
    virtual ~OutputChannel() = default;

    virtual double log_likelihood(double z, double y) const = 0;
    virtual double d1(double z, double y) const = 0;
    virtual double d2(double z, double y) const = 0;

    virtual Domain domain() const { return Domain::RealLine; }
    virtual bool in_support(double y) const = 0;
    /// Draw y ~ p(y|z).
    virtual double sample(double z, std::mt19937_64& rng) const = 0;
    /// Canonical spec-grammar string, e.g. "probit(scale=1)".
    virtual std::string spec() const = 0;
    virtual std::string family() const = 0;

    /// Exact posterior moments of z ~ N(belief) given y, when available.
    virtual std::optional<PosteriorStats> closed_form_mmse(double /*y*/,
                                                           const GaussianBelief& /*belief*/) const {
        return std::nullopt;
    }
};

using ChannelPtr = std::shared_ptr<const OutputChannel>;

/// y = z + N(0, noise_variance).
class AwgnChannel final : public OutputChannel {
public:
    explicit AwgnChannel(double noise_variance);

    double log_likelihood(double z, double y) const override;
    double d1(double z, double y) const override;
    double d2(double z, double y) const override;
    bool in_support(double y) const override;
    double sample(double z, std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "awgn"; }
    std::optional<PosteriorStats> closed_form_mmse(double y,
                                                   const GaussianBelief& belief) const override;

    double noise_variance() const noexcept { return noise_variance_; }

private:
    double noise_variance_;
};

/// p(y = ±1 | z) = Φ(y z / scale).
class ProbitChannel final : public OutputChannel {
public:
    explicit ProbitChannel(double scale);

    double log_likelihood(double z, double y) const override;
    double d1(double z, double y) const override;
    double d2(double z, double y) const override;
    bool in_support(double y) const override;
    double sample(double z, std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "probit"; }
    std::optional<PosteriorStats> closed_form_mmse(double y,
                                                   const GaussianBelief& belief) const override;

    double scale() const noexcept { return scale_; }

private:
    double scale_;
};

/// p(y | z) = z^y e^{-z} / y!, y ∈ {0, 1, 2, …}, z > 0.
class PoissonChannel final : public OutputChannel {
public:
    double log_likelihood(double z, double y) const override;
    double d1(double z, double y) const override;
    double d2(double z, double y) const override;
    Domain domain() const override { return Domain::Positive; }
    bool in_support(double y) const override;
    double sample(double z, std::mt19937_64& rng) const override;
    std::string spec() const override { return "poisson()"; }
    /// Only y = 0, where the posterior is a Gaussian truncated to z > 0.
    std::optional<PosteriorStats> closed_form_mmse(double y, const GaussianBelief& belief) const override;
    std::string family() const override { return "poisson"; }
};

/// p(y = ±1 | z) = 1 / (1 + exp(−y z / scale)).
class LogisticChannel final : public OutputChannel {
public:
    explicit LogisticChannel(double scale);

    double log_likelihood(double z, double y) const override;
    double d1(double z, double y) const override;
    double d2(double z, double y) const override;
    bool in_support(double y) const override;
    double sample(double z, std::mt19937_64& rng) const override;
    std::string spec() const override;
    std::string family() const override { return "logistic"; }

    double scale() const noexcept { return scale_; }

private:
    double scale_;
};

}  // namespace glmamp
