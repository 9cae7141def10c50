#include "glmamp/channels.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "glmamp/special.hpp"

namespace glmamp {

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool is_sign(double y) { return y == 1.0 || y == -1.0; }

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

std::string to_string(Mode mode) {
    return mode == Mode::SumProduct ? "mmse" : "map";
}

Mode parse_mode(const std::string& text) {
    if (text == "mmse") return Mode::SumProduct;
    if (text == "map") return Mode::MaxSum;
    throw std::invalid_argument("unknown mode '" + text + "' (expected mmse or map)");
}

// --- AWGN -------------------------------------------------------------------

AwgnChannel::AwgnChannel(double noise_variance) : noise_variance_(noise_variance) {
    require_positive(noise_variance, "awgn: var");
}

double AwgnChannel::log_likelihood(double z, double y) const {
    const double r = y - z;
    return -0.5 * r * r / noise_variance_ - 0.5 * std::log(2.0 * M_PI * noise_variance_);
}

double AwgnChannel::d1(double z, double y) const { return (y - z) / noise_variance_; }

double AwgnChannel::d2(double, double) const { return -1.0 / noise_variance_; }

bool AwgnChannel::in_support(double y) const { return std::isfinite(y); }

double AwgnChannel::sample(double z, std::mt19937_64& rng) const {
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance_));
    return z + noise(rng);
}

std::string AwgnChannel::spec() const { return "awgn(var=" + format_double(noise_variance_) + ")"; }

std::optional<PosteriorStats> AwgnChannel::closed_form_mmse(double y,
                                                            const GaussianBelief& belief) const {
    const auto post = combine(belief, GaussianBelief(y, noise_variance_));
    return PosteriorStats{post.mean(), post.variance()};
}

// --- Probit -----------------------------------------------------------------

ProbitChannel::ProbitChannel(double scale) : scale_(scale) { require_positive(scale, "probit: scale"); }

double ProbitChannel::log_likelihood(double z, double y) const {
    return special::log_normal_cdf(y * z / scale_);
}

double ProbitChannel::d1(double z, double y) const {
    return y / scale_ * special::inverse_mills(y * z / scale_);
}

double ProbitChannel::d2(double z, double y) const {
    const double u = y * z / scale_;
    const double r = special::inverse_mills(u);
    return -r * (r + u) / (scale_ * scale_);
}

bool ProbitChannel::in_support(double y) const { return is_sign(y); }

double ProbitChannel::sample(double z, std::mt19937_64& rng) const {
    std::normal_distribution<double> noise(0.0, scale_);
    return z + noise(rng) >= 0.0 ? 1.0 : -1.0;
}

std::string ProbitChannel::spec() const { return "probit(scale=" + format_double(scale_) + ")"; }

// z ~ N(p, τ), y = sign(z + N(0, s²)): with c = y p / √(s² + τ) and r = φ(c)/Φ(c),
// E[z|y] = p + y τ r / √(s² + τ) and var = τ − τ² r (r + c) / (s² + τ).
std::optional<PosteriorStats> ProbitChannel::closed_form_mmse(double y,
                                                              const GaussianBelief& belief) const {
    const double tau = belief.variance();
    const double denom = std::sqrt(scale_ * scale_ + tau);
    const double c = y * belief.mean() / denom;
    const double r = special::inverse_mills(c);
    const double point = belief.mean() + y * tau * r / denom;
    const double variance = tau - tau * tau * r * (r + c) / (denom * denom);
    return PosteriorStats{point, variance};
}

// --- Poisson ----------------------------------------------------------------

double PoissonChannel::log_likelihood(double z, double y) const {
    if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
    return y * std::log(z) - z - std::lgamma(y + 1.0);
}

double PoissonChannel::d1(double z, double y) const { return y / z - 1.0; }

double PoissonChannel::d2(double z, double y) const { return -y / (z * z); }

std::optional<PosteriorStats> PoissonChannel::closed_form_mmse(double y,
                                                               const GaussianBelief& belief) const {
    if (y != 0.0) return std::nullopt;
    // e^{−z} N(z; p̂, τ) ∝ N(z; p̂ − τ, τ) restricted to z > 0.
    const double tau = belief.variance();
    const double sd = std::sqrt(tau);
    const double mu = belief.mean() - tau;
    const double c = mu / sd;
    const double r = special::inverse_mills(c);
    return PosteriorStats{mu + sd * r, tau * (1.0 - r * (r + c))};
}

bool PoissonChannel::in_support(double y) const {
    return std::isfinite(y) && y >= 0.0 && y == std::floor(y);
}

double PoissonChannel::sample(double z, std::mt19937_64& rng) const {
    if (!(z > 0.0)) throw std::domain_error("poisson: rate must be positive");
    std::poisson_distribution<long long> draw(z);
    return static_cast<double>(draw(rng));
}

// --- Logistic ---------------------------------------------------------------

LogisticChannel::LogisticChannel(double scale) : scale_(scale) {
    require_positive(scale, "logistic: scale");
}

double LogisticChannel::log_likelihood(double z, double y) const {
    return special::log_sigmoid(y * z / scale_);
}

double LogisticChannel::d1(double z, double y) const {
    return y / scale_ * special::sigmoid(-y * z / scale_);
}

double LogisticChannel::d2(double z, double y) const {
    const double u = y * z / scale_;
    return -special::sigmoid(u) * special::sigmoid(-u) / (scale_ * scale_);
}

bool LogisticChannel::in_support(double y) const { return is_sign(y); }

double LogisticChannel::sample(double z, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < special::sigmoid(z / scale_) ? 1.0 : -1.0;
}

std::string LogisticChannel::spec() const {
    return "logistic(scale=" + format_double(scale_) + ")";
}

}  // namespace glmamp
