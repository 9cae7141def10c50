#include "glmamp/gaussian.hpp"

#include <algorithm>

namespace glmamp {

GaussianBelief::GaussianBelief(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) {
        throw std::invalid_argument("GaussianBelief: mean must be finite");
    }
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("GaussianBelief: variance must be positive and finite, got " +
                                    std::to_string(variance));
    }
}

GaussianBelief GaussianBelief::from_natural(double precision, double precision_mean) {
    return {precision_mean / precision, 1.0 / precision};
}

double floor_variance(double v, double floor) {
    return std::max(v, floor);
}

GaussianBelief combine(const GaussianBelief& a, const GaussianBelief& b) {
    const double lambda = a.precision() + b.precision();
    const double eta = a.precision_mean() + b.precision_mean();
    return GaussianBelief::from_natural(lambda, eta);
}

ExtrinsicMessage ep_extrinsic(const PosteriorStats& posterior, const GaussianBelief& cavity,
                              double floor) {
    if (!(posterior.variance > 0.0)) {
        throw std::invalid_argument("ep_extrinsic: posterior variance must be positive");
    }
    const double lambda = 1.0 / posterior.variance - cavity.precision();
    const double eta = posterior.point / posterior.variance - cavity.precision_mean();

    ExtrinsicMessage out;
    if (posterior.variance >= cavity.variance() || !(lambda > 0.0)) {
        out.degenerate = true;
        out.pseudo_variance = floor_variance(0.0, floor);
        out.pseudo_mean = posterior.point;
        return out;
    }
    out.pseudo_variance = floor_variance(1.0 / lambda, floor);
    out.degenerate = out.pseudo_variance != 1.0 / lambda;
    out.pseudo_mean = eta / lambda;
    return out;
}

ExtrinsicMessage damp(const ExtrinsicMessage& previous, const ExtrinsicMessage& fresh,
                      double damping) {
    if (damping >= 1.0) return fresh;
    const double lambda_old = 1.0 / previous.pseudo_variance;
    const double lambda_new = 1.0 / fresh.pseudo_variance;
    const double lambda = damping * lambda_new + (1.0 - damping) * lambda_old;
    const double eta = damping * lambda_new * fresh.pseudo_mean +
                       (1.0 - damping) * lambda_old * previous.pseudo_mean;
    ExtrinsicMessage out;
    out.pseudo_variance = 1.0 / lambda;
    out.pseudo_mean = eta / lambda;
    out.degenerate = fresh.degenerate;
    return out;
}

}  // namespace glmamp
