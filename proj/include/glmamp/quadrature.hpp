#pragma once

#include <vector>

namespace glmamp {

/// Gauss–Hermite rule for ∫ e^{−t²} g(t) dt. Log-weights are kept so that
/// extreme nodes can be rescaled without overflow.
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> log_weights;
};

/// Cached n-point rule (Golub–Welsch). Thread-safe; the reference stays valid
/// for the life of the process.
const HermiteRule& gauss_hermite(int order);

}  // namespace glmamp
