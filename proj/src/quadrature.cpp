#include "glmamp/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace glmamp {

namespace {

// log of the Christoffel weight 1/Σ_{k<n} p_k(t)² for the orthonormal
// Hermite polynomials. The eigenvector form μ0 v0² is only absolutely
// accurate, which is useless at the outer nodes once e^{t²} is folded back in.
double log_christoffel_weight(double t, int order) {
    constexpr double kRescale = 1e150;
    double prev = 0.0;
    double cur = std::pow(M_PI, -0.25);
    double sum = cur * cur;
    double log_scale = 0.0;
    for (int k = 0; k + 1 < order; ++k) {
        const double next = (t * cur - std::sqrt(0.5 * k) * prev) / std::sqrt(0.5 * (k + 1));
        prev = cur;
        cur = next;
        sum += cur * cur;
        if (std::abs(cur) > kRescale) {
            cur /= kRescale;
            prev /= kRescale;
            sum /= kRescale * kRescale;
            log_scale += 2.0 * std::log(kRescale);
        }
    }
    return -(std::log(sum) + log_scale);
}

HermiteRule build_rule(int order) {
    // Jacobi matrix of the physicists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k/2).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(0.5 * k);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("gauss_hermite: eigen-decomposition failed");
    }

    HermiteRule rule;
    rule.nodes.resize(order);
    rule.log_weights.resize(order);
    for (int i = 0; i < order; ++i) {
        // Symmetrize: node i pairs with node n-1-i.
        const int j = order - 1 - i;
        rule.nodes[i] = 0.5 * (solver.eigenvalues()(i) - solver.eigenvalues()(j));
    }
    for (int i = 0; i < order; ++i) {
        const int j = order - 1 - i;
        rule.log_weights[i] = i <= j ? log_christoffel_weight(rule.nodes[i], order)
                                     : rule.log_weights[j];
    }
    return rule;
}

}  // namespace

const HermiteRule& gauss_hermite(int order) {
    if (order < 2) throw std::invalid_argument("gauss_hermite: order must be >= 2");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<HermiteRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<HermiteRule>(build_rule(order));
    return *slot;
}

}  // namespace glmamp
