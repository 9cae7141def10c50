#pragma once

// Module A: exact Gaussian inference for the standard linear model
//   x_j ~ N(prior_j),   ỹ_i = (A x)_i + N(0, σ̃²_i),
// returning x and z = A x marginals and the extrinsic message on each z_i.

#include <span>
#include <vector>

#include "glmamp/gaussian.hpp"
#include "glmamp/kernels.hpp"

namespace glmamp {

class LinearModel {
public:
    explicit LinearModel(Matrix a);

    const Matrix& a() const noexcept { return a_; }
    const Matrix& a_squared() const noexcept { return a2_; }
    Eigen::Index rows() const noexcept { return a_.rows(); }
    Eigen::Index cols() const noexcept { return a_.cols(); }

private:
    Matrix a_;
    Matrix a2_;
};

struct SlmResult {
    std::vector<PosteriorStats> x_stats;
    std::vector<PosteriorStats> z_stats;
    std::vector<ExtrinsicMessage> z_extrinsic;
    int degenerate_count = 0;
};

/// Cholesky of the n×n posterior precision diag(1/v) + Aᵀ diag(1/σ̃²) A, exact
/// marginal variances from the explicit inverse factor.
SlmResult slm_solve(const LinearModel& model, std::span<const ExtrinsicMessage> pseudo,
                    std::span<const GaussianBelief> prior_x,
                    double variance_floor = kDefaultVarianceFloor);

}  // namespace glmamp
