#include "glmamp/slm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace glmamp {

LinearModel::LinearModel(Matrix a) : a_(std::move(a)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw std::invalid_argument("LinearModel: empty matrix");
    if (!a_.allFinite()) throw std::invalid_argument("LinearModel: non-finite entry");
    a2_ = kernels::squared(a_);
}

SlmResult slm_solve(const LinearModel& model, std::span<const ExtrinsicMessage> pseudo,
                    std::span<const GaussianBelief> prior_x, double variance_floor) {
    const Eigen::Index m = model.rows();
    const Eigen::Index n = model.cols();
    if (static_cast<Eigen::Index>(pseudo.size()) != m ||
        static_cast<Eigen::Index>(prior_x.size()) != n) {
        throw std::invalid_argument("slm_solve: dimension mismatch");
    }
    const Matrix& a = model.a();

    Vector obs_precision(m);
    Vector obs_eta(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = pseudo[static_cast<std::size_t>(i)].pseudo_variance;
        if (!(v > 0.0)) throw std::invalid_argument("slm_solve: pseudo variance must be positive");
        obs_precision[i] = 1.0 / v;
        obs_eta[i] = pseudo[static_cast<std::size_t>(i)].pseudo_mean / v;
    }

    // Q = diag(1/v) + Aᵀ diag(λ) A,   b = μ/v + Aᵀ η
    Eigen::MatrixXd q = a.transpose() * obs_precision.asDiagonal() * a;
    Vector b = kernels::parallel::matvec_transpose(a, obs_eta);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& p = prior_x[static_cast<std::size_t>(j)];
        q(j, j) += p.precision();
        b[j] += p.precision_mean();
    }

    const Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("slm_solve: posterior precision is not positive definite");
    }
    const Vector x_mean = llt.solve(b);

    // Σ = L⁻ᵀ L⁻¹: Σ_jj = ‖L⁻¹ e_j‖², (AΣAᵀ)_ii = ‖L⁻¹ a_i‖².
    const auto lower = llt.matrixL();
    const Eigen::MatrixXd l_inv = lower.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd w = lower.solve(a.transpose());
    const Vector z_mean = kernels::parallel::matvec(a, x_mean);

    SlmResult out;
    out.x_stats.resize(static_cast<std::size_t>(n));
    out.z_stats.resize(static_cast<std::size_t>(m));
    out.z_extrinsic.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < n; ++j) {
        out.x_stats[static_cast<std::size_t>(j)] = {x_mean[j],
                                                    floor_variance(l_inv.col(j).squaredNorm(), variance_floor)};
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out.z_stats[k] = {z_mean[i], floor_variance(w.col(i).squaredNorm(), variance_floor)};
        out.z_extrinsic[k] = ep_extrinsic(out.z_stats[k], pseudo[k].as_belief(), variance_floor);
        if (out.z_extrinsic[k].degenerate) ++out.degenerate_count;
    }
    return out;
}

}  // namespace glmamp
