#include "glmamp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glmamp {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double relative_change(const Vector& next, const Vector& prev) {
    const double denom = std::max(next.norm(), 1e-300);
    return (next - prev).norm() / denom;
}

// Both the estimate and its variance must have settled: a max-sum iterate
// can sit still for one pass while its variance collapses.
bool converged(const Vector& x, const Vector& x_prev, const Vector& tau, const Vector& tau_prev,
               double tol) {
    return relative_change(x, x_prev) < tol && relative_change(tau, tau_prev) < tol;
}

double lerp(double fresh, double old, double beta) { return beta * fresh + (1.0 - beta) * old; }

// Scale used for the uninformative starting pseudo-observations: the largest
// prior variance of z = A x.
double prior_z_scale(const ProblemInstance& problem) {
    const Vector tau_x = Vector::Constant(problem.model.cols(), problem.prior->variance());
    const Vector tau_p = kernels::parallel::matvec(problem.model.a_squared(), tau_x);
    return std::max(1.0, tau_p.maxCoeff());
}

// Shared bookkeeping for both drivers: trace recording, divergence and
// convergence checks.
class Recorder {
public:
    Recorder(const ProblemInstance& problem, const SolverConfig& config, SolveResult& result)
        : problem_(problem), config_(config), result_(result) {}

    // Returns false when the iterate is non-finite (the record is dropped).
    bool push(IterationRecord record) {
        if (!all_finite(record.x_hat) || !all_finite(record.tau_x) || !all_finite(record.p_hat) ||
            !all_finite(record.tau_p)) {
            result_.diverged = true;
            result_.message = "non-finite iterate at iteration " + std::to_string(record.iter);
            return false;
        }
        if (problem_.x_true) record.nmse = nmse(record.x_hat, *problem_.x_true);
        result_.floor_events += record.floor_events;
        result_.iterations = record.iter;
        result_.nmse = record.nmse;
        last_ = record;
        if (config_.record_trace) result_.trace.push_back(std::move(record));
        return true;
    }

    const IterationRecord& last() const { return last_; }

    void fail(int iter, const std::exception& e) {
        result_.diverged = true;
        result_.message = "iteration " + std::to_string(iter) + ": " + e.what();
    }

private:
    const ProblemInstance& problem_;
    const SolverConfig& config_;
    SolveResult& result_;
    IterationRecord last_;
};

void finish(SolveResult& result, const Vector& x_hat, const Vector& tau_x) {
    result.solution.resize(static_cast<std::size_t>(x_hat.size()));
    for (Eigen::Index j = 0; j < x_hat.size(); ++j) {
        result.solution[static_cast<std::size_t>(j)] = {x_hat[j], tau_x[j]};
    }
}

// One GAMP input half-step: τ_r = 1/(A²ᵀ τ_s), r = x̂ + τ_r Aᵀ s, then the
// denoiser.
void input_step(const ProblemInstance& problem, Mode input_mode, const SolverConfig& config,
                const Vector& s, const Vector& tau_s, Vector& x_hat, Vector& tau_x) {
    const Matrix& a = problem.model.a();
    const Vector precision = kernels::parallel::matvec_transpose(problem.model.a_squared(), tau_s);
    const Vector correlation = kernels::parallel::matvec_transpose(a, s);
    Vector x_new(x_hat.size());
    Vector tau_new(x_hat.size());
    kernels::parallel::for_each_index(static_cast<std::size_t>(x_hat.size()), [&](std::size_t k) {
        const auto j = static_cast<Eigen::Index>(k);
        const double tau_r = 1.0 / std::max(precision[j], 1e-300);
        const double r = x_hat[j] + tau_r * correlation[j];
        const PosteriorStats post = problem.prior->denoise(input_mode, r, tau_r);
        x_new[j] = post.point;
        tau_new[j] = floor_variance(post.variance, config.variance_floor);
    });
    for (Eigen::Index j = 0; j < x_hat.size(); ++j) {
        x_hat[j] = lerp(x_new[j], x_hat[j], config.damping);
        tau_x[j] = lerp(tau_new[j], tau_x[j], config.damping);
    }
}

SolveResult run_modular_amp(const ProblemInstance& problem, Mode mode, const SolverConfig& config);
SolveResult run_modular_exact(const ProblemInstance& problem, Mode mode, const SolverConfig& config);

// Module B for one component: posterior of z, then EP division by the belief.
struct ModuleBOutput {
    PosteriorStats post;
    ExtrinsicMessage ext;
};

ModuleBOutput module_b(const ProblemInstance& problem, Mode mode, const SolverConfig& config,
                       double y, const GaussianBelief& belief) {
    ModuleBOutput out;
    out.post = mode == Mode::SumProduct
                   ? posterior_mmse(*problem.channel, y, belief, config.quadrature)
                   : posterior_map(*problem.channel, y, belief);
    out.ext = ep_extrinsic(out.post, belief, config.variance_floor);
    return out;
}

}  // namespace

std::string to_string(SlmBackend backend) { return backend == SlmBackend::Exact ? "exact" : "amp"; }

SlmBackend parse_slm_backend(const std::string& text) {
    if (text == "exact") return SlmBackend::Exact;
    if (text == "amp") return SlmBackend::Amp;
    throw std::invalid_argument("unknown slm backend '" + text + "' (expected exact or amp)");
}

SolverConfig SolverConfig::gamp_defaults() { return SolverConfig{}; }

SolverConfig SolverConfig::modular_defaults() {
    SolverConfig c;
    c.damping = 0.7;
    return c;
}

void SolverConfig::validate() const {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must be in (0,1]");
    if (!(variance_floor > 0.0)) throw std::invalid_argument("variance_floor must be positive");
    if (!(init_pseudo_variance > 0.0)) throw std::invalid_argument("init_pseudo_variance must be positive");
}

void ProblemInstance::validate() const {
    if (!channel || !prior) throw std::invalid_argument("problem: channel and prior are required");
    if (y.size() != m()) throw std::invalid_argument("problem: y has wrong length");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!channel->in_support(y[i])) {
            throw std::invalid_argument("problem: y[" + std::to_string(i) +
                                        "] outside the support of " + channel->spec());
        }
    }
    if (x_true && x_true->size() != n()) throw std::invalid_argument("problem: x_true has wrong length");
}

double nmse(const std::vector<double>& estimate, const std::vector<double>& truth) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const double d = estimate[j] - truth[j];
        num += d * d;
        den += truth[j] * truth[j];
    }
    return den > 0.0 ? num / den : num;
}

SolveResult run_gamp(const ProblemInstance& problem, Mode mode, const SolverConfig& config) {
    problem.validate();
    config.validate();
    const Mode input_mode = config.input_mode.value_or(mode);
    const Matrix& a = problem.model.a();
    const Matrix& a2 = problem.model.a_squared();
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();

    Vector x_hat = Vector::Constant(n, problem.prior->mean());
    Vector tau_x = Vector::Constant(n, problem.prior->variance());
    Vector s = Vector::Zero(m);
    Vector tau_s = Vector::Zero(m);

    SolveResult result;
    Recorder recorder(problem, config, result);
    Vector x_good = x_hat;
    Vector tau_good = tau_x;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Vector x_prev = x_hat;
        const Vector tau_prev = tau_x;
        IterationRecord rec;
        rec.iter = iter;
        try {
            Vector tau_p = kernels::parallel::matvec(a2, tau_x);
            for (Eigen::Index i = 0; i < m; ++i) tau_p[i] = floor_variance(tau_p[i], config.variance_floor);
            const Vector p_hat = kernels::parallel::matvec(a, x_hat) - tau_p.cwiseProduct(s);

            Vector s_new(m), tau_s_new(m), z0(m), z_var(m), y_tilde(m), sigma2(m);
            std::vector<char> floored(static_cast<std::size_t>(m), 0);
            kernels::parallel::for_each_index(static_cast<std::size_t>(m), [&](std::size_t k) {
                const auto i = static_cast<Eigen::Index>(k);
                const GaussianBelief belief(p_hat[i], tau_p[i]);
                const OutputEstimate est =
                    g_out(*problem.channel, mode, problem.y[k], belief, config.quadrature);
                s_new[i] = est.value;
                tau_s_new[i] = est.neg_derivative;
                z0[i] = est.stats.point;
                z_var[i] = est.stats.variance;
                // Implied pseudo-observation, recorded for comparison with the modular engine.
                const ExtrinsicMessage ext = ep_extrinsic(est.stats, belief, config.variance_floor);
                y_tilde[i] = ext.pseudo_mean;
                sigma2[i] = ext.pseudo_variance;
                floored[k] = ext.degenerate ? 1 : 0;
            });
            if (iter == 1) {
                s = s_new;
                tau_s = tau_s_new;
            } else {
                for (Eigen::Index i = 0; i < m; ++i) {
                    s[i] = lerp(s_new[i], s[i], config.damping);
                    tau_s[i] = lerp(tau_s_new[i], tau_s[i], config.damping);
                }
            }
            input_step(problem, input_mode, config, s, tau_s, x_hat, tau_x);

            rec.x_hat = to_std(x_hat);
            rec.tau_x = to_std(tau_x);
            rec.p_hat = to_std(p_hat);
            rec.tau_p = to_std(tau_p);
            rec.z0 = to_std(z0);
            rec.z_var = to_std(z_var);
            rec.y_tilde = to_std(y_tilde);
            rec.sigma2_tilde = to_std(sigma2);
            rec.floor_events = static_cast<int>(std::count(floored.begin(), floored.end(), 1));
        } catch (const std::exception& e) {
            recorder.fail(iter, e);
            break;
        }
        if (!recorder.push(std::move(rec))) break;
        x_good = x_hat;
        tau_good = tau_x;
        if (converged(x_hat, x_prev, tau_x, tau_prev, config.tol)) {
            result.converged = true;
            break;
        }
    }
    finish(result, x_good, tau_good);
    return result;
}

SolveResult run_modular(const ProblemInstance& problem, Mode mode, const SolverConfig& config) {
    problem.validate();
    config.validate();
    return config.slm_backend == SlmBackend::Exact ? run_modular_exact(problem, mode, config)
                                                   : run_modular_amp(problem, mode, config);
}

namespace {

SolveResult run_modular_amp(const ProblemInstance& problem, Mode mode, const SolverConfig& config) {
    const Mode input_mode = config.input_mode.value_or(mode);
    const Matrix& a = problem.model.a();
    const Matrix& a2 = problem.model.a_squared();
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();

    Vector x_hat = Vector::Constant(n, problem.prior->mean());
    Vector tau_x = Vector::Constant(n, problem.prior->variance());
    Vector s = Vector::Zero(m);
    Vector tau_s = Vector::Zero(m);
    const double init_var = config.init_pseudo_variance * prior_z_scale(problem);
    std::vector<ExtrinsicMessage> pseudo(static_cast<std::size_t>(m), ExtrinsicMessage{0.0, init_var, false});

    SolveResult result;
    Recorder recorder(problem, config, result);
    Vector x_good = x_hat;
    Vector tau_good = tau_x;
    // Input-side damping belongs to the pseudo-observations here.
    SolverConfig undamped_input = config;
    undamped_input.damping = 1.0;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Vector x_prev = x_hat;
        const Vector tau_prev = tau_x;
        IterationRecord rec;
        rec.iter = iter;
        try {
            // Module A emits z_A^ext = (p̂, τ_p).
            Vector tau_p = kernels::parallel::matvec(a2, tau_x);
            for (Eigen::Index i = 0; i < m; ++i) tau_p[i] = floor_variance(tau_p[i], config.variance_floor);
            const Vector p_hat = kernels::parallel::matvec(a, x_hat) - tau_p.cwiseProduct(s);

            // Module B returns z_B^ext = (ỹ, σ̃²); module A reads it as an AWGN channel.
            Vector z0(m), z_var(m);
            std::vector<char> floored(static_cast<std::size_t>(m), 0);
            kernels::parallel::for_each_index(static_cast<std::size_t>(m), [&](std::size_t k) {
                const auto i = static_cast<Eigen::Index>(k);
                const GaussianBelief belief(p_hat[i], tau_p[i]);
                const ModuleBOutput b = module_b(problem, mode, config, problem.y[k], belief);
                z0[i] = b.post.point;
                z_var[i] = b.post.variance;
                if (b.ext.degenerate) {
                    floored[k] = 1;
                } else {
                    pseudo[k] = damp(pseudo[k], b.ext, config.damping);
                }
                const AwgnOutput out = awgn_g_out(pseudo[k], belief);
                s[i] = out.value;
                tau_s[i] = out.neg_derivative;
            });
            input_step(problem, input_mode, undamped_input, s, tau_s, x_hat, tau_x);

            rec.x_hat = to_std(x_hat);
            rec.tau_x = to_std(tau_x);
            rec.p_hat = to_std(p_hat);
            rec.tau_p = to_std(tau_p);
            rec.z0 = to_std(z0);
            rec.z_var = to_std(z_var);
            rec.y_tilde.resize(static_cast<std::size_t>(m));
            rec.sigma2_tilde.resize(static_cast<std::size_t>(m));
            for (std::size_t k = 0; k < pseudo.size(); ++k) {
                rec.y_tilde[k] = pseudo[k].pseudo_mean;
                rec.sigma2_tilde[k] = pseudo[k].pseudo_variance;
            }
            rec.floor_events = static_cast<int>(std::count(floored.begin(), floored.end(), 1));
        } catch (const std::exception& e) {
            recorder.fail(iter, e);
            break;
        }
        if (!recorder.push(std::move(rec))) break;
        x_good = x_hat;
        tau_good = tau_x;
        if (converged(x_hat, x_prev, tau_x, tau_prev, config.tol)) {
            result.converged = true;
            break;
        }
    }
    finish(result, x_good, tau_good);
    return result;
}

SolveResult run_modular_exact(const ProblemInstance& problem, Mode mode, const SolverConfig& config) {
    const Mode input_mode = config.input_mode.value_or(mode);
    const Eigen::Index m = problem.model.rows();
    const Eigen::Index n = problem.model.cols();

    const double init_var = config.init_pseudo_variance * prior_z_scale(problem);
    std::vector<ExtrinsicMessage> pseudo(static_cast<std::size_t>(m), ExtrinsicMessage{0.0, init_var, false});
    // x-side message standing in for the prior inside the Gaussian SLM.
    std::vector<ExtrinsicMessage> x_msg(static_cast<std::size_t>(n),
                                        ExtrinsicMessage{problem.prior->mean(), problem.prior->variance(), false});

    Vector x_hat = Vector::Constant(n, problem.prior->mean());
    Vector tau_x = Vector::Constant(n, problem.prior->variance());
    SolveResult result;
    Recorder recorder(problem, config, result);
    Vector x_good = x_hat;
    Vector tau_good = tau_x;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Vector x_prev = x_hat;
        const Vector tau_prev = tau_x;
        IterationRecord rec;
        rec.iter = iter;
        try {
            std::vector<GaussianBelief> prior_x;
            prior_x.reserve(x_msg.size());
            for (const auto& msg : x_msg) prior_x.push_back(msg.as_belief());
            const SlmResult slm = slm_solve(problem.model, pseudo, prior_x, config.variance_floor);
            int floor_events = slm.degenerate_count;

            // Input side: cavity = SLM x-marginal ÷ current x message, then the
            // true prior, then divide again for the next x message.
            std::vector<char> x_floored(static_cast<std::size_t>(n), 0);
            kernels::parallel::for_each_index(static_cast<std::size_t>(n), [&](std::size_t k) {
                const auto j = static_cast<Eigen::Index>(k);
                const ExtrinsicMessage cavity =
                    ep_extrinsic(slm.x_stats[k], prior_x[k], config.variance_floor);
                const GaussianBelief cav = cavity.as_belief();
                const PosteriorStats post =
                    problem.prior->denoise(input_mode, cav.mean(), cav.variance());
                x_hat[j] = post.point;
                tau_x[j] = floor_variance(post.variance, config.variance_floor);
                const ExtrinsicMessage next = ep_extrinsic(post, cav, config.variance_floor);
                if (cavity.degenerate || next.degenerate) {
                    x_floored[k] = 1;
                } else {
                    x_msg[k] = damp(x_msg[k], next, config.damping);
                }
            });
            floor_events += static_cast<int>(std::count(x_floored.begin(), x_floored.end(), 1));

            // Output side: z_A^ext = (p̂, τ_p) into module B.
            rec.p_hat.resize(static_cast<std::size_t>(m));
            rec.tau_p.resize(static_cast<std::size_t>(m));
            rec.z0.resize(static_cast<std::size_t>(m));
            rec.z_var.resize(static_cast<std::size_t>(m));
            std::vector<char> z_floored(static_cast<std::size_t>(m), 0);
            kernels::parallel::for_each_index(static_cast<std::size_t>(m), [&](std::size_t k) {
                const ExtrinsicMessage& za = slm.z_extrinsic[k];
                const GaussianBelief belief(za.pseudo_mean, za.pseudo_variance);
                const ModuleBOutput b = module_b(problem, mode, config, problem.y[k], belief);
                rec.p_hat[k] = belief.mean();
                rec.tau_p[k] = belief.variance();
                rec.z0[k] = b.post.point;
                rec.z_var[k] = b.post.variance;
                if (b.ext.degenerate) {
                    z_floored[k] = 1;
                } else {
                    pseudo[k] = damp(pseudo[k], b.ext, config.damping);
                }
            });
            floor_events += static_cast<int>(std::count(z_floored.begin(), z_floored.end(), 1));

            rec.x_hat = to_std(x_hat);
            rec.tau_x = to_std(tau_x);
            rec.y_tilde.resize(static_cast<std::size_t>(m));
            rec.sigma2_tilde.resize(static_cast<std::size_t>(m));
            for (std::size_t k = 0; k < pseudo.size(); ++k) {
                rec.y_tilde[k] = pseudo[k].pseudo_mean;
                rec.sigma2_tilde[k] = pseudo[k].pseudo_variance;
            }
            rec.floor_events = floor_events;
        } catch (const std::exception& e) {
            recorder.fail(iter, e);
            break;
        }
        if (!recorder.push(std::move(rec))) break;
        x_good = x_hat;
        tau_good = tau_x;
        if (converged(x_hat, x_prev, tau_x, tau_prev, config.tol)) {
            result.converged = true;
            break;
        }
    }
    finish(result, x_good, tau_good);
    return result;
}

}  // namespace

}  // namespace glmamp
