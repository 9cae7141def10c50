#pragma once

// The two GLM drivers:
//  * run_gamp    — monolithic sum-product / max-sum GAMP;
//  * run_modular — module A (linear model) and module B (scalar posterior of
//    z) exchanging Gaussian messages by EP division. Module B is MMSE in
//    sum-product mode and MAP + Laplace in max-sum mode.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glmamp/channels.hpp"
#include "glmamp/output_functions.hpp"
#include "glmamp/priors.hpp"
#include "glmamp/slm.hpp"

namespace glmamp {

struct ProblemInstance {
    LinearModel model;
    std::vector<double> y;
    ChannelPtr channel;
    PriorPtr prior;
    std::optional<std::vector<double>> x_true;

    /// Throws std::invalid_argument on dimension or support mismatches.
    void validate() const;
    std::size_t m() const { return static_cast<std::size_t>(model.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(model.cols()); }
};

/// How module A of the modular engine is realised.
///  Exact — slm_solve (dense Cholesky) with the prior coupled through an x-side
///          EP message; exact for Gaussian priors.
///  Amp   — one GAMP linear step driven by the AWGN pseudo-observations.
enum class SlmBackend { Exact, Amp };

std::string to_string(SlmBackend backend);
/// "exact" | "amp".
SlmBackend parse_slm_backend(const std::string& text);

struct SolverConfig {
    int max_iter = 100;
    double tol = 1e-8;
    double damping = 1.0;
    double variance_floor = kDefaultVarianceFloor;
    std::uint64_t seed = 0;
    /// Input-side denoiser mode when it should differ from the output mode
    /// (nonstandard; for experimentation).
    std::optional<Mode> input_mode;
    SlmBackend slm_backend = SlmBackend::Exact;
    /// Initial pseudo-observations are (0, init_pseudo_variance · scale).
    double init_pseudo_variance = 1e6;
    bool record_trace = true;
    QuadratureOptions quadrature;

    static SolverConfig gamp_defaults();
    static SolverConfig modular_defaults();
    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    std::vector<double> x_hat;
    std::vector<double> tau_x;
    std::vector<double> p_hat;
    std::vector<double> tau_p;
    std::vector<double> z0;
    std::vector<double> z_var;
    std::vector<double> y_tilde;
    std::vector<double> sigma2_tilde;
    std::optional<double> nmse;
    int floor_events = 0;
};

using IterationTrace = std::vector<IterationRecord>;

struct SolveResult {
    std::vector<PosteriorStats> solution;
    IterationTrace trace;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    std::string message;
    int floor_events = 0;
    std::optional<double> nmse;
};

SolveResult run_gamp(const ProblemInstance& problem, Mode mode, const SolverConfig& config);
SolveResult run_modular(const ProblemInstance& problem, Mode mode, const SolverConfig& config);

double nmse(const std::vector<double>& estimate, const std::vector<double>& truth);

}  // namespace glmamp
