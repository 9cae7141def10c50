#pragma once

// Numerical certificates for the relations between sum-product and max-sum
// GAMP and their modular (module A + module B) decomposition:
//   laplace_identity — the max-sum curvature f''/(τ f'' − 1) equals
//                      (τ − var_MAP)/τ² with the Laplace variance;
//   ep_bridge        — EP division of the module-B posterior, fed through the
//                      AWGN output function, reproduces g_out and −g_out';
//   equivalence      — run_gamp and run_modular reach the same fixed point;
//   derivatives      — f_out' and f_out'' against finite differences.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "glmamp/engine.hpp"
#include "glmamp/problem_io.hpp"

namespace glmamp {

struct CheckReport {
    std::string check;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double max_rel_residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::size_t skipped_floored = 0;
    std::optional<std::string> offending_sample;
    std::map<std::string, double> diagnostics;
};

nlohmann::json to_json(const CheckReport& report);

inline constexpr double kLaplaceThreshold = 1e-10;
inline constexpr double kBridgeThreshold = 1e-10;
inline constexpr double kBridgeQuadratureThreshold = 1e-9;
inline constexpr double kEquivalenceThreshold = 1e-6;
inline constexpr double kDerivativeThreshold = 1e-6;
inline constexpr double kDerivativeStep = 1e-5;

/// A GAMP operating point (p̂, τ_p, y) with y drawn from the channel at a z
/// drawn from the belief. p̂ ∈ [−3, 3] (shifted to [5, 11] for positive-domain
/// channels, whose z is drawn from the belief truncated to z > 0), τ_p
/// log-uniform on [0.1, 10].
struct OperatingPoint {
    double p_hat;
    double tau_p;
    double z;
    double y;
};

OperatingPoint sample_operating_point(const OutputChannel& channel, std::mt19937_64& rng);

CheckReport check_laplace_identity(const OutputChannel& channel, std::size_t samples,
                                   std::uint64_t seed);
CheckReport check_ep_bridge(const OutputChannel& channel, Mode mode, std::size_t samples,
                            std::uint64_t seed);
CheckReport check_derivatives(const OutputChannel& channel, std::size_t samples, std::uint64_t seed);
CheckReport check_equivalence(const ProblemInstance& problem, Mode mode, const SolverConfig& config,
                              const std::string& name = "equivalence");

/// The channels every check family runs over.
std::vector<ChannelPtr> shipped_channels();

/// Pinned instances for the modular/monolithic equivalence family.
struct EquivalenceCase {
    std::string name;
    GenSpec gen;
    Mode mode;
    SolverConfig config;
};

std::vector<EquivalenceCase> equivalence_suite();

}  // namespace glmamp
