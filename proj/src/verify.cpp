#include "glmamp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glmamp/output_functions.hpp"
#include "glmamp/spec_parse.hpp"

namespace glmamp {

namespace {

// Residual floors, in units of the compared quantity: −g_out' lives in
// (0, 1/τ], g_out scales as 1/√τ.
constexpr double kUnitFloor = 1e-4;

struct Tracker {
    double worst = 0.0;
    std::optional<std::string> where;

    void update(double residual, const std::string& description) {
        if (!(residual <= worst)) {  // also catches NaN
            worst = std::isnan(residual) ? INFINITY : residual;
            where = description;
        }
    }
};

std::string describe(const OperatingPoint& op) {
    std::ostringstream os;
    os.precision(17);
    os << "p_hat=" << op.p_hat << " tau_p=" << op.tau_p << " y=" << op.y;
    return os.str();
}

CheckReport finalize(std::string name, std::size_t samples, std::uint64_t seed, double threshold,
                     const Tracker& tracker, std::size_t skipped) {
    CheckReport r;
    r.check = std::move(name);
    r.samples = samples;
    r.seed = seed;
    r.max_rel_residual = tracker.worst;
    r.threshold = threshold;
    r.pass = tracker.worst <= threshold;
    r.skipped_floored = skipped;
    if (!r.pass) r.offending_sample = tracker.where;
    return r;
}

double max_rel_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        num = std::max(num, std::abs(a[k] - b[k]));
        den = std::max(den, std::max(std::abs(a[k]), std::abs(b[k])));
    }
    return den > 0.0 ? num / den : num;
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
    nlohmann::json j;
    j["check"] = r.check;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["max_rel_residual"] = r.max_rel_residual;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["skipped_floored"] = r.skipped_floored;
    if (r.offending_sample) j["offending_sample"] = *r.offending_sample;
    if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
    return j;
}

OperatingPoint sample_operating_point(const OutputChannel& channel, std::mt19937_64& rng) {
    const bool positive = channel.domain() == Domain::Positive;
    std::uniform_real_distribution<double> mean_dist(positive ? 5.0 : -3.0, positive ? 11.0 : 3.0);
    std::uniform_real_distribution<double> log_tau(std::log(0.1), std::log(10.0));
    std::normal_distribution<double> std_normal(0.0, 1.0);

    OperatingPoint op{};
    op.p_hat = mean_dist(rng);
    op.tau_p = std::exp(log_tau(rng));
    do {
        op.z = op.p_hat + std::sqrt(op.tau_p) * std_normal(rng);
    } while (positive && !(op.z > 0.0));
    op.y = channel.sample(op.z, rng);
    return op;
}

CheckReport check_laplace_identity(const OutputChannel& channel, std::size_t samples,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tracker tracker;
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        const OperatingPoint op = sample_operating_point(channel, rng);
        MapPosterior map;
        try {
            map = posterior_map_detail(channel, op.y, GaussianBelief(op.p_hat, op.tau_p));
        } catch (const MapSolveError&) {
            // No interior maximizer (e.g. Poisson y = 0 with p̂ ≤ τ_p).
            ++skipped;
            continue;
        }
        const double direct = neg_derivative_from_curvature(map.f2, op.tau_p);
        const double laplace = neg_derivative_from_variance(map.stats.variance, op.tau_p);
        tracker.update(relative_residual(direct, laplace, kUnitFloor / op.tau_p), describe(op));
    }
    return finalize("laplace_identity/" + channel.family(), samples, seed, kLaplaceThreshold, tracker,
                    skipped);
}

CheckReport check_ep_bridge(const OutputChannel& channel, Mode mode, std::size_t samples,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tracker tracker;
    std::size_t skipped = 0;
    const bool quadrature =
        mode == Mode::SumProduct && !channel.closed_form_mmse(1.0, GaussianBelief(0.0, 1.0));
    for (std::size_t k = 0; k < samples; ++k) {
        const OperatingPoint op = sample_operating_point(channel, rng);
        const GaussianBelief belief(op.p_hat, op.tau_p);
        OutputEstimate direct;
        try {
            direct = g_out(channel, mode, op.y, belief);
        } catch (const MapSolveError&) {
            ++skipped;
            continue;
        }
        const ExtrinsicMessage ext = ep_extrinsic(direct.stats, belief);
        if (ext.degenerate) {
            ++skipped;
            continue;
        }
        const AwgnOutput bridged = awgn_g_out(ext, belief);
        const double rv = relative_residual(bridged.value, direct.value, kUnitFloor / std::sqrt(op.tau_p));
        const double rd = relative_residual(bridged.neg_derivative, direct.neg_derivative, kUnitFloor / op.tau_p);
        tracker.update(std::max(rv, rd), describe(op));
    }
    return finalize("ep_bridge/" + channel.family() + "/" + to_string(mode), samples, seed,
                    quadrature ? kBridgeQuadratureThreshold : kBridgeThreshold, tracker, skipped);
}

// f_out' against the central difference of f_out, f_out'' against the central
// difference of f_out' (a second difference of f_out at h = 1e−5 is dominated
// by round-off). Relative with an absolute floor of 1.
CheckReport check_derivatives(const OutputChannel& channel, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tracker tracker;
    const double h = kDerivativeStep;
    for (std::size_t k = 0; k < samples; ++k) {
        OperatingPoint op = sample_operating_point(channel, rng);
        if (channel.domain() == Domain::Positive && op.z <= 2.0 * h) op.z = 2.0 * h + op.z;
        const double z = op.z;
        const double y = op.y;
        const double fd1 = (channel.log_likelihood(z + h, y) - channel.log_likelihood(z - h, y)) / (2.0 * h);
        const double fd2 = (channel.d1(z + h, y) - channel.d1(z - h, y)) / (2.0 * h);
        const double r1 = relative_residual(channel.d1(z, y), fd1, 1.0);
        const double r2 = relative_residual(channel.d2(z, y), fd2, 1.0);
        std::ostringstream os;
        os.precision(17);
        os << "z=" << z << " y=" << y;
        tracker.update(std::max(r1, r2), os.str());
    }
    return finalize("derivatives/" + channel.family(), samples, seed, kDerivativeThreshold, tracker, 0);
}

CheckReport check_equivalence(const ProblemInstance& problem, Mode mode, const SolverConfig& config,
                              const std::string& name) {
    const SolveResult mono = run_gamp(problem, mode, config);
    const SolveResult modular = run_modular(problem, mode, config);

    CheckReport r;
    r.check = name;
    r.samples = 1;
    r.seed = config.seed;
    r.threshold = kEquivalenceThreshold;
    r.skipped_floored = static_cast<std::size_t>(modular.floor_events);

    std::vector<double> xg, xm;
    for (const auto& s : mono.solution) xg.push_back(s.point);
    for (const auto& s : modular.solution) xm.push_back(s.point);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < xg.size(); ++j) {
        num += (xg[j] - xm[j]) * (xg[j] - xm[j]);
        den += xg[j] * xg[j];
    }
    r.max_rel_residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);

    const std::size_t common = std::min(mono.trace.size(), modular.trace.size());
    double dp = 0.0, dt = 0.0, dz = 0.0;
    for (std::size_t t = 0; t < common; ++t) {
        dp = std::max(dp, max_rel_distance(mono.trace[t].p_hat, modular.trace[t].p_hat));
        dt = std::max(dt, max_rel_distance(mono.trace[t].tau_p, modular.trace[t].tau_p));
        dz = std::max(dz, max_rel_distance(mono.trace[t].z0, modular.trace[t].z0));
    }
    r.diagnostics["per_iteration_p_hat"] = dp;
    r.diagnostics["per_iteration_tau_p"] = dt;
    r.diagnostics["per_iteration_z0"] = dz;
    r.diagnostics["gamp_iterations"] = mono.iterations;
    r.diagnostics["modular_iterations"] = modular.iterations;
    r.diagnostics["gamp_converged"] = mono.converged ? 1.0 : 0.0;
    r.diagnostics["modular_converged"] = modular.converged ? 1.0 : 0.0;

    const bool ran = !mono.diverged && !modular.diverged;
    r.pass = ran && mono.converged && modular.converged && r.max_rel_residual <= r.threshold;
    if (!r.pass) {
        std::string why;
        if (mono.diverged) why += "gamp diverged: " + mono.message + "; ";
        if (modular.diverged) why += "modular diverged: " + modular.message + "; ";
        if (!mono.converged) why += "gamp did not converge; ";
        if (!modular.converged) why += "modular did not converge; ";
        if (why.empty()) why = "fixed points differ";
        r.offending_sample = why;
    }
    return r;
}

std::vector<ChannelPtr> shipped_channels() {
    return {parse_channel("awgn(var=1)"), parse_channel("probit(scale=1)"), parse_channel("poisson()"),
            parse_channel("logistic(scale=1)")};
}

std::vector<EquivalenceCase> equivalence_suite() {
    std::vector<EquivalenceCase> cases;
    const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
    for (const Mode mode : {Mode::SumProduct, Mode::MaxSum}) {
        for (const std::uint64_t seed : seeds) {
            for (const bool poisson : {false, true}) {
                EquivalenceCase c;
                c.mode = mode;
                c.gen.n = 64;
                c.gen.m = 128;
                c.gen.seed = seed;
                if (poisson) {
                    c.gen.channel = "poisson()";
                    c.gen.prior = "gaussian(mean=10,var=4)";
                } else {
                    c.gen.channel = "probit(scale=0.1)";
                    c.gen.prior = mode == Mode::SumProduct ? "bg(rho=0.1,mean=0,var=1)" : "laplace(lambda=1)";
                }
                c.config.max_iter = 500;
                c.config.tol = 1e-11;
                c.config.damping = 1.0;
                c.config.seed = seed;
                c.config.slm_backend = SlmBackend::Amp;
                c.name = "equivalence/" + std::string(poisson ? "poisson" : "probit") + "/" +
                         to_string(mode) + "/seed" + std::to_string(seed);
                cases.push_back(std::move(c));
            }
        }
    }
    return cases;
}

}  // namespace glmamp
