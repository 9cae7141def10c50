// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "glmamp/engine.hpp"
#include "glmamp/problem_io.hpp"
#include "glmamp/spec_parse.hpp"
#include "glmamp/trace_io.hpp"
#include "glmamp/verify.hpp"
#include "oracles.hpp"

using namespace glmamp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + what;
    }
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= limit_s) note(o, false, "took " + sci(secs) + " s, limit " + sci(limit_s) + " s");
    if (!o.pass) ++failures;
    std::printf("%s %d %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
}

std::vector<double> points(const SolveResult& r) {
    std::vector<double> out;
    for (const auto& s : r.solution) out.push_back(s.point);
    return out;
}

Outcome laplace_identity() {
    Outcome o;
    double worst = 0.0;
    for (const auto& ch : shipped_channels()) {
        const auto r = check_laplace_identity(*ch, 10000, 1);
        worst = std::max(worst, r.max_rel_residual);
        note(o, r.pass && r.max_rel_residual <= kLaplaceThreshold, ch->spec() + " residual " + sci(r.max_rel_residual));
    }
    if (o.pass) o.detail = "max residual " + sci(worst);
    return o;
}

Outcome ep_bridge() {
    Outcome o;
    double worst = 0.0, worst_floor = 0.0;
    for (const auto& ch : shipped_channels()) {
        for (Mode mode : {Mode::SumProduct, Mode::MaxSum}) {
            const auto r = check_ep_bridge(*ch, mode, 10000, 1);
            const bool closed = mode == Mode::MaxSum || ch->family() == "awgn" || ch->family() == "probit";
            const double limit = closed ? kBridgeThreshold : kBridgeQuadratureThreshold;
            const double floored = static_cast<double>(r.skipped_floored) / 10000.0;
            worst = std::max(worst, r.max_rel_residual);
            worst_floor = std::max(worst_floor, floored);
            const std::string tag = ch->spec() + "/" + to_string(mode);
            note(o, r.pass && r.max_rel_residual <= limit, tag + " residual " + sci(r.max_rel_residual));
            note(o, floored < 0.01, tag + " floored fraction " + sci(floored));
        }
    }
    if (o.pass) o.detail = "max residual " + sci(worst) + ", max floored fraction " + sci(worst_floor);
    return o;
}

Outcome worked_chain() {
    Outcome o;
    const double s3 = std::sqrt(3.0);
    const PoissonChannel ch;
    const GaussianBelief cavity(1.0, 1.0);
    const auto post = posterior_map(ch, 3.0, cavity);
    const auto ext = ep_extrinsic(post, cavity);
    const auto bridged = awgn_g_out(ext, cavity);
    const auto direct = g_out(ch, Mode::MaxSum, 3.0, cavity);
    const auto close = [&](double a, double b, const char* what) {
        note(o, std::abs(a - b) <= 1e-12, std::string(what) + " off by " + sci(std::abs(a - b)));
    };
    close(post.point, s3, "z0");
    close(post.variance, 0.5, "laplace variance");
    close(ext.pseudo_mean, 2.0 * s3 - 1.0, "pseudo mean");
    close(ext.pseudo_variance, 1.0, "pseudo variance");
    close(bridged.value, s3 - 1.0, "awgn g_out");
    close(bridged.neg_derivative, 0.5, "awgn -g_out'");
    close(direct.value, s3 - 1.0, "g_out");
    close(direct.neg_derivative, 0.5, "-g_out'");
    note(o, !ext.degenerate, "extrinsic floored");
    return o;
}

Outcome oracle_equivalences() {
    Outcome o;
    // (a) Gaussian prior + AWGN: both engines reach the LMMSE estimate.
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        GenSpec g;
        g.n = 48;
        g.m = 64;
        g.prior = "gaussian(mean=0.5,var=1)";
        g.channel = "awgn(var=0.1)";
        g.seed = seed;
        const auto p = generate_problem(g);
        const Eigen::MatrixXd a = p.model.a();
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(p.y.data(), p.m());
        const auto ref = oracle::dense_posterior(a, y, Eigen::VectorXd::Constant(p.m(), 0.1),
                                                 Eigen::VectorXd::Constant(p.n(), 0.5),
                                                 Eigen::VectorXd::Constant(p.n(), 1.0));
        auto gc = SolverConfig::gamp_defaults();
        auto mc = SolverConfig::modular_defaults();
        gc.tol = mc.tol = 1e-12;
        gc.max_iter = mc.max_iter = 2000;
        const double eg = oracle::rel_l2(points(run_gamp(p, Mode::SumProduct, gc)), ref.mean);
        const double em = oracle::rel_l2(points(run_modular(p, Mode::SumProduct, mc)), ref.mean);
        note(o, eg <= 1e-6, "lmmse gamp " + sci(eg));
        note(o, em <= 1e-6, "lmmse modular " + sci(em));
    }
    // (b) Laplace prior + AWGN, max-sum: the LASSO solution.
    {
        GenSpec g;
        g.n = 40;
        g.m = 60;
        g.prior = "bg(rho=0.2,mean=0,var=1)";
        g.channel = "awgn(var=0.01)";
        g.seed = 5;
        auto p = generate_problem(g);
        p.prior = parse_prior("laplace(lambda=2)");
        auto c = SolverConfig::gamp_defaults();
        c.tol = 1e-12;
        c.max_iter = 2000;
        const Eigen::MatrixXd a = p.model.a();
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(p.y.data(), p.m());
        const double e = oracle::rel_l2(points(run_gamp(p, Mode::MaxSum, c)), oracle::lasso(a, y, 0.01, 2.0));
        note(o, e <= 1e-5, "lasso " + sci(e));
    }
    // (c) Scalar MMSE against a dense grid.
    {
        std::mt19937_64 rng(21);
        double worst = 0.0;
        for (const auto& ch : shipped_channels()) {
            for (int k = 0; k < 200; ++k) {
                const auto op = sample_operating_point(*ch, rng);
                const GaussianBelief b(op.p_hat, op.tau_p);
                const auto s = posterior_mmse(*ch, op.y, b);
                double center = s.point, sd = std::sqrt(s.variance);
                double lo = center - 12.0 * sd, hi = center + 12.0 * sd;
                int n = 4096;
                if (ch->domain() == Domain::Positive && lo < 0.0) {
                    lo = 0.0;
                    n = 400001;
                }
                const auto logp = [&](double z) {
                    const double zz = ch->domain() == Domain::Positive ? std::max(z, 1e-300) : z;
                    return ch->log_likelihood(zz, op.y) - 0.5 * (z - op.p_hat) * (z - op.p_hat) / op.tau_p;
                };
                const auto ref = oracle::grid_moments(logp, 0.5 * (lo + hi), 0.5 * (hi - lo), n);
                worst = std::max({worst, std::abs(s.point - ref.mean) / std::max(std::abs(ref.mean), std::sqrt(ref.var)),
                                  oracle::rel_err(s.variance, ref.var)});
            }
        }
        note(o, worst <= 1e-6, "posterior_mmse grid " + sci(worst));
    }
    // (d) slm_solve against an explicit dense inverse.
    {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-2.0, 2.0), v(0.2, 3.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % 8);
            std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
            Matrix a(m, n);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
            std::vector<ExtrinsicMessage> pseudo(m);
            std::vector<GaussianBelief> prior;
            Eigen::VectorXd y(m), s2(m), m0(n), v0(n);
            for (int i = 0; i < m; ++i) {
                pseudo[i] = {u(rng), v(rng), false};
                y[i] = pseudo[i].pseudo_mean;
                s2[i] = pseudo[i].pseudo_variance;
            }
            for (int j = 0; j < n; ++j) {
                prior.emplace_back(u(rng), v(rng));
                m0[j] = prior[j].mean();
                v0[j] = prior[j].variance();
            }
            const auto r = slm_solve(LinearModel(a), pseudo, prior);
            const auto ref = oracle::dense_posterior(Eigen::MatrixXd(a), y, s2, m0, v0);
            for (int j = 0; j < n; ++j) {
                worst = std::max({worst, std::abs(r.x_stats[j].point - ref.mean[j]) / std::max(1.0, std::abs(ref.mean[j])),
                                  oracle::rel_err(r.x_stats[j].variance, ref.cov(j, j))});
            }
        }
        note(o, worst <= 1e-10, "slm brute force " + sci(worst));
    }
    return o;
}

Outcome equivalence() {
    Outcome o;
    double worst = 0.0;
    int cases = 0;
    for (const auto& c : equivalence_suite()) {
        const auto r = check_equivalence(generate_problem(c.gen), c.mode, c.config, c.name);
        worst = std::max(worst, r.max_rel_residual);
        ++cases;
        note(o, r.pass && r.max_rel_residual <= kEquivalenceThreshold, c.name + " distance " + sci(r.max_rel_residual));
    }
    if (o.pass) o.detail = std::to_string(cases) + " cases, max distance " + sci(worst);
    return o;
}

Outcome derivatives() {
    Outcome o;
    double worst = 0.0;
    for (const auto& ch : shipped_channels()) {
        const auto r = check_derivatives(*ch, 10000, 1);
        worst = std::max(worst, r.max_rel_residual);
        note(o, r.pass && r.max_rel_residual <= kDerivativeThreshold, ch->spec() + " residual " + sci(r.max_rel_residual));
    }
    if (o.pass) o.detail = "max residual " + sci(worst);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "glmamp_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    GenSpec g;
    g.seed = 7;
    const auto p = generate_problem(g);
    // Same run at two thread counts, each written to its own files.
    const int threads = omp_get_max_threads();
    for (int run = 0; run < 2; ++run) {
        omp_set_num_threads(run == 0 ? 1 : std::max(threads, 4));
        const auto tag = std::to_string(run);
        write_trace_jsonl(dir / ("gamp" + tag + ".jsonl"), run_gamp(p, Mode::SumProduct, SolverConfig::gamp_defaults()).trace);
        write_trace_jsonl(dir / ("modular" + tag + ".jsonl"),
                          run_modular(p, Mode::MaxSum, SolverConfig::modular_defaults()).trace);
        nlohmann::json report = nlohmann::json::array();
        for (const auto& ch : shipped_channels()) report.push_back(to_json(check_ep_bridge(*ch, Mode::SumProduct, 500, 3)));
        write_text_atomic(dir / ("report" + tag + ".json"), report.dump(2) + "\n");
    }
    omp_set_num_threads(threads);
    for (const char* f : {"gamp", "modular", "report"}) {
        const std::string ext = std::string(f) == "report" ? ".json" : ".jsonl";
        const auto a = slurp(dir / (std::string(f) + "0" + ext)), b = slurp(dir / (std::string(f) + "1" + ext));
        note(o, !a.empty() && a == b, std::string(f) + " files differ");
    }
    fs::remove_all(dir);
    return o;
}

}  // namespace

int main() {
    kernels::configure_threads_from_env();
    criterion(1, "laplace identity", 5.0, laplace_identity);
    criterion(2, "ep bridge", 30.0, ep_bridge);
    criterion(3, "worked chain", 1.0, worked_chain);
    criterion(4, "oracle equivalences", 60.0, oracle_equivalences);
    criterion(5, "modular/gamp equivalence", 120.0, equivalence);
    criterion(6, "derivatives", 5.0, derivatives);
    criterion(7, "determinism", 60.0, determinism);
    return failures == 0 ? 0 : 1;
}
