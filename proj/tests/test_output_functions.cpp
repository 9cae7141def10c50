#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glmamp/output_functions.hpp"
#include "glmamp/quadrature.hpp"
#include "glmamp/special.hpp"
#include "glmamp/spec_parse.hpp"
#include "oracles.hpp"

using namespace glmamp;

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Dense-grid posterior moments: 4096 points over ±12 posterior standard
// deviations around the MAP (Laplace width). When the grid has to be clipped at
// the edge of a positive domain the density does not vanish there, so the
// trapezoid rule needs a much finer grid.
oracle::Moments grid_oracle(const OutputChannel& ch, double y, const GaussianBelief& b) {
    double center = b.mean(), sd = std::sqrt(b.variance());
    try {
        const auto map = posterior_map(ch, y, b);
        center = map.point;
        sd = std::sqrt(map.variance);
    } catch (const MapSolveError&) {
        center = 0.0;
    }
    double lo = center - 12.0 * sd, hi = center + 12.0 * sd;
    int points = 4096;
    if (ch.domain() == Domain::Positive && lo < 0.0) {
        lo = 0.0;
        points = 400001;
    }
    const auto logp = [&](double z) {
        const double d = z - b.mean();
        // At the clipped edge z = 0 use the one-sided limit of the likelihood.
        const double zz = ch.domain() == Domain::Positive ? std::max(z, 1e-300) : z;
        return ch.log_likelihood(zz, y) - 0.5 * d * d / b.variance();
    };
    return oracle::grid_moments(logp, 0.5 * (lo + hi), 0.5 * (hi - lo), points);
}

}  // namespace

TEST(PosteriorMmse, AwgnConjugate) {
    const AwgnChannel ch(1.0);
    const auto s = posterior_mmse(ch, 2.0, {0.0, 1.0});
    EXPECT_NEAR(s.point, 1.0, 1e-15);
    EXPECT_NEAR(s.variance, 0.5, 1e-15);
}

TEST(PosteriorMmse, ProbitAgainstHermiteOracle) {
    const ProbitChannel ch(1.0);
    const auto s = posterior_mmse(ch, 1.0, {0.0, 1.0});
    const auto o = oracle::gh_posterior([](double z) { return std::log(special::normal_cdf(z)); }, 0.0, 1.0, 241);
    EXPECT_NEAR(s.point, o.mean, 1e-10);
    EXPECT_NEAR(s.variance, o.var, 1e-10);
    // Also E[z | z ~ N(0,1), Φ(z)] = 1/(√π) in closed form.
    EXPECT_NEAR(s.point, 1.0 / std::sqrt(M_PI), 1e-14);
}

TEST(PosteriorMmse, QuadraturePathAgreesWithClosedForm) {
    const ProbitChannel ch(0.7);
    for (double p : {-2.0, 0.0, 1.5}) {
        for (double tau : {0.1, 1.0, 8.0}) {
            const GaussianBelief b(p, tau);
            const auto exact = posterior_mmse(ch, -1.0, b);
            const auto quad = posterior_mmse_quadrature(ch, -1.0, b);
            EXPECT_LE(oracle::rel_err(exact.point, quad.point), 1e-9) << p << " " << tau;
            EXPECT_LE(oracle::rel_err(exact.variance, quad.variance), 1e-9) << p << " " << tau;
        }
    }
}

TEST(PosteriorMmse, DenseGridOracleAllChannels) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> pm(-3.0, 3.0), lt(std::log(0.1), std::log(10.0));
    std::normal_distribution<double> nz;
    for (const char* spec : {"awgn(var=0.3)", "probit(scale=1)", "poisson()", "logistic(scale=1)"}) {
        const auto ch = parse_channel(spec);
        for (int k = 0; k < 200; ++k) {
            double p = pm(rng);
            const double tau = std::exp(lt(rng));
            if (ch->domain() == Domain::Positive) p += 8.0;
            const double z = std::max(p + std::sqrt(tau) * nz(rng), 0.05);
            const double y = ch->sample(z, rng);
            const GaussianBelief b(p, tau);
            const auto s = posterior_mmse(*ch, y, b);
            const auto o = grid_oracle(*ch, y, b);
            ASSERT_LE(std::abs(s.point - o.mean), 1e-6 * std::max(std::abs(o.mean), std::sqrt(o.var))) << spec;
            ASSERT_LE(oracle::rel_err(s.variance, o.var), 1e-6) << spec << " p=" << p << " tau=" << tau;
            ASSERT_LE(s.variance, tau * (1.0 + 1e-9)) << spec;
        }
    }
}

TEST(PosteriorMmse, PoissonZeroCountIsTruncatedNormal) {
    const PoissonChannel ch;
    const GaussianBelief b(0.5, 2.0);
    const auto s = posterior_mmse(ch, 0.0, b);
    const auto o = oracle::grid_moments(
        [&](double z) { return z < 0.0 ? -INFINITY : -z - 0.5 * (z - 0.5) * (z - 0.5) / 2.0; }, 8.0, 8.0, 200001);
    EXPECT_NEAR(s.point, o.mean, 1e-8);
    EXPECT_NEAR(s.variance, o.var, 1e-8);
}

TEST(PosteriorMmse, ZeroVarianceLimit) {
    for (const char* spec : {"awgn(var=1)", "probit(scale=1)", "poisson()", "logistic(scale=1)"}) {
        const auto ch = parse_channel(spec);
        const GaussianBelief b(1.3, 1e-12);
        const auto s = posterior_mmse(*ch, 1.0, b);
        EXPECT_NEAR(s.point, 1.3, 1e-10) << spec;
    }
}

TEST(PosteriorMap, PoissonWorkedExample) {
    const PoissonChannel ch;
    const auto d = posterior_map_detail(ch, 3.0, {1.0, 1.0});
    EXPECT_NEAR(d.stats.point, kSqrt3, 1e-14);
    EXPECT_NEAR(d.stats.variance, 0.5, 1e-14);
    EXPECT_NEAR(d.f2, -1.0, 1e-14);
    EXPECT_LE(d.stationarity, 1e-12 * (1.0 + std::abs(ch.d1(1.0, 3.0))));
}

TEST(PosteriorMap, AwgnEqualsMmse) {
    const AwgnChannel ch(0.7);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0), t(0.1, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const GaussianBelief b(u(rng), t(rng));
        const double y = u(rng);
        const auto a = posterior_map(ch, y, b);
        const auto m = posterior_mmse(ch, y, b);
        ASSERT_LE(std::abs(a.point - m.point), 1e-10 * std::max(1.0, std::abs(m.point)));
        ASSERT_LE(oracle::rel_err(a.variance, m.variance), 1e-11);
    }
}

TEST(PosteriorMap, ProbitGridGoldenOracle) {
    const ProbitChannel ch(1.0);
    const auto s = posterior_map(ch, 1.0, {0.0, 1.0});
    const double z = oracle::grid_golden_argmax(
        [](double v) { return std::log(special::normal_cdf(v)) - 0.5 * v * v; }, -5.0, 5.0, 1e-6);
    EXPECT_NEAR(s.point, z, 1e-7);
}

TEST(PosteriorMap, PoissonZeroCountWithoutInteriorMaximizer) {
    // y = 0 and p̂ ≤ τ: F(z) = −z − (z − p̂)²/2τ decreases on z > 0.
    EXPECT_THROW(posterior_map(PoissonChannel(), 0.0, {0.5, 1.0}), MapSolveError);
}

TEST(PosteriorMap, RejectsObservationOutsideSupport) {
    EXPECT_THROW(posterior_map(ProbitChannel(1.0), 0.5, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(posterior_mmse(PoissonChannel(), -1.0, {1.0, 1.0}), std::invalid_argument);
}

TEST(GOut, MaxSumPoissonWorkedExample) {
    const auto g = g_out(PoissonChannel(), Mode::MaxSum, 3.0, {1.0, 1.0});
    EXPECT_NEAR(g.value, kSqrt3 - 1.0, 1e-14);
    EXPECT_NEAR(g.neg_derivative, 0.5, 1e-14);
    EXPECT_NEAR(neg_derivative_from_curvature(-1.0, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(neg_derivative_from_variance(0.5, 1.0), 0.5, 1e-15);
}

TEST(GOut, SumProductAwgn) {
    const auto g = g_out(AwgnChannel(1.0), Mode::SumProduct, 2.0, {0.0, 1.0});
    EXPECT_NEAR(g.value, 1.0, 1e-15);
    EXPECT_NEAR(g.neg_derivative, 0.5, 1e-15);
}

TEST(GOut, ZeroWhenPointEqualsMean) {
    // AWGN with y = p̂ leaves the mean unchanged in both modes.
    for (Mode m : {Mode::SumProduct, Mode::MaxSum}) {
        EXPECT_NEAR(g_out(AwgnChannel(2.0), m, 0.4, {0.4, 3.0}).value, 0.0, 1e-15);
    }
}

TEST(GOut, NegDerivativeBounds) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> pm(-3.0, 3.0), lt(std::log(0.1), std::log(10.0));
    for (const char* spec : {"awgn(var=1)", "probit(scale=1)", "logistic(scale=1)"}) {
        const auto ch = parse_channel(spec);
        for (Mode mode : {Mode::SumProduct, Mode::MaxSum}) {
            for (int k = 0; k < 300; ++k) {
                const GaussianBelief b(pm(rng), std::exp(lt(rng)));
                const double y = ch->sample(pm(rng), rng);
                const auto g = g_out(*ch, mode, y, b);
                const double scaled = g.neg_derivative * b.variance();
                ASSERT_GT(scaled, 0.0) << spec;
                ASSERT_LE(scaled, 1.0 + 1e-12) << spec;
            }
        }
    }
}

TEST(AwgnGOut, Examples) {
    const auto a = awgn_g_out({2.0, 1.0, false}, {0.0, 1.0});
    EXPECT_DOUBLE_EQ(a.value, 1.0);
    EXPECT_DOUBLE_EQ(a.neg_derivative, 0.5);
    const auto b = awgn_g_out({2.0 * kSqrt3 - 1.0, 1.0, false}, {1.0, 1.0});
    EXPECT_NEAR(b.value, kSqrt3 - 1.0, 1e-15);
    EXPECT_NEAR(b.neg_derivative, 0.5, 1e-15);
    EXPECT_EQ(awgn_g_out({0.7, 123.0, false}, {0.7, 2.0}).value, 0.0);
}

TEST(AwgnGOut, MatchesAwgnChannel) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0), v(0.05, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const ExtrinsicMessage e{u(rng), v(rng), false};
        const GaussianBelief b(u(rng), v(rng));
        const auto a = awgn_g_out(e, b);
        for (Mode m : {Mode::SumProduct, Mode::MaxSum}) {
            const auto g = g_out(AwgnChannel(e.pseudo_variance), m, e.pseudo_mean, b);
            ASSERT_LE(relative_residual(a.value, g.value, 1.0 / (e.pseudo_variance + b.variance())), 1e-11);
            ASSERT_LE(relative_residual(a.neg_derivative, g.neg_derivative, 1e-300), 1e-13);
        }
    }
}

TEST(Quadrature, HermiteRuleIntegratesMoments) {
    for (int order : {61, 122, 244, 1025}) {
        const auto& rule = gauss_hermite(order);
        double m0 = 0.0, m2 = 0.0, m4 = 0.0;
        for (int i = 0; i < order; ++i) {
            const double w = std::exp(rule.log_weights[i]);
            const double t = rule.nodes[i];
            m0 += w;
            m2 += w * t * t;
            m4 += w * t * t * t * t;
        }
        EXPECT_NEAR(m0, std::sqrt(M_PI), 1e-13) << order;
        EXPECT_NEAR(m2, std::sqrt(M_PI) / 2.0, 1e-13) << order;
        EXPECT_NEAR(m4, 3.0 * std::sqrt(M_PI) / 4.0, 1e-12) << order;
    }
}

TEST(Quadrature, OuterWeightsMatchNewtonOracle) {
    std::vector<double> x, w;
    oracle::gauss_hermite(201, x, w);
    const auto& rule = gauss_hermite(201);
    // Library nodes are ascending; the oracle's descend.
    for (int i = 0; i < 201; ++i) {
        ASSERT_NEAR(rule.nodes[i], x[200 - i], 1e-12 * std::max(1.0, std::abs(x[i])));
        ASSERT_NEAR(rule.log_weights[i], std::log(w[200 - i]), 1e-9) << i;
    }
}
