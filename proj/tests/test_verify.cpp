#include <gtest/gtest.h>

#include "glmamp/problem_io.hpp"
#include "glmamp/spec_parse.hpp"
#include "glmamp/verify.hpp"

using namespace glmamp;

TEST(Verify, ChecksPassOnEveryChannel) {
    for (const auto& ch : shipped_channels()) {
        const auto lap = check_laplace_identity(*ch, 500, 1);
        EXPECT_TRUE(lap.pass) << ch->spec() << " " << lap.max_rel_residual;
        const auto der = check_derivatives(*ch, 500, 1);
        EXPECT_TRUE(der.pass) << ch->spec() << " " << der.max_rel_residual;
        for (Mode mode : {Mode::SumProduct, Mode::MaxSum}) {
            const auto br = check_ep_bridge(*ch, mode, 500, 1);
            EXPECT_TRUE(br.pass) << ch->spec() << " " << to_string(mode) << " " << br.max_rel_residual;
            EXPECT_LT(static_cast<double>(br.skipped_floored), 0.01 * 500);
        }
    }
}

TEST(Verify, ReportsAreReproducible) {
    const auto ch = parse_channel("logistic(scale=1)");
    const auto a = to_json(check_ep_bridge(*ch, Mode::MaxSum, 300, 5));
    const auto b = to_json(check_ep_bridge(*ch, Mode::MaxSum, 300, 5));
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_EQ(a.at("samples"), 300);
    EXPECT_EQ(a.at("seed"), 5);
}

TEST(Verify, OperatingPointsRespectDomain) {
    std::mt19937_64 rng(3);
    const auto ch = parse_channel("poisson()");
    for (int k = 0; k < 1000; ++k) {
        const auto op = sample_operating_point(*ch, rng);
        ASSERT_GE(op.p_hat, 5.0);
        ASSERT_LE(op.p_hat, 11.0);
        ASSERT_GT(op.z, 0.0);
        ASSERT_TRUE(ch->in_support(op.y));
        ASSERT_GE(op.tau_p, 0.1 * (1 - 1e-12));
        ASSERT_LE(op.tau_p, 10.0 * (1 + 1e-12));
    }
}

TEST(Verify, BernoulliGaussianProbitEquivalence) {
    GenSpec g;
    g.n = 64;
    g.m = 128;
    g.prior = "bg(rho=0.1,mean=0,var=1)";
    g.channel = "probit(scale=1)";
    g.seed = 7;
    const auto p = generate_problem(g);
    const auto suite = equivalence_suite();
    ASSERT_FALSE(suite.empty());
    const auto r = check_equivalence(p, Mode::SumProduct, suite.front().config);
    EXPECT_TRUE(r.pass) << r.max_rel_residual;
    EXPECT_LE(r.max_rel_residual, kEquivalenceThreshold);
}

TEST(Verify, GaussianAwgnEquivalenceBothModes) {
    GenSpec g;
    g.n = 32;
    g.m = 48;
    g.prior = "gaussian(mean=0,var=1)";
    g.channel = "awgn(var=0.1)";
    g.seed = 2;
    const auto p = generate_problem(g);
    for (Mode mode : {Mode::SumProduct, Mode::MaxSum}) {
        const auto r = check_equivalence(p, mode, equivalence_suite().front().config);
        EXPECT_TRUE(r.pass) << to_string(mode) << " " << r.max_rel_residual;
    }
}

TEST(Verify, SuiteCoversBothModesAndChannels) {
    int sp = 0, ms = 0, probit = 0, poisson = 0;
    for (const auto& c : equivalence_suite()) {
        (c.mode == Mode::SumProduct ? sp : ms)++;
        probit += c.gen.channel.rfind("probit", 0) == 0;
        poisson += c.gen.channel.rfind("poisson", 0) == 0;
    }
    EXPECT_EQ(sp, ms);
    EXPECT_GE(probit, 10);
    EXPECT_GE(poisson, 10);
}
