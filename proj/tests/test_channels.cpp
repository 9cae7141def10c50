#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glmamp/channels.hpp"
#include "glmamp/special.hpp"
#include "glmamp/spec_parse.hpp"

using namespace glmamp;

TEST(Poisson, ClosedFormDerivatives) {
    const PoissonChannel ch;
    EXPECT_DOUBLE_EQ(ch.d1(2.0, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(ch.d2(2.0, 3.0), -0.75);
    const double h = 1e-5;
    EXPECT_NEAR((ch.log_likelihood(2.0 + h, 3.0) - ch.log_likelihood(2.0 - h, 3.0)) / (2 * h), 0.5, 1e-8);
    EXPECT_EQ(ch.log_likelihood(0.0, 3.0), -INFINITY);
    EXPECT_EQ(ch.domain(), Domain::Positive);
}

TEST(Poisson, Support) {
    const PoissonChannel ch;
    EXPECT_TRUE(ch.in_support(0.0));
    EXPECT_TRUE(ch.in_support(7.0));
    EXPECT_FALSE(ch.in_support(-1.0));
    EXPECT_FALSE(ch.in_support(1.5));
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
        const double y = ch.sample(4.0, rng);
        ASSERT_TRUE(ch.in_support(y));
    }
}

TEST(Probit, MatchesNormalCdf) {
    const ProbitChannel ch(2.0);
    EXPECT_NEAR(ch.log_likelihood(1.0, 1.0), std::log(special::normal_cdf(0.5)), 1e-15);
    EXPECT_NEAR(ch.log_likelihood(1.0, -1.0), std::log(special::normal_cdf(-0.5)), 1e-15);
    EXPECT_FALSE(ch.in_support(0.0));
    // Deep in the tail log Φ stays finite and the score is ≈ −u/s.
    EXPECT_TRUE(std::isfinite(ch.log_likelihood(-80.0, 1.0)));
    EXPECT_NEAR(ch.d1(-80.0, 1.0), 20.0, 0.1);
}

TEST(Special, InverseMillsTail) {
    // φ(x)/Φ(x) ~ −x − 1/x + 2/x³ for x → −∞.
    for (double x : {-10.0, -20.0, -40.0}) {
        const double asym = -x - 1.0 / x + 2.0 / (x * x * x) - 10.0 / std::pow(x, 5);
        EXPECT_NEAR(special::inverse_mills(x), asym, 1e-6 * std::abs(x));
    }
    EXPECT_NEAR(special::inverse_mills(0.0), 2.0 * special::normal_pdf(0.0), 1e-15);
}

TEST(Logistic, Symmetry) {
    const LogisticChannel ch(1.0);
    EXPECT_NEAR(ch.log_likelihood(0.0, 1.0), std::log(0.5), 1e-15);
    EXPECT_NEAR(ch.d1(0.3, 1.0), -ch.d1(-0.3, -1.0), 1e-15);
    EXPECT_NEAR(ch.d2(0.3, 1.0), ch.d2(-0.3, -1.0), 1e-15);
}

TEST(Channels, ConcaveAndFiniteDifferences) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> zs(-4.0, 4.0);
    for (const char* spec : {"awgn(var=0.5)", "probit(scale=0.3)", "poisson()", "logistic(scale=2)"}) {
        const auto ch = parse_channel(spec);
        for (int k = 0; k < 500; ++k) {
            double z = zs(rng);
            if (ch->domain() == Domain::Positive) z = std::abs(z) + 0.1;
            const double y = ch->sample(z, rng);
            ASSERT_LE(ch->d2(z, y), 0.0) << spec;
            const double h = 1e-5;
            const double fd = (ch->log_likelihood(z + h, y) - ch->log_likelihood(z - h, y)) / (2 * h);
            ASSERT_NEAR(ch->d1(z, y), fd, 1e-6 * std::max(1.0, std::abs(fd))) << spec;
        }
    }
}

TEST(Channels, ParameterValidation) {
    EXPECT_THROW(AwgnChannel(0.0), std::invalid_argument);
    EXPECT_THROW(ProbitChannel(-1.0), std::invalid_argument);
    EXPECT_THROW(LogisticChannel(NAN), std::invalid_argument);
}

TEST(Mode, RoundTrip) {
    EXPECT_EQ(parse_mode("mmse"), Mode::SumProduct);
    EXPECT_EQ(parse_mode(to_string(Mode::MaxSum)), Mode::MaxSum);
    EXPECT_THROW(parse_mode("mode"), std::invalid_argument);
}
