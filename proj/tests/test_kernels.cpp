#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "glmamp/kernels.hpp"

using namespace glmamp;

namespace {

Matrix random_matrix(int m, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix a(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    }
    return a;
}

}  // namespace

TEST(Kernels, ParallelMatchesSerialBitwise) {
    for (auto [m, n] : {std::pair{1, 1}, std::pair{7, 3}, std::pair{128, 64}, std::pair{300, 511}}) {
        const Matrix a = random_matrix(m, n, static_cast<unsigned>(m * 1000 + n));
        const Vector x = random_matrix(n, 1, 1).col(0);
        const Vector s = random_matrix(m, 1, 2).col(0);
        const Vector y0 = kernels::serial::matvec(a, x), y1 = kernels::parallel::matvec(a, x);
        const Vector t0 = kernels::serial::matvec_transpose(a, s), t1 = kernels::parallel::matvec_transpose(a, s);
        for (int i = 0; i < m; ++i) ASSERT_EQ(y0[i], y1[i]);
        for (int j = 0; j < n; ++j) ASSERT_EQ(t0[j], t1[j]);
        const Vector ref = a * x;
        EXPECT_LE((ref - y0).norm(), 1e-12 * (1.0 + ref.norm()));
    }
}

TEST(Kernels, Squared) {
    Matrix a(2, 2);
    a << 1, -2, 3, -0.5;
    Matrix b = kernels::squared(a);
    EXPECT_EQ(b(0, 1), 4.0);
    EXPECT_EQ(b(1, 1), 0.25);
}

TEST(Kernels, ForEachIndexVisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    kernels::parallel::for_each_index(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
    std::vector<std::size_t> order;
    kernels::serial::for_each_index(5, [&](std::size_t i) { order.push_back(i); });
    EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Kernels, RethrowsSmallestFailingIndex) {
    const auto body = [](std::size_t i) {
        if (i == 37 || i == 90 || i == 512) throw std::runtime_error(std::to_string(i));
    };
    for (int rep = 0; rep < 5; ++rep) {
        try {
            kernels::parallel::for_each_index(600, body);
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "37");
        }
    }
}

TEST(Kernels, ThreadCountPositive) { EXPECT_GE(kernels::thread_count(), 1); }
