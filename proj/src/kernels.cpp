#include "glmamp/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace glmamp::kernels {

namespace {

// y[j0, j1) = A[:, j0:j1]ᵀ s. Rows are swept in order so every y_j sees the
// same addition sequence as a column-at-a-time loop, but memory is read
// contiguously.
void transpose_block(const Matrix& a, const Vector& s, Eigen::Index j0, Eigen::Index j1, Vector& y) {
    const Eigen::Index n = a.cols();
    double* out = y.data() + j0;
    const Eigen::Index width = j1 - j0;
    for (Eigen::Index j = 0; j < width; ++j) out[j] = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double* row = a.data() + i * n + j0;
        const double si = s[i];
        for (Eigen::Index j = 0; j < width; ++j) out[j] += row[j] * si;
    }
}

constexpr Eigen::Index kTransposeBlock = 512;

}  // namespace

namespace serial {

Vector matvec(const Matrix& a, const Vector& x) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double* row = a.data() + i * n;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vector matvec_transpose(const Matrix& a, const Vector& s) {
    Vector y(a.cols());
    transpose_block(a, s, 0, a.cols(), y);
    return y;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace serial

namespace parallel {

Vector matvec(const Matrix& a, const Vector& x) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    Vector y(m);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
        const double* row = a.data() + i * n;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vector matvec_transpose(const Matrix& a, const Vector& s) {
    const Eigen::Index n = a.cols();
    Vector y(n);
    const Eigen::Index blocks = (n + kTransposeBlock - 1) / kTransposeBlock;
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        transpose_block(a, s, b * kTransposeBlock, std::min(n, (b + 1) * kTransposeBlock), y);
    }
    return y;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    bool failed = false;
    const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(static) reduction(|| : failed)
    for (long long i = 0; i < total; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
            failed = true;
        }
    }
    if (!failed) return;
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace parallel

Matrix squared(const Matrix& a) { return a.array().square().matrix(); }

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void configure_threads_from_env() {
    const char* env = std::getenv("GLMAMP_THREADS");
    if (env == nullptr) return;
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || value < 1) return;
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(std::min<long>(value, std::numeric_limits<int>::max())));
#endif
}

}  // namespace glmamp::kernels
