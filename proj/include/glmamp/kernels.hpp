#pragma once

// Data-parallel kernels shared by the GAMP and SLM steps.
//
// `parallel` is the production path (OpenMP over output entries); `serial` is
// the reference kept for tests and the benchmark. Every output entry is reduced
// by exactly one thread in a fixed order, so both produce bitwise-identical
// results for any thread count.

#include <Eigen/Core>
#include <cstddef>
#include <exception>
#include <functional>

namespace glmamp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace kernels {

namespace serial {

/// y = A x
Vector matvec(const Matrix& a, const Vector& x);
/// y = Aᵀ s
Vector matvec_transpose(const Matrix& a, const Vector& s);
/// Runs body(i) for i in [0, count) in order.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace serial

namespace parallel {

Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transpose(const Matrix& a, const Vector& s);
/// Runs body(i) for i in [0, count) across threads. If any call throws, the
/// exception from the smallest failing index is rethrown after the loop.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace parallel

/// Entry-wise square, computed once per problem for the variance products.
Matrix squared(const Matrix& a);

/// Number of threads the parallel kernels use (honours GLMAMP_THREADS).
int thread_count();
/// Applies GLMAMP_THREADS, if set, as the OpenMP thread cap.
void configure_threads_from_env();

}  // namespace kernels
}  // namespace glmamp
