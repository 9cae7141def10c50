#pragma once

// Numerically stable helpers around the standard normal and logistic functions.

namespace glmamp::special {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
double normal_cdf(double x);
double log_normal_cdf(double x);
/// φ(x)/Φ(x), accurate for large negative x.
double inverse_mills(double x);

/// log σ(u) with σ the logistic function.
double log_sigmoid(double u);
double sigmoid(double u);

}  // namespace glmamp::special
