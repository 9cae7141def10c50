#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace glmamp {

/// Value, first and second derivative of a 1-D objective at a point, plus the
/// stationarity residual the caller wants driven below tolerance (usually |g|,
/// but a reparameterized objective may measure it in the original variable).
struct ScalarEval {
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    double residual = 0.0;
};

using ScalarObjective = std::function<ScalarEval(double)>;

struct MaximizeOptions {
    double tolerance = 1e-12;
    int max_iterations = 100;
    int max_bracket_expansions = 200;
};

struct MaximizeResult {
    double argmax = 0.0;
    ScalarEval at;
    int iterations = 0;
};

class MaximizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Safeguarded Newton for a unimodal objective on the real line: Newton steps
/// with backtracking on f, falling back to bisection of a sign bracket of g that
/// is expanded outwards from `start`. Returns a local maximizer; for concave f
/// it is the unique global one.
MaximizeResult maximize_unimodal(const ScalarObjective& objective, double start,
                                 const MaximizeOptions& options = {});

}  // namespace glmamp
