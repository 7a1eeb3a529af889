#pragma once

#include <cstddef>
#include <functional>

#include "faml/matrix.hpp"

namespace faml {

// psi(x) for x > 0. Recurrence shift to x >= 10, then the asymptotic
// Bernoulli series; absolute error well below 1e-10 on [1e-3, 1e6].
double digamma(double x);

// psi'(x) for x > 0, same scheme; relative error below 1e-8 on [1e-3, 1e6].
double trigamma(double x);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_coordinate = 0;
    bool passed = false;
};

// Central-difference check of an analytic gradient evaluated at `point`.
// Relative error denominator is max(|analytic|, |numeric|, 1e-8).
GradCheckReport finite_diff_check(const std::function<double(const Vec&)>& f,
                                  const Vec& analytic_grad, const Vec& point,
                                  double step, double tolerance);

} // namespace faml
