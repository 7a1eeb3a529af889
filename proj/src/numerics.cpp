#include "faml/numerics.hpp"

#include <cmath>

#include "faml/errors.hpp"

namespace faml {

namespace {

void check_domain(double x, const char* fn) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw NumericError(std::string(fn) + ": argument must be positive and finite, got " +
                           std::to_string(x));
}

// Bernoulli numbers B_2..B_14 over their series positions.
constexpr double kDigammaSeries[] = {
    1.0 / 12.0,        // B_2 / 2
    -1.0 / 120.0,      // B_4 / 4
    1.0 / 252.0,       // B_6 / 6
    -1.0 / 240.0,      // B_8 / 8
    1.0 / 132.0,       // B_10 / 10
    -691.0 / 32760.0,  // B_12 / 12
    1.0 / 12.0,        // B_14 / 14
};

constexpr double kTrigammaSeries[] = {
    1.0 / 6.0,        // B_2
    -1.0 / 30.0,      // B_4
    1.0 / 42.0,       // B_6
    -1.0 / 30.0,      // B_8
    5.0 / 66.0,       // B_10
    -691.0 / 2730.0,  // B_12
    7.0 / 6.0,        // B_14
};

} // namespace

double digamma(double x) {
    check_domain(x, "digamma");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x; // psi(x) = psi(x+1) - 1/x
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv;
    double power = inv2;
    for (double coeff : kDigammaSeries) {
        result -= coeff * power;
        power *= inv2;
    }
    return result;
}

double trigamma(double x) {
    check_domain(x, "trigamma");
    double result = 0.0;
    while (x < 10.0) {
        result += 1.0 / (x * x); // psi'(x) = psi'(x+1) + 1/x^2
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += inv + 0.5 * inv2;
    double power = inv * inv2;
    for (double coeff : kTrigammaSeries) {
        result += coeff * power;
        power *= inv2;
    }
    return result;
}

GradCheckReport finite_diff_check(const std::function<double(const Vec&)>& f,
                                  const Vec& analytic_grad, const Vec& point,
                                  double step, double tolerance) {
    require_same_length(analytic_grad.size(), point.size(), "finite_diff_check");
    if (!(step > 0.0))
        throw NumericError("finite_diff_check: step must be positive");

    GradCheckReport report;
    Vec x = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double fp = f(x);
        x[i] = saved - step;
        const double fm = f(x);
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("finite_diff_check: non-finite function value at coordinate " +
                               std::to_string(i));
        const double numeric = (fp - fm) / (2.0 * step);
        const double analytic = analytic_grad[i];
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        const double rel = std::fabs(analytic - numeric) / denom;
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_coordinate = i;
        }
    }
    report.passed = report.max_relative_error <= tolerance;
    return report;
}

} // namespace faml
