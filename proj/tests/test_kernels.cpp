#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "faml/kernels.hpp"
#include "faml/rng.hpp"

using namespace faml;
using kernels::Backend;
using kernels::Ops;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v)
        x = rng.uniform(lo, hi);
    return v;
}

double rel_diff(double a, double b) {
    const double denom = std::max({std::fabs(a), std::fabs(b), 1e-12});
    return std::fabs(a - b) / denom;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, rel_diff(a[i], b[i]));
    return worst;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar table matches hand-computed results") {
    const Ops& ops = kernels::table(Backend::Scalar);

    SUBCASE("dot and sum") {
        const double a[] = {1.0, 2.0, 3.0};
        const double b[] = {4.0, 5.0, 6.0};
        CHECK(ops.dot(a, b, 3) == doctest::Approx(32.0).epsilon(1e-15));
        CHECK(ops.sum(a, 3) == doctest::Approx(6.0).epsilon(1e-15));
        CHECK(ops.dot(a, b, 0) == 0.0);
    }

    SUBCASE("matvec y = W x") {
        const double w[] = {1, 2, 3, 4, 5, 6}; // 2 x 3
        const double x[] = {1, 0, -1};
        double y[2] = {99, 99};
        ops.matvec(w, x, y, 2, 3);
        CHECK(y[0] == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(y[1] == doctest::Approx(-2.0).epsilon(1e-15));
    }

    SUBCASE("matvec_t out = W^T g") {
        const double w[] = {1, 2, 3, 4, 5, 6};
        const double g[] = {1, 2};
        double out[3];
        ops.matvec_t(w, g, out, 2, 3);
        CHECK(out[0] == doctest::Approx(9.0));
        CHECK(out[1] == doctest::Approx(12.0));
        CHECK(out[2] == doctest::Approx(15.0));
    }

    SUBCASE("outer_acc W += g x^T") {
        double w[6] = {1, 0, 0, 0, 0, 0};
        const double g[] = {1, 2};
        const double x[] = {3, 4, 5};
        ops.outer_acc(w, g, x, 2, 3);
        CHECK(w[0] == doctest::Approx(4.0));  // 1 + 1*3
        CHECK(w[1] == doctest::Approx(4.0));
        CHECK(w[2] == doctest::Approx(5.0));
        CHECK(w[3] == doctest::Approx(6.0));  // 2*3
        CHECK(w[4] == doctest::Approx(8.0));
        CHECK(w[5] == doctest::Approx(10.0));
    }

    SUBCASE("axpy and scale") {
        const double x[] = {1, 2};
        double y[] = {10, 20};
        ops.axpy(2.0, x, y, 2);
        CHECK(y[0] == doctest::Approx(12.0));
        CHECK(y[1] == doctest::Approx(24.0));
        ops.scale(0.5, y, 2);
        CHECK(y[0] == doctest::Approx(6.0));
        CHECK(y[1] == doctest::Approx(12.0));
    }

    SUBCASE("relu forward and backward") {
        const double z[] = {-1.0, 0.0, 2.5};
        double out[3];
        ops.relu(z, out, 3);
        CHECK(out[0] == 0.0);
        CHECK(out[1] == 0.0);
        CHECK(out[2] == 2.5);
        const double da[] = {5, 5, 5};
        double dz[3];
        ops.relu_backward(z, da, dz, 3);
        CHECK(dz[0] == 0.0);
        CHECK(dz[1] == 0.0); // subgradient at 0 is 0
        CHECK(dz[2] == 5.0);
    }

    SUBCASE("adam first step moves by ~lr against the gradient") {
        double p = 0.5, m = 0.0, v = 0.0;
        const double g = 1.0;
        const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
        // t = 1: m_hat = v_hat = g, so the step is lr * g / (|g| + eps)
        ops.adam_step(&p, &g, &m, &v, 1, lr, b1, b2, eps, 0.0, 1.0 - b1, 1.0 - b2);
        CHECK(p == doctest::Approx(0.4).epsilon(1e-7));
        CHECK(m == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(v == doctest::Approx(0.001).epsilon(1e-15));
    }

    SUBCASE("adam weight decay adds wd * p to the gradient") {
        double p = 2.0, m = 0.0, v = 0.0;
        const double g = 0.0;
        // effective gradient = 0 + 0.5 * 2 = 1, so same step as above
        ops.adam_step(&p, &g, &m, &v, 1, 0.1, 0.9, 0.999, 1e-8, 0.5, 0.1, 0.001);
        CHECK(p == doctest::Approx(1.9).epsilon(1e-7));
    }
}

TEST_CASE("avx2 table agrees with the scalar reference") {
    if (!kernels::avx2_supported()) {
        MESSAGE("AVX2 not available on this machine; skipping equivalence checks");
        return;
    }
    const Ops& sc = kernels::table(Backend::Scalar);
    const Ops& vx = kernels::table(Backend::Avx2);
    CHECK(std::string(sc.name) == "scalar");
    CHECK(std::string(vx.name) == "avx2");

    Rng rng(20240915);
    // sizes straddle the vector width so remainders are exercised
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 64u, 129u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        CHECK(rel_diff(sc.dot(a.data(), b.data(), n), vx.dot(a.data(), b.data(), n)) < 1e-12);
        CHECK(rel_diff(sc.sum(a.data(), n), vx.sum(a.data(), n)) < 1e-12);

        auto y1 = a, y2 = a;
        sc.axpy(1.7, b.data(), y1.data(), n);
        vx.axpy(1.7, b.data(), y2.data(), n);
        CHECK(max_rel_diff(y1, y2) < 1e-12);

        sc.scale(-0.3, y1.data(), n);
        vx.scale(-0.3, y2.data(), n);
        CHECK(max_rel_diff(y1, y2) < 1e-12);

        std::vector<double> r1(n), r2(n);
        sc.relu(a.data(), r1.data(), n);
        vx.relu(a.data(), r2.data(), n);
        CHECK(r1 == r2);
        sc.relu_backward(a.data(), b.data(), r1.data(), n);
        vx.relu_backward(a.data(), b.data(), r2.data(), n);
        CHECK(r1 == r2);
    }

    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1},
                              {3, 5}, {4, 8}, {7, 13}, {16, 33}}) {
        const auto w = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto g = random_vec(rng, rows);

        std::vector<double> y1(rows), y2(rows);
        sc.matvec(w.data(), x.data(), y1.data(), rows, cols);
        vx.matvec(w.data(), x.data(), y2.data(), rows, cols);
        CHECK(max_rel_diff(y1, y2) < 1e-12);

        std::vector<double> t1(cols), t2(cols);
        sc.matvec_t(w.data(), g.data(), t1.data(), rows, cols);
        vx.matvec_t(w.data(), g.data(), t2.data(), rows, cols);
        CHECK(max_rel_diff(t1, t2) < 1e-12);

        auto w1 = w, w2 = w;
        sc.outer_acc(w1.data(), g.data(), x.data(), rows, cols);
        vx.outer_acc(w2.data(), g.data(), x.data(), rows, cols);
        CHECK(max_rel_diff(w1, w2) < 1e-12);
    }
}

TEST_CASE("avx2 adam stays within float rounding of scalar over many steps") {
    if (!kernels::avx2_supported())
        return;
    const Ops& sc = kernels::table(Backend::Scalar);
    const Ops& vx = kernels::table(Backend::Avx2);

    Rng rng(7);
    const std::size_t n = 37;
    auto p1 = random_vec(rng, n), m1 = std::vector<double>(n, 0.0), v1 = m1;
    auto p2 = p1, m2 = m1, v2 = v1;
    double b1t = 1.0, b2t = 1.0;
    for (int t = 1; t <= 50; ++t) {
        const auto g = random_vec(rng, n);
        b1t *= 0.9;
        b2t *= 0.999;
        sc.adam_step(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-2, 0.9, 0.999, 1e-8,
                     1e-4, 1.0 - b1t, 1.0 - b2t);
        vx.adam_step(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-2, 0.9, 0.999, 1e-8,
                     1e-4, 1.0 - b1t, 1.0 - b2t);
    }
    CHECK(max_rel_diff(p1, p2) < 1e-10);
}

TEST_CASE("backend selection") {
    const std::string before = kernels::active_name();

    kernels::set_backend(Backend::Scalar);
    CHECK(kernels::active_name() == "scalar");

    if (kernels::avx2_supported()) {
        kernels::set_backend(Backend::Avx2);
        CHECK(kernels::active_name() == "avx2");
        kernels::set_backend(Backend::Auto);
        CHECK(kernels::active_name() == "avx2"); // auto prefers avx2 when present
    } else {
        CHECK_THROWS_AS(kernels::table(Backend::Avx2), std::runtime_error);
        kernels::set_backend(Backend::Auto);
        CHECK(kernels::active_name() == "scalar");
    }

    // restore whatever the process started with
    kernels::set_backend(before == "avx2" ? Backend::Avx2 : Backend::Scalar);
    CHECK(kernels::active_name() == before);
}

} // TEST_SUITE
