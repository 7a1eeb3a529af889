#include "faml/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace faml::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i];
    return s;
}

void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot(w + r * cols, x, cols);
}

void matvec_t(const double* w, const double* g, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c)
        out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double gr = g[r];
        const double* wr = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c)
            out[c] += gr * wr[c];
    }
}

void outer_acc(double* w, const double* g, const double* x, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double gr = g[r];
        double* wr = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c)
            wr[c] += gr * x[c];
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= a;
}

void relu(const double* z, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_backward(const double* z, const double* da, double* dz, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dz[i] = z[i] > 0.0 ? da[i] : 0.0;
}

void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps, double weight_decay,
               double c1, double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i] + weight_decay * p[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace scalar

static const Ops kScalarOps = {
    "scalar",
    scalar::dot, scalar::sum,
    scalar::matvec, scalar::matvec_t, scalar::outer_acc,
    scalar::axpy, scalar::scale,
    scalar::relu, scalar::relu_backward,
    scalar::adam_step,
};

#if defined(__x86_64__) || defined(_M_X64)
extern const Ops kAvx2Ops; // kernels_avx2.cpp

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool avx2_supported() { return false; }
#endif

const Ops& table(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return kScalarOps;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2_supported())
            return kAvx2Ops;
#endif
        throw std::runtime_error("AVX2 kernels requested but not supported on this CPU");
    case Backend::Auto:
    default:
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2_supported())
            return kAvx2Ops;
#endif
        return kScalarOps;
    }
}

namespace {

const Ops* initial_table() {
    const char* env = std::getenv("FAML_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0)
            return &table(Backend::Scalar);
        if (std::strcmp(env, "avx2") == 0)
            return &table(Backend::Avx2);
    }
    return &table(Backend::Auto);
}

const Ops*& active_ptr() {
    static const Ops* ptr = initial_table();
    return ptr;
}

} // namespace

const Ops& active() { return *active_ptr(); }

void set_backend(Backend b) { active_ptr() = &table(b); }

std::string active_name() { return active().name; }

} // namespace faml::kernels
