#if defined(__x86_64__) || defined(_M_X64)

#include "faml/kernels.hpp"

#include <immintrin.h>

// Compiled with -mavx2 -mfma; only reached after the runtime CPU check in
// kernels.cpp.

namespace faml::kernels {

namespace avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i)
        s += a[i];
    return s;
}

void matvec(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot(w + r * cols, x, cols);
}

void matvec_t(const double* w, const double* g, double* out, std::size_t rows, std::size_t cols) {
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
        _mm256_storeu_pd(out + c, _mm256_setzero_pd());
    for (; c < cols; ++c)
        out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const __m256d gr = _mm256_set1_pd(g[r]);
        const double* wr = w + r * cols;
        std::size_t i = 0;
        for (; i + 4 <= cols; i += 4) {
            __m256d o = _mm256_loadu_pd(out + i);
            o = _mm256_fmadd_pd(gr, _mm256_loadu_pd(wr + i), o);
            _mm256_storeu_pd(out + i, o);
        }
        for (; i < cols; ++i)
            out[i] += g[r] * wr[i];
    }
}

void outer_acc(double* w, const double* g, const double* x, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const __m256d gr = _mm256_set1_pd(g[r]);
        double* wr = w + r * cols;
        std::size_t i = 0;
        for (; i + 4 <= cols; i += 4) {
            __m256d acc = _mm256_loadu_pd(wr + i);
            acc = _mm256_fmadd_pd(gr, _mm256_loadu_pd(x + i), acc);
            _mm256_storeu_pd(wr + i, acc);
        }
        for (; i < cols; ++i)
            wr[i] += g[r] * x[i];
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i)
        x[i] *= a;
}

void relu(const double* z, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(z + i), zero));
    for (; i < n; ++i)
        out[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_backward(const double* z, const double* da, double* dz, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dz + i, _mm256_and_pd(mask, _mm256_loadu_pd(da + i)));
    }
    for (; i < n; ++i)
        dz[i] = z[i] > 0.0 ? da[i] : 0.0;
}

void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps, double weight_decay,
               double c1, double c2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d wd = _mm256_set1_pd(weight_decay);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d ic1 = _mm256_set1_pd(1.0 / c1);
    const __m256d ic2 = _mm256_set1_pd(1.0 / c2);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d pv = _mm256_loadu_pd(p + i);
        const __m256d gv = _mm256_fmadd_pd(wd, pv, _mm256_loadu_pd(g + i));
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_fmadd_pd(b1, mv, _mm256_mul_pd(ob1, gv));
        vv = _mm256_fmadd_pd(b2, vv, _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(mv, ic1);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, ic2)), epsv);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(pv, _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom)));
    }
    if (i < n) {
        // scalar tail keeps semantics identical to the reference kernel
        for (; i < n; ++i) {
            const double gi = g[i] + weight_decay * p[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= lr * mhat / (__builtin_sqrt(vhat) + eps);
        }
    }
}

} // namespace avx2

extern const Ops kAvx2Ops = {
    "avx2",
    avx2::dot, avx2::sum,
    avx2::matvec, avx2::matvec_t, avx2::outer_acc,
    avx2::axpy, avx2::scale,
    avx2::relu, avx2::relu_backward,
    avx2::adam_step,
};

} // namespace faml::kernels

#endif // x86-64
