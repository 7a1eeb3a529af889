#pragma once

#include <cstddef>
#include <string>

namespace faml::kernels {

// Data-parallel inner loops used by the network forward/backward passes and
// the optimizer. Every entry has a scalar reference implementation and, on
// x86-64 with AVX2+FMA, a vectorized variant. The active table is chosen once
// at runtime; tests compare the two tables entry by entry.
struct Ops {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);

    // y = W x           (W is rows x cols, row-major)
    void (*matvec)(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
    // out = W^T g
    void (*matvec_t)(const double* w, const double* g, double* out, std::size_t rows, std::size_t cols);
    // W += g x^T        (rank-1 gradient accumulation)
    void (*outer_acc)(double* w, const double* g, const double* x, std::size_t rows, std::size_t cols);

    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);

    void (*relu)(const double* z, double* out, std::size_t n);
    // dz = da where z > 0, else 0 (subgradient at 0 is 0)
    void (*relu_backward)(const double* z, const double* da, double* dz, std::size_t n);

    // Adam with classic L2 (weight decay added to the gradient).
    // c1 = 1 - beta1^t, c2 = 1 - beta2^t are the bias corrections.
    void (*adam_step)(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double weight_decay,
                      double c1, double c2);
};

enum class Backend { Auto, Scalar, Avx2 };

bool avx2_supported();

// Table lookup; Avx2 throws std::runtime_error when the CPU lacks it.
const Ops& table(Backend b);

// Process-wide active table. Auto picks AVX2 when available. The environment
// variable FAML_KERNELS (scalar|avx2|auto) overrides the default at first use.
const Ops& active();
void set_backend(Backend b);
std::string active_name();

} // namespace faml::kernels
