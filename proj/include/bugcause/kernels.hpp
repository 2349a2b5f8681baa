// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bugcause::kernels {

// Dense inner-loop primitives behind the linear models and the vectorizer.
// Each has a scalar reference implementation and, on x86 with AVX2+FMA, a
// vectorized variant selected once at startup. The two are equivalence-tested
// against each other; reductions may differ by rounding only.

struct Ops {
    double (*dot)(const double* x, const double* y, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);
    double (*squared_norm)(const double* x, std::size_t n);
    const char* name;
};

// Reference implementations, always available.
extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif

// Best implementation for the running CPU.
const Ops& active();

// Force a specific implementation (tests); pass nullptr to restore detection.
void set_active_for_testing(const Ops* ops);

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), y.size());
}
inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }
inline double squared_norm(std::span<const double> x) {
    return active().squared_norm(x.data(), x.size());
}

// Sparse-dense helpers. Gather-dominated, so these stay scalar.
double sparse_dot(const std::vector<std::pair<std::uint32_t, double>>& entries,
                  std::span<const double> dense);
void sparse_axpy(double a, const std::vector<std::pair<std::uint32_t, double>>& entries,
                 std::span<double> dense);

} // namespace bugcause::kernels
