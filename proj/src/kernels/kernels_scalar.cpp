// SPDX-License-Identifier: Apache-2.0
#include "bugcause/kernels.hpp"

namespace bugcause::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double squared_norm_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

} // namespace

const Ops scalar_ops{dot_scalar, axpy_scalar, scale_scalar, squared_norm_scalar, "scalar"};

double sparse_dot(const std::vector<std::pair<std::uint32_t, double>>& entries,
                  std::span<const double> dense) {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += v * dense[i];
    return s;
}

void sparse_axpy(double a, const std::vector<std::pair<std::uint32_t, double>>& entries,
                 std::span<double> dense) {
    for (const auto& [i, v] : entries) dense[i] += a * v;
}

} // namespace bugcause::kernels
