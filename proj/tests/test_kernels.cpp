// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bugcause/kernels.hpp"
#include "bugcause/rng.hpp"

using namespace bugcause;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_double() * 2.0 - 1.0;
    return v;
}

bool close_rel(double a, double b, double tol = 1e-12) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

} // namespace

TEST_CASE("scalar reference ops on hand-checked inputs") {
    std::vector<double> x = {1.0, 2.0, 3.0};
    std::vector<double> y = {4.0, -5.0, 6.0};
    CHECK(kernels::scalar_ops.dot(x.data(), y.data(), 3) == doctest::Approx(12.0));
    CHECK(kernels::scalar_ops.squared_norm(x.data(), 3) == doctest::Approx(14.0));

    kernels::scalar_ops.axpy(2.0, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{6.0, -1.0, 12.0});
    kernels::scalar_ops.scale(0.5, y.data(), 3);
    CHECK(y == std::vector<double>{3.0, -0.5, 6.0});
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants agree with scalar reference") {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return;
    Rng rng(7);
    // odd lengths exercise every tail path
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 64u, 1001u}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        CHECK(close_rel(kernels::avx2_ops.dot(x.data(), y.data(), n),
                        kernels::scalar_ops.dot(x.data(), y.data(), n)));
        CHECK(close_rel(kernels::avx2_ops.squared_norm(x.data(), n),
                        kernels::scalar_ops.squared_norm(x.data(), n)));

        auto y1 = y, y2 = y;
        kernels::avx2_ops.axpy(1.7, x.data(), y1.data(), n);
        kernels::scalar_ops.axpy(1.7, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(close_rel(y1[i], y2[i]));

        auto x1 = x, x2 = x;
        kernels::avx2_ops.scale(-0.3, x1.data(), n);
        kernels::scalar_ops.scale(-0.3, x2.data(), n);
        CHECK(x1 == x2); // elementwise multiply is exact
    }
}
#endif

TEST_CASE("runtime dispatch override") {
    kernels::set_active_for_testing(&kernels::scalar_ops);
    CHECK(std::string(kernels::active().name) == "scalar");
    kernels::set_active_for_testing(nullptr);
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        CHECK(std::string(kernels::active().name) == "avx2");
#endif
}

TEST_CASE("sparse helpers agree with dense equivalents") {
    Rng rng(11);
    auto dense = random_vec(rng, 50);
    std::vector<std::pair<std::uint32_t, double>> entries = {
        {3, 1.5}, {10, -2.0}, {49, 0.25}};
    double expected = 1.5 * dense[3] - 2.0 * dense[10] + 0.25 * dense[49];
    CHECK(kernels::sparse_dot(entries, dense) == doctest::Approx(expected));

    auto copy = dense;
    kernels::sparse_axpy(2.0, entries, copy);
    CHECK(copy[3] == doctest::Approx(dense[3] + 3.0));
    CHECK(copy[10] == doctest::Approx(dense[10] - 4.0));
    CHECK(copy[0] == dense[0]);
}
