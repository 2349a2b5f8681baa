// SPDX-License-Identifier: Apache-2.0
#include "bugcause/kernels.hpp"

namespace bugcause::kernels {

namespace {

const Ops* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_ops;
#endif
    return &scalar_ops;
}

const Ops* g_override = nullptr;

} // namespace

const Ops& active() {
    if (g_override) return *g_override;
    static const Ops* detected = detect();
    return *detected;
}

void set_active_for_testing(const Ops* ops) { g_override = ops; }

} // namespace bugcause::kernels
