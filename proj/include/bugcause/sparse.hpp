// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bugcause {

// Sparse feature vector: (index, value) pairs with strictly increasing
// indices, no explicit zeros, all indices below `dim`.
struct SparseVector {
    std::uint32_t dim = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    void validate() const {
        std::int64_t prev = -1;
        for (const auto& [i, v] : entries) {
            if (i >= dim) throw std::invalid_argument("sparse index out of range");
            if (static_cast<std::int64_t>(i) <= prev)
                throw std::invalid_argument("sparse indices not strictly increasing");
            if (v == 0.0) throw std::invalid_argument("explicit zero in sparse vector");
            prev = i;
        }
    }

    double l2_norm_squared() const {
        double s = 0.0;
        for (const auto& [i, v] : entries) s += v * v;
        return s;
    }

    bool operator==(const SparseVector&) const = default;
};

} // namespace bugcause
