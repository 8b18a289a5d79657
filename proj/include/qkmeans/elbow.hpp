// Copyright 2026 The qkmeans Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "clustering.hpp"
#include "detail/random.hpp"
#include "matrix.hpp"
#include "metrics.hpp"

namespace qkm {

struct elbow_point {
    std::size_t k;
    double sse;
};

/// SSE of the best of `restarts` seeded runs for each k in [k_min, k_max].
inline std::vector<elbow_point> elbow(const matrix& data, std::size_t k_min, std::size_t k_max,
                                      const clustering_params& params, std::size_t restarts = 5) {
    if (k_min < 1 || k_min > k_max) throw std::invalid_argument("elbow: need 1 <= k_min <= k_max");
    if (k_max > data.rows()) throw std::invalid_argument("elbow: k_max exceeds M");
    std::vector<elbow_point> out;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < restarts; ++r) {
            auto p = params;
            p.k = k;
            p.seed = detail::derive_seed(params.seed, {k, r});
            const auto result = run(data, p);
            best = std::min(best, sse(data, result.labels, result.centroids));
        }
        out.push_back({k, best});
    }
    return out;
}

} // namespace qkm
