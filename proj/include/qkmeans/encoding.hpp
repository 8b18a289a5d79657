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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit_plan.hpp"
#include "matrix.hpp"

namespace qkm {

struct feature_scaling {
    std::vector<double> mean;
    std::vector<double> stddev; // population std; 0 marks a constant column
};

struct standardized_data {
    matrix data;
    feature_scaling scaling;
};

/// Column-wise z-scores with the population standard deviation. Constant
/// columns become all zeros.
inline standardized_data standardize(const matrix& data) {
    const std::size_t m = data.rows(), n = data.cols();
    if (m < 2) throw std::invalid_argument("standardize: need at least 2 records");
    standardized_data out{matrix(m, n), {std::vector<double>(n), std::vector<double>(n)}};
    for (std::size_t j = 0; j < n; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += data(i, j);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) var += (data(i, j) - mean) * (data(i, j) - mean);
        double sd = std::sqrt(var / static_cast<double>(m));
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) sd = 0.0;
        out.scaling.mean[j] = mean;
        out.scaling.stddev[j] = sd;
        for (std::size_t i = 0; i < m; ++i) out.data(i, j) = sd == 0.0 ? 0.0 : (data(i, j) - mean) / sd;
    }
    return out;
}

/// Inverse stereographic projection R^N -> S^N (squared-norm form).
inline std::vector<double> isp(std::span<const double> x) {
    const double s = squared_norm(x);
    std::vector<double> out(x.size() + 1);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = 2.0 * x[j] / (s + 1.0);
    out.back() = (s - 1.0) / (s + 1.0);
    return out;
}

inline constexpr double distance_slack = 1e-6;

/// Maps a distance between ISP images back to the distance between the
/// original points, given their original norms.
inline double recover_distance(double projected_distance, double norm_x, double norm_y) {
    if (!(projected_distance >= 0.0) || projected_distance > 2.0 + distance_slack)
        throw std::domain_error("recover_distance: projected distance outside [0, 2]");
    if (norm_x < 0.0 || norm_y < 0.0) throw std::domain_error("recover_distance: negative norm");
    const double dp = std::min(projected_distance, 2.0);
    return std::sqrt(0.25 * (norm_x * norm_x + 1.0) * (norm_y * norm_y + 1.0)) * dp;
}

/// Smallest power of two >= n (at least 2, so the index register is never empty).
inline std::size_t padded_dimension(std::size_t n) { return std::max<std::size_t>(2, std::bit_ceil(n)); }

/// ceil(log2(n)) for n >= 1; 0 for n <= 1.
inline std::size_t index_width(std::size_t n) {
    return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

/// RY angles whose |1>_r amplitude equals the vector entry; padding slots get 0.
inline std::vector<double> encoding_angles(std::span<const double> unit, std::size_t padded) {
    if (unit.size() > padded) throw std::invalid_argument("encoding_angles: vector longer than padded size");
    std::vector<double> out(padded, 0.0);
    for (std::size_t j = 0; j < unit.size(); ++j) out[j] = 2.0 * std::asin(std::clamp(unit[j], -1.0, 1.0));
    return out;
}

/// Unit-sphere images of a point set plus what is needed to encode them.
struct projected_points {
    matrix projected;          // M x (N+1), unit rows
    std::vector<double> norms; // ||x|| before projection
    matrix angles;             // M x N', N' = padded_dimension(N+1)
    std::size_t index_qubits = 0;
};

inline projected_points project(const matrix& points) {
    projected_points out;
    const std::size_t padded = padded_dimension(points.cols() + 1);
    out.index_qubits = index_width(padded);
    out.projected = matrix(points.rows(), points.cols() + 1);
    out.angles = matrix(points.rows(), padded);
    out.norms.resize(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto x = points.row(i);
        out.norms[i] = std::sqrt(squared_norm(x));
        const auto p = isp(x);
        std::copy(p.begin(), p.end(), out.projected.row(i).begin());
        const auto a = encoding_angles(p, padded);
        std::copy(a.begin(), a.end(), out.angles.row(i).begin());
    }
    return out;
}

struct prepared_dataset {
    matrix raw;
    matrix standardized;
    feature_scaling scaling;
    projected_points points;
    std::vector<std::string> feature_names;
};

inline prepared_dataset prepare(const matrix& raw, std::vector<std::string> feature_names = {}) {
    auto z = standardize(raw);
    prepared_dataset out;
    out.raw = raw;
    out.points = project(z.data);
    out.standardized = std::move(z.data);
    out.scaling = std::move(z.scaling);
    out.feature_names = std::move(feature_names);
    return out;
}

/// Where an amplitude-encoded vector is written: the index register i, the
/// flip-flop register qubit r, and any extra branch selectors (ancilla,
/// cluster or batch patterns).
struct encoding_context {
    std::vector<std::size_t> index_qubits;
    std::size_t register_qubit = 0;
    std::vector<control> extra_controls;
};

/// Appends the flip-flop QRAM rotations writing `angles` into the branch
/// selected by `ctx.extra_controls`. Expects register i already in uniform
/// superposition.
inline void encode_vector(circuit_plan& plan, std::span<const double> angles, const encoding_context& ctx) {
    const std::size_t slots = std::size_t{1} << ctx.index_qubits.size();
    if (angles.size() != slots)
        throw std::invalid_argument("encode_vector: expected " + std::to_string(slots) + " angles, got " +
                                    std::to_string(angles.size()));
    for (std::size_t j = 0; j < slots; ++j) {
        if (angles[j] == 0.0) continue;
        auto controls = pattern_controls(ctx.index_qubits, j);
        controls.insert(controls.end(), ctx.extra_controls.begin(), ctx.extra_controls.end());
        plan.append(gate::ry(angles[j], ctx.register_qubit, std::move(controls)));
    }
}

} // namespace qkm
