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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuits.hpp"
#include "detail/random.hpp"
#include "encoding.hpp"
#include "matrix.hpp"
#include "simulator.hpp"

namespace qkm {

enum class assignment_strategy { classical, delta, q11, q1k, qmk };

inline const char* to_string(assignment_strategy s) {
    switch (s) {
    case assignment_strategy::classical: return "kmeans";
    case assignment_strategy::delta: return "delta";
    case assignment_strategy::q11: return "q11";
    case assignment_strategy::q1k: return "q1k";
    case assignment_strategy::qmk: return "qmk";
    }
    return "?";
}

inline assignment_strategy parse_strategy(const std::string& s) {
    if (s == "kmeans" || s == "classical") return assignment_strategy::classical;
    if (s == "delta") return assignment_strategy::delta;
    if (s == "q11") return assignment_strategy::q11;
    if (s == "q1k") return assignment_strategy::q1k;
    if (s == "qmk") return assignment_strategy::qmk;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

inline bool is_quantum(assignment_strategy s) {
    return s == assignment_strategy::q11 || s == assignment_strategy::q1k || s == assignment_strategy::qmk;
}

enum class measurement { sampled, analytic };

struct clustering_params {
    std::size_t k = 2;
    std::uint64_t shots_base = 1024;
    std::optional<std::uint64_t> shots; // replaces the per-variant shot rule
    double sc_thresh = 1e-4;
    std::size_t max_ite = 5;
    std::size_t m1 = 0; // qmk batch size; 0 means M
    std::uint64_t seed = 0;
    double delta = 0.0;
    assignment_strategy assignment = assignment_strategy::classical;
    measurement mode = measurement::sampled;
    std::size_t threads = 1;

    std::size_t batch_size(std::size_t m) const noexcept { return m1 == 0 ? m : m1; }

    void validate(std::size_t m) const {
        if (k < 1 || k > m) throw std::invalid_argument("params.k: need 1 <= k <= M");
        if (!(sc_thresh > 0.0)) throw std::invalid_argument("params.sc_thresh: must be > 0");
        if (max_ite < 1) throw std::invalid_argument("params.max_ite: must be >= 1");
        if (!(delta >= 0.0)) throw std::invalid_argument("params.delta: must be >= 0");
        if (shots_base < 1 || (shots && *shots < 1)) throw std::invalid_argument("params.shots: must be >= 1");
        if (assignment == assignment_strategy::qmk && (batch_size(m) < 1 || batch_size(m) > m))
            throw std::invalid_argument("params.m1: need 1 <= M1 <= M");
    }

    /// Shots per circuit: t for q1:1, k*t for q1:k, M1*k*t for qM:k.
    std::uint64_t shots_per_circuit(std::size_t m) const noexcept {
        if (shots) return *shots;
        switch (assignment) {
        case assignment_strategy::q1k: return k * shots_base;
        case assignment_strategy::qmk: return batch_size(m) * k * shots_base;
        default: return shots_base;
        }
    }
};

/// No shot survived post-selection, even after the retry at 4x shots.
class estimation_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t count_distinct_rows(const matrix& data) {
    std::vector<std::size_t> idx(data.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto row_less = [&](std::size_t a, std::size_t b) {
        const auto ra = data.row(a), rb = data.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(idx.begin(), idx.end(), row_less);
    std::size_t distinct = idx.empty() ? 0 : 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (row_less(idx[i - 1], idx[i])) ++distinct;
    return distinct;
}

inline std::size_t nearest(std::span<const double> x, const matrix& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
        const double d = squared_distance(x, centroids.row(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

/// Measures `state` in the requested mode and hands the histogram (counts or
/// exact weights) to `fn`.
template <class Fn>
auto with_measurement(const state_vector& state, measurement mode, std::uint64_t shots, std::uint64_t seed, Fn&& fn) {
    if (mode == measurement::analytic) return fn(measure(state, analytic_mode{}));
    return fn(measure(state, sampled_mode{shots, seed}));
}

/// Runs a decode over a plan, retrying once at 4x shots when nothing is kept.
template <class Decode>
auto decode_with_retry(const circuit_plan& plan, measurement mode, std::uint64_t shots, std::uint64_t seed,
                       Decode&& decode, std::size_t& retries) {
    const auto state = simulate(plan);
    auto result = with_measurement(state, mode, shots, seed, decode);
    if (!result && mode == measurement::sampled) {
        ++retries;
        result = with_measurement(state, mode, 4 * shots, mix64(seed ^ 0x5bd1e995ULL), decode);
    }
    if (!result) throw estimation_failure("post-selection kept no shots after retry at " + std::to_string(4 * shots));
    return *result;
}

} // namespace detail

/// k-Means++ seeding: first centroid uniform, the rest drawn with probability
/// proportional to the squared distance to the nearest chosen centroid.
inline matrix kmeanspp_init(const matrix& data, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("kmeanspp_init: k must be >= 1");
    if (k > detail::count_distinct_rows(data))
        throw std::invalid_argument("kmeanspp_init: k exceeds the number of distinct records");
    std::mt19937_64 rng(seed);
    matrix centroids;
    std::uniform_int_distribution<std::size_t> first(0, data.rows() - 1);
    centroids.append_row(data.row(first(rng)));
    std::vector<double> d2(data.rows(), std::numeric_limits<double>::infinity());
    while (centroids.rows() < k) {
        const auto last = centroids.row(centroids.rows() - 1);
        for (std::size_t i = 0; i < data.rows(); ++i) d2[i] = std::min(d2[i], squared_distance(data.row(i), last));
        std::discrete_distribution<std::size_t> next(d2.begin(), d2.end());
        centroids.append_row(data.row(next(rng)));
    }
    return centroids;
}

/// Nearest centroid by Euclidean distance, lowest index on ties.
inline std::vector<std::size_t> assign_classical(const matrix& data, const matrix& centroids) {
    std::vector<std::size_t> labels(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) labels[i] = detail::nearest(data.row(i), centroids);
    return labels;
}

/// delta-k-Means assignment: a uniform pick among the centroids whose squared
/// distance is within delta of the best one. delta == 0 selects the nearest.
inline std::vector<std::size_t> assign_delta(const matrix& data, const matrix& centroids, double delta,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> labels(data.rows());
    std::vector<std::size_t> candidates;
    std::vector<double> d2(centroids.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const std::size_t best = detail::nearest(data.row(i), centroids);
        if (delta == 0.0) {
            labels[i] = best;
            continue;
        }
        for (std::size_t j = 0; j < centroids.rows(); ++j) d2[j] = squared_distance(data.row(i), centroids.row(j));
        candidates.clear();
        for (std::size_t j = 0; j < centroids.rows(); ++j)
            if (std::abs(d2[best] - d2[j]) <= delta) candidates.push_back(j);
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        labels[i] = candidates[pick(rng)];
    }
    return labels;
}

struct assignment {
    std::vector<std::size_t> labels;
    std::size_t fallbacks = 0; // qM:k slots with no kept shot, labelled classically
    std::size_t retries = 0;   // circuits rerun at 4x shots
};

/// q1:1 assignment: one distance circuit per (record, centroid) pair, each
/// projected-space estimate mapped back to the original space before argmin.
inline assignment assign_q11(const projected_points& records, const projected_points& centroids,
                             const clustering_params& params, std::uint64_t seed) {
    const std::size_t m = records.angles.rows(), k = centroids.angles.rows();
    const std::uint64_t shots = params.shots_per_circuit(m);
    assignment out;
    out.labels.assign(m, 0);
    std::vector<std::size_t> retries(m, 0);
    detail::parallel_for(m, params.threads, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            const auto plan = build_qc1(records.angles.row(i), centroids.angles.row(j), records.index_qubits);
            const double dp = detail::decode_with_retry(
                plan, params.mode, shots, detail::derive_seed(seed, {i, j}),
                [&](const auto& hist) -> std::optional<double> {
                    auto est = estimate_distance(hist, plan.layout);
                    return est ? std::optional<double>(est->distance) : std::nullopt;
                },
                retries[i]);
            const double d = recover_distance(dp, records.norms[i], centroids.norms[j]);
            if (d < best) {
                best = d;
                out.labels[i] = j;
            }
        }
    });
    for (auto r : retries) out.retries += r;
    return out;
}

/// q1:k assignment: one kNN-interference circuit per record over all k centroids.
inline assignment assign_q1k(const projected_points& records, const projected_points& centroids,
                             const clustering_params& params, std::uint64_t seed) {
    const std::size_t m = records.angles.rows(), k = centroids.angles.rows();
    const std::size_t kw = index_width(k);
    const std::uint64_t shots = params.shots_per_circuit(m);
    assignment out;
    out.labels.assign(m, 0);
    std::vector<std::size_t> retries(m, 0);
    detail::parallel_for(m, params.threads, [&](std::size_t i) {
        const auto plan = build_qc2(records.angles.row(i), centroids.angles, records.index_qubits, kw);
        out.labels[i] = detail::decode_with_retry(
            plan, params.mode, shots, detail::derive_seed(seed, {i}),
            [&](const auto& hist) { return decode_qc2(hist, plan.layout, k); }, retries[i]);
    });
    for (auto r : retries) out.retries += r;
    return out;
}

/// qM:k assignment: records split into contiguous batches of M1, one circuit
/// per batch. Slots that keep no shot take the label from `fallback`.
inline assignment assign_qmk(const projected_points& records, const projected_points& centroids,
                             const clustering_params& params, std::uint64_t seed,
                             std::span<const std::size_t> fallback) {
    const std::size_t m = records.angles.rows(), k = centroids.angles.rows();
    const std::size_t batch = params.batch_size(m);
    const std::size_t batches = (m + batch - 1) / batch;
    const std::size_t bw = index_width(batch), kw = index_width(k);
    const std::uint64_t shots = params.shots_per_circuit(m);
    assignment out;
    out.labels.assign(m, 0);
    std::vector<std::size_t> fallbacks(batches, 0);
    detail::parallel_for(batches, params.threads, [&](std::size_t b) {
        const std::size_t begin = b * batch, end = std::min(m, begin + batch);
        matrix angles;
        for (std::size_t i = begin; i < end; ++i) angles.append_row(records.angles.row(i));
        const auto plan = build_qc3(angles, centroids.angles, records.index_qubits, bw, kw);
        const auto state = simulate(plan);
        const auto labels = detail::with_measurement(
            state, params.mode, shots, detail::derive_seed(seed, {b}),
            [&](const auto& hist) { return decode_qc3(hist, plan.layout, end - begin, k); });
        for (std::size_t v = 0; v < labels.size(); ++v) {
            if (labels[v]) {
                out.labels[begin + v] = *labels[v];
            } else {
                out.labels[begin + v] = fallback[begin + v];
                ++fallbacks[b];
            }
        }
    });
    for (auto f : fallbacks) out.fallbacks += f;
    return out;
}

/// Mean of each cluster's members; an empty cluster keeps its old centroid.
inline matrix update_centroids(const matrix& data, std::span<const std::size_t> labels, const matrix& previous) {
    matrix next(previous.rows(), previous.cols());
    std::vector<std::size_t> sizes(previous.rows(), 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto c = next.row(labels[i]);
        const auto x = data.row(i);
        for (std::size_t j = 0; j < c.size(); ++j) c[j] += x[j];
        ++sizes[labels[i]];
    }
    for (std::size_t j = 0; j < next.rows(); ++j) {
        auto c = next.row(j);
        if (sizes[j] == 0) {
            const auto p = previous.row(j);
            std::copy(p.begin(), p.end(), c.begin());
        } else {
            for (auto& v : c) v /= static_cast<double>(sizes[j]);
        }
    }
    return next;
}

inline double similarity_percent(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.empty()) return 100.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return 100.0 * static_cast<double>(same) / static_cast<double>(a.size());
}

struct iteration_record {
    matrix centroids;                // after the update step
    std::vector<std::size_t> labels; // strategy labels
    double similarity = 100.0;       // % agreeing with nearest-centroid labels on the same centroids
    std::size_t fallbacks = 0;
    std::size_t retries = 0;
};

struct clustering_run {
    std::vector<std::size_t> labels;
    matrix centroids;
    std::vector<iteration_record> history;
    std::size_t n_ite = 0;
    bool converged = false;

    double avg_similarity() const {
        if (history.empty()) return 100.0;
        double s = 0.0;
        for (const auto& h : history) s += h.similarity;
        return s / static_cast<double>(history.size());
    }
};

/// k-Means driver with a pluggable assignment step. `data` is the
/// standardized record matrix; quantum strategies ISP-project the records
/// once and the centroids every iteration.
inline clustering_run run(const matrix& data, const clustering_params& params) {
    params.validate(data.rows());
    matrix centroids = kmeanspp_init(data, params.k, detail::derive_seed(params.seed, {0x1417}));
    const bool quantum = is_quantum(params.assignment);
    const projected_points records = quantum ? project(data) : projected_points{};

    clustering_run out;
    for (std::size_t it = 0; it < params.max_ite; ++it) {
        const std::uint64_t step_seed = detail::derive_seed(params.seed, {0xa55, it});
        const auto reference = assign_classical(data, centroids);
        assignment a;
        switch (params.assignment) {
        case assignment_strategy::classical: a.labels = reference; break;
        case assignment_strategy::delta: a.labels = assign_delta(data, centroids, params.delta, step_seed); break;
        case assignment_strategy::q11: a = assign_q11(records, project(centroids), params, step_seed); break;
        case assignment_strategy::q1k: a = assign_q1k(records, project(centroids), params, step_seed); break;
        case assignment_strategy::qmk:
            a = assign_qmk(records, project(centroids), params, step_seed, reference);
            break;
        }
        matrix next = update_centroids(data, a.labels, centroids);
        const double shift = std::sqrt(squared_distance(next.data(), centroids.data()));
        const double scale = std::max(std::sqrt(squared_norm(centroids.data())), 1e-12);
        out.history.push_back({next, a.labels, similarity_percent(a.labels, reference), a.fallbacks, a.retries});
        out.n_ite = it + 1;
        centroids = std::move(next);
        if (shift / scale <= params.sc_thresh) {
            out.converged = true;
            break;
        }
    }
    out.labels = out.history.back().labels;
    out.centroids = centroids;
    return out;
}

} // namespace qkm
