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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit_plan.hpp"
#include "encoding.hpp"
#include "histogram.hpp"
#include "matrix.hpp"

// Builders and decoders for the three cluster-assignment circuits:
//
//   qc1  one record vs one centroid   (distance estimate from the ancilla)
//   qc2  one record vs k centroids    (label read from the kappa register)
//   qc3  M1 records vs k centroids    (labels read from the (m, kappa) registers)
//
// All three put the record(s) in the a=0 branch and the centroid(s) in the
// a=1 branch of an ancilla, then interfere the branches with a final H. A
// polarity-0 control on a stands in for the X-conjugated control, so the
// plans carry no X gates.

namespace qkm {

namespace detail {

inline void check_angles(std::span<const double> angles, std::size_t index_qubits, const char* what) {
    if (angles.size() != (std::size_t{1} << index_qubits))
        throw std::invalid_argument(std::string(what) + ": angle count " + std::to_string(angles.size()) +
                                    " does not match 2^" + std::to_string(index_qubits));
}

inline void hadamard_all(circuit_plan& plan, std::span<const std::size_t> qubits) {
    for (auto q : qubits) plan.append(gate::h(q));
}

inline encoding_context context_for(const register_layout& l, std::vector<control> extra) {
    return {l.index, l.reg, std::move(extra)};
}

} // namespace detail

inline circuit_plan build_qc1(std::span<const double> record_angles, std::span<const double> centroid_angles,
                              std::size_t index_qubits) {
    detail::check_angles(record_angles, index_qubits, "build_qc1");
    detail::check_angles(centroid_angles, index_qubits, "build_qc1");
    circuit_plan plan(register_layout::make(index_qubits, 0, 0));
    const auto& l = plan.layout;
    plan.append(gate::h(l.ancilla));
    detail::hadamard_all(plan, l.index);
    encode_vector(plan, record_angles, detail::context_for(l, {{l.ancilla, false}}));
    encode_vector(plan, centroid_angles, detail::context_for(l, {{l.ancilla, true}}));
    plan.append(gate::h(l.ancilla));
    return plan;
}

template <class W>
struct distance_estimate {
    double distance; // in projected (unit-sphere) space
    W kept;          // t', shots surviving r = 1
};

/// d = sqrt(4 - 4 #(a=0)/t') after post-selecting r = 1. Empty when no shot
/// survives the post-selection.
template <class W>
std::optional<distance_estimate<W>> estimate_distance(const basic_histogram<W>& hist, const register_layout& l) {
    const auto kept = postselect(hist, {{l.reg, true}});
    if (kept.total() == W{}) return std::nullopt;
    const auto anc = marginal(kept, {l.ancilla});
    const double p0 = static_cast<double>(anc[0]) / static_cast<double>(kept.total());
    return distance_estimate<W>{std::sqrt(std::max(0.0, 4.0 - 4.0 * p0)), kept.total()};
}

inline circuit_plan build_qc2(std::span<const double> record_angles, const matrix& centroid_angles,
                              std::size_t index_qubits, std::size_t cluster_qubits) {
    detail::check_angles(record_angles, index_qubits, "build_qc2");
    const std::size_t k = centroid_angles.rows();
    if (k < 1 || k > (std::size_t{1} << cluster_qubits))
        throw std::invalid_argument("build_qc2: k = " + std::to_string(k) + " does not fit in " +
                                    std::to_string(cluster_qubits) + " cluster qubits");
    circuit_plan plan(register_layout::make(index_qubits, 0, cluster_qubits));
    const auto& l = plan.layout;
    plan.append(gate::h(l.ancilla));
    detail::hadamard_all(plan, l.index);
    detail::hadamard_all(plan, l.cluster);
    encode_vector(plan, record_angles, detail::context_for(l, {{l.ancilla, false}}));
    for (std::size_t j = 0; j < k; ++j) {
        detail::check_angles(centroid_angles.row(j), index_qubits, "build_qc2");
        auto extra = pattern_controls(l.cluster, j);
        extra.insert(extra.begin(), control{l.ancilla, true});
        encode_vector(plan, centroid_angles.row(j), detail::context_for(l, std::move(extra)));
    }
    plan.append(gate::h(l.ancilla));
    return plan;
}

inline circuit_plan build_qc3(const matrix& record_angles, const matrix& centroid_angles, std::size_t index_qubits,
                              std::size_t batch_qubits, std::size_t cluster_qubits) {
    const std::size_t batch = record_angles.rows();
    const std::size_t k = centroid_angles.rows();
    if (batch < 1 || batch > (std::size_t{1} << batch_qubits))
        throw std::invalid_argument("build_qc3: M1 = " + std::to_string(batch) + " does not fit in " +
                                    std::to_string(batch_qubits) + " batch qubits");
    if (k < 1 || k > (std::size_t{1} << cluster_qubits))
        throw std::invalid_argument("build_qc3: k = " + std::to_string(k) + " does not fit in " +
                                    std::to_string(cluster_qubits) + " cluster qubits");
    circuit_plan plan(register_layout::make(index_qubits, batch_qubits, cluster_qubits));
    const auto& l = plan.layout;
    plan.append(gate::h(l.ancilla));
    detail::hadamard_all(plan, l.index);
    detail::hadamard_all(plan, l.batch);
    detail::hadamard_all(plan, l.cluster);
    for (std::size_t v = 0; v < batch; ++v) {
        detail::check_angles(record_angles.row(v), index_qubits, "build_qc3");
        auto extra = pattern_controls(l.batch, v);
        extra.insert(extra.begin(), control{l.ancilla, false});
        encode_vector(plan, record_angles.row(v), detail::context_for(l, std::move(extra)));
    }
    for (std::size_t j = 0; j < k; ++j) {
        detail::check_angles(centroid_angles.row(j), index_qubits, "build_qc3");
        auto extra = pattern_controls(l.cluster, j);
        extra.insert(extra.begin(), control{l.ancilla, true});
        encode_vector(plan, centroid_angles.row(j), detail::context_for(l, std::move(extra)));
    }
    plan.append(gate::h(l.ancilla));
    return plan;
}

/// Per-record label counts after post-selecting a = 0, r = 1, with the
/// meaningless (m, kappa) slots removed.
template <class W>
struct assignment_histogram {
    std::vector<std::vector<W>> per_record; // [v][j]
    W kept_shots{};                         // t' after a = 0, r = 1
    double wasted_fraction = 0.0;           // 1 - kept_meaningful / t
};

template <class W>
assignment_histogram<W> tally_assignments(const basic_histogram<W>& hist, const register_layout& l,
                                          std::size_t batch_size, std::size_t k) {
    const auto kept = postselect(hist, {{l.ancilla, false}, {l.reg, true}});
    std::vector<std::size_t> qubits = l.batch;
    qubits.insert(qubits.end(), l.cluster.begin(), l.cluster.end());
    const auto slots = marginal(kept, std::span<const std::size_t>(qubits));
    assignment_histogram<W> out;
    out.per_record.assign(batch_size, std::vector<W>(k, W{}));
    out.kept_shots = kept.total();
    W meaningful{};
    const std::uint64_t batch_mask = (std::uint64_t{1} << l.batch.size()) - 1;
    for (const auto& [key, w] : slots.counts()) {
        const auto v = static_cast<std::size_t>(key & batch_mask);
        const auto j = static_cast<std::size_t>(key >> l.batch.size());
        if (v >= batch_size || j >= k) continue;
        out.per_record[v][j] += w;
        meaningful += w;
    }
    const double total = static_cast<double>(hist.total());
    out.wasted_fraction = total > 0.0 ? 1.0 - static_cast<double>(meaningful) / total : 1.0;
    return out;
}

/// Index of the largest count, lowest index on ties; empty if all are zero.
template <class W>
std::optional<std::size_t> argmax_label(std::span<const W> counts) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] > W{} && (!best || counts[j] > counts[*best])) best = j;
    return best;
}

/// Most frequent cluster label; empty when no meaningful shot was kept.
template <class W>
std::optional<std::size_t> decode_qc2(const basic_histogram<W>& hist, const register_layout& l, std::size_t k) {
    const auto tally = tally_assignments(hist, l, 1, k);
    return argmax_label<W>(tally.per_record[0]);
}

/// Per-slot labels; a slot with no kept shot is returned empty (unassigned).
template <class W>
std::vector<std::optional<std::size_t>> decode_qc3(const basic_histogram<W>& hist, const register_layout& l,
                                                   std::size_t batch_size, std::size_t k) {
    const auto tally = tally_assignments(hist, l, batch_size, k);
    std::vector<std::optional<std::size_t>> labels;
    labels.reserve(batch_size);
    for (const auto& row : tally.per_record) labels.push_back(argmax_label<W>(row));
    return labels;
}

/// Exact P(r = 1) of the plan's final state.
inline double postselection_probability(const circuit_plan& plan) {
    const auto state = simulate(plan);
    const std::uint64_t rbit = std::uint64_t{1} << plan.layout.reg;
    double p = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b)
        if (b & rbit) p += std::norm(amps[b]);
    return p;
}

struct circuit_stats_t {
    std::size_t qubits = 0;
    std::size_t gate_count = 0;
    std::size_t depth = 0;

    friend bool operator==(const circuit_stats_t&, const circuit_stats_t&) = default;
};

/// Depth schedules each gate one layer after the latest gate sharing any of
/// its qubits (target or control).
inline circuit_stats_t circuit_stats(const circuit_plan& plan) {
    std::vector<std::size_t> level(plan.num_qubits, 0);
    std::size_t depth = 0;
    for (const auto& g : plan.gates) {
        std::size_t at = level[g.target];
        for (const auto& c : g.controls) at = std::max(at, level[c.qubit]);
        ++at;
        level[g.target] = at;
        for (const auto& c : g.controls) level[c.qubit] = at;
        depth = std::max(depth, at);
    }
    return {plan.num_qubits, plan.gates.size(), depth};
}

} // namespace qkm
