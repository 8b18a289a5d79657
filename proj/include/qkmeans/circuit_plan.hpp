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
#include <cstdint>
#include <span>
#include <vector>

#include "simulator.hpp"

namespace qkm {

/// Qubit assignment of the assignment circuits. Registers are laid out in
/// the order a, i, m, r, kappa; m and kappa may be empty.
struct register_layout {
    std::size_t ancilla = 0;
    std::vector<std::size_t> index;
    std::vector<std::size_t> batch;
    std::size_t reg = 0;
    std::vector<std::size_t> cluster;

    std::size_t num_qubits() const noexcept { return 2 + index.size() + batch.size() + cluster.size(); }

    static register_layout make(std::size_t index_width, std::size_t batch_width, std::size_t cluster_width) {
        register_layout l;
        std::size_t q = 0;
        l.ancilla = q++;
        for (std::size_t j = 0; j < index_width; ++j) l.index.push_back(q++);
        for (std::size_t j = 0; j < batch_width; ++j) l.batch.push_back(q++);
        l.reg = q++;
        for (std::size_t j = 0; j < cluster_width; ++j) l.cluster.push_back(q++);
        return l;
    }

    friend bool operator==(const register_layout&, const register_layout&) = default;
};

struct circuit_plan {
    std::size_t num_qubits = 0;
    register_layout layout;
    std::vector<gate> gates;

    circuit_plan() = default;
    explicit circuit_plan(register_layout l) : num_qubits(l.num_qubits()), layout(std::move(l)) {}

    void append(gate g) {
        g.validate(num_qubits);
        gates.push_back(std::move(g));
    }
};

/// Controls that fire when `qubits` hold `value` (bit i of value on qubits[i]).
inline std::vector<control> pattern_controls(std::span<const std::size_t> qubits, std::uint64_t value) {
    std::vector<control> out;
    out.reserve(qubits.size());
    for (std::size_t i = 0; i < qubits.size(); ++i) out.push_back({qubits[i], ((value >> i) & 1U) != 0});
    return out;
}

inline state_vector simulate(const circuit_plan& plan) {
    state_vector s(plan.num_qubits);
    s.apply_all(plan.gates);
    return s;
}

} // namespace qkm
