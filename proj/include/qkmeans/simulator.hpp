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
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "histogram.hpp"

namespace qkm {

using amplitude = std::complex<double>;

enum class gate_kind : std::uint8_t { h, x, ry };

/// A control line. polarity == false fires when the qubit is |0>.
struct control {
    std::size_t qubit;
    bool polarity = true;

    friend bool operator==(const control&, const control&) = default;
};

struct gate {
    gate_kind kind = gate_kind::h;
    std::size_t target = 0;
    double theta = 0.0; // radians, RY only
    std::vector<control> controls;

    static gate h(std::size_t target, std::vector<control> controls = {}) {
        return {gate_kind::h, target, 0.0, std::move(controls)};
    }
    static gate x(std::size_t target, std::vector<control> controls = {}) {
        return {gate_kind::x, target, 0.0, std::move(controls)};
    }
    static gate ry(double theta, std::size_t target, std::vector<control> controls = {}) {
        return {gate_kind::ry, target, theta, std::move(controls)};
    }

    /// Throws if any index is >= num_qubits or the gate is malformed.
    void validate(std::size_t num_qubits) const {
        if (target >= num_qubits) throw std::out_of_range("gate: target qubit out of range");
        if (!std::isfinite(theta)) throw std::invalid_argument("gate: non-finite angle");
        std::uint64_t seen = std::uint64_t{1} << target;
        for (const auto& c : controls) {
            if (c.qubit >= num_qubits) throw std::out_of_range("gate: control qubit out of range");
            const std::uint64_t bit = std::uint64_t{1} << c.qubit;
            if (seen & bit) throw std::invalid_argument("gate: control overlaps target or another control");
            seen |= bit;
        }
    }

    /// Every qubit the gate touches (target and controls).
    std::uint64_t qubit_mask() const noexcept {
        std::uint64_t m = std::uint64_t{1} << target;
        for (const auto& c : controls) m |= std::uint64_t{1} << c.qubit;
        return m;
    }

    friend bool operator==(const gate&, const gate&) = default;
};

/// Real 2x2 block {m00, m01, m10, m11} of a gate's target action.
inline std::array<double, 4> gate_block(const gate& g) {
    switch (g.kind) {
    case gate_kind::h: {
        constexpr double s = std::numbers::sqrt2 / 2.0;
        return {s, s, s, -s};
    }
    case gate_kind::x:
        return {0.0, 1.0, 1.0, 0.0};
    case gate_kind::ry: {
        const double c = std::cos(g.theta / 2.0), s = std::sin(g.theta / 2.0);
        return {c, -s, s, c};
    }
    }
    throw std::logic_error("gate_block: unknown kind");
}

/// Dense register of 2^q amplitudes; qubit j is bit j of the basis index.
class state_vector {
public:
    static constexpr std::size_t max_qubits = 26;

    explicit state_vector(std::size_t num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > max_qubits)
            throw std::out_of_range("state_vector: qubit count must be in [1, 26], got " +
                                    std::to_string(num_qubits));
        amplitudes_.assign(std::size_t{1} << num_qubits, amplitude{});
        amplitudes_[0] = 1.0;
    }

    /// Adopts the given amplitudes verbatim (no renormalization).
    static state_vector from_amplitudes(std::vector<amplitude> amps) {
        const auto n = amps.size();
        if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("state_vector: size must be a power of two");
        state_vector s(static_cast<std::size_t>(std::countr_zero(n)));
        s.amplitudes_ = std::move(amps);
        return s;
    }

    std::size_t num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return amplitudes_.size(); }
    std::span<const amplitude> amplitudes() const noexcept { return amplitudes_; }
    amplitude operator[](std::size_t b) const noexcept { return amplitudes_[b]; }

    double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes_) s += std::norm(a);
        return s;
    }

    // The 2x2 block acts on pairs (i0, i0 | target) where i0 has the target bit
    // clear and the control bits equal to the required pattern. Those i0 are
    // enumerated directly as subsets of the free-bit mask, so a gate with c
    // controls touches 2^(q-c-1) pairs instead of scanning the whole vector.
    void apply(const gate& g) {
        g.validate(num_qubits_);
        const auto [m00, m01, m10, m11] = gate_block(g);
        const std::uint64_t tbit = std::uint64_t{1} << g.target;
        std::uint64_t cmask = 0, cval = 0;
        for (const auto& c : g.controls) {
            cmask |= std::uint64_t{1} << c.qubit;
            if (c.polarity) cval |= std::uint64_t{1} << c.qubit;
        }
        const std::uint64_t all = amplitudes_.size() - 1;
        const std::uint64_t free = all & ~(cmask | tbit);
        std::uint64_t s = 0;
        do {
            const std::uint64_t i0 = s | cval;
            const std::uint64_t i1 = i0 | tbit;
            const amplitude a0 = amplitudes_[i0], a1 = amplitudes_[i1];
            amplitudes_[i0] = m00 * a0 + m01 * a1;
            amplitudes_[i1] = m10 * a0 + m11 * a1;
            s = (s - free) & free;
        } while (s != 0);
    }

    template <class Range>
    void apply_all(const Range& gates) {
        for (const auto& g : gates) apply(g);
    }

private:
    std::size_t num_qubits_;
    std::vector<amplitude> amplitudes_;
};

inline state_vector new_state(std::size_t num_qubits) { return state_vector(num_qubits); }

inline state_vector apply_gate(state_vector state, const gate& g) {
    state.apply(g);
    return state;
}

inline std::vector<double> probabilities(const state_vector& state) {
    std::vector<double> p;
    p.reserve(state.dimension());
    for (const auto& a : state.amplitudes()) p.push_back(std::norm(a));
    return p;
}

/// Exact final-state probabilities; the t -> infinity limit of sampling.
struct analytic_mode {
    friend bool operator==(const analytic_mode&, const analytic_mode&) = default;
};

struct sampled_mode {
    std::uint64_t shots = 1024;
    std::uint64_t seed = 0;

    friend bool operator==(const sampled_mode&, const sampled_mode&) = default;
};

using measure_mode = std::variant<analytic_mode, sampled_mode>;

inline distribution measure(const state_vector& state, analytic_mode) {
    distribution out(state.num_qubits());
    const auto amps = state.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) out.add(b, std::norm(amps[b]));
    return out;
}

/// Measures every qubit `shots` times. The histogram is drawn as one
/// multinomial sample (a chain of conditional binomials over basis states),
/// which has the same law as `shots` independent single-shot draws.
inline shot_histogram measure(const state_vector& state, sampled_mode mode) {
    if (mode.shots < 1) throw std::invalid_argument("measure: shots must be >= 1");
    const auto p = probabilities(state);
    std::size_t last = p.size();
    double mass = 0.0;
    for (std::size_t b = 0; b < p.size(); ++b) {
        mass += p[b];
        if (p[b] > 0.0) last = b;
    }
    if (last == p.size()) throw std::invalid_argument("measure: zero state");
    std::mt19937_64 rng(mode.seed);
    shot_histogram out(state.num_qubits());
    std::uint64_t remaining = mode.shots;
    for (std::size_t b = 0; b <= last && remaining > 0; ++b) {
        if (p[b] <= 0.0) continue;
        std::uint64_t c = remaining;
        if (b != last && p[b] < mass) {
            std::binomial_distribution<std::uint64_t> draw(remaining, std::clamp(p[b] / mass, 0.0, 1.0));
            c = draw(rng);
        }
        out.add(b, c);
        remaining -= c;
        mass -= p[b];
    }
    return out;
}

} // namespace qkm
