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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qkmeans/histogram.hpp"
#include "qkmeans/simulator.hpp"

using namespace qkm;

namespace {

state_vector random_state(std::size_t q, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<amplitude> a(std::size_t{1} << q);
    double s = 0.0;
    for (auto& x : a) {
        x = {g(rng), g(rng)};
        s += std::norm(x);
    }
    for (auto& x : a) x /= std::sqrt(s);
    return state_vector::from_amplitudes(a);
}

gate random_gate(std::size_t q, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, q - 1);
    std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
    gate g;
    g.kind = static_cast<gate_kind>(rng() % 3);
    g.target = pick(rng);
    g.theta = g.kind == gate_kind::ry ? angle(rng) : 0.0;
    for (std::size_t c = 0; c < q; ++c)
        if (c != g.target && rng() % 2) g.controls.push_back({c, rng() % 2 == 1});
    return g;
}

oracle::dense oracle_matrix(std::size_t q, const gate& g) {
    oracle::cplx u[2][2];
    if (g.kind == gate_kind::h) oracle::hadamard(u);
    else if (g.kind == gate_kind::x) oracle::pauli_x(u);
    else oracle::rotation_y(u, g.theta);
    std::vector<oracle::ctrl> cs;
    for (const auto& c : g.controls) cs.push_back({c.qubit, c.polarity});
    return oracle::controlled_unitary(q, u, g.target, cs);
}

shot_histogram make_hist(std::size_t width, std::initializer_list<std::pair<const char*, std::uint64_t>> entries) {
    shot_histogram h(width);
    for (const auto& [bits, n] : entries) h.add(from_bitstring(bits), n);
    return h;
}

} // namespace

TEST(StateVector, FreshStateIsAllZeros) {
    const auto one = new_state(1);
    ASSERT_EQ(one.dimension(), 2u);
    EXPECT_EQ(one[0], amplitude(1.0));
    EXPECT_EQ(one[1], amplitude(0.0));
    const auto two = new_state(2);
    ASSERT_EQ(two.dimension(), 4u);
    EXPECT_EQ(two[0], amplitude(1.0));
    for (std::size_t b = 1; b < 4; ++b) EXPECT_EQ(two[b], amplitude(0.0));
}

TEST(StateVector, RejectsOutOfRangeQubitCounts) {
    EXPECT_THROW(new_state(27), std::out_of_range);
    EXPECT_THROW(new_state(0), std::out_of_range);
    EXPECT_NO_THROW(new_state(state_vector::max_qubits));
}

TEST(StateVector, FromAmplitudesNeedsPowerOfTwo) {
    EXPECT_THROW(state_vector::from_amplitudes({1.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_EQ(state_vector::from_amplitudes({1.0, 0.0, 0.0, 0.0}).num_qubits(), 2u);
}

TEST(ApplyGate, HadamardOnZero) {
    const auto s = apply_gate(new_state(1), gate::h(0));
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[1].real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(ApplyGate, RotationByPiFlipsZeroToOne) {
    const auto s = apply_gate(new_state(1), gate::ry(std::numbers::pi, 0));
    EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
    EXPECT_NEAR(s[1].real(), 1.0, 1e-15);
}

TEST(ApplyGate, RotationSignConvention) {
    const double theta = 0.7;
    const auto s = apply_gate(new_state(1), gate::ry(theta, 0));
    EXPECT_NEAR(s[0].real(), std::cos(theta / 2), 1e-15);
    EXPECT_NEAR(s[1].real(), std::sin(theta / 2), 1e-15);
    // on |1>: -sin|0> + cos|1>
    const auto t = apply_gate(apply_gate(new_state(1), gate::x(0)), gate::ry(theta, 0));
    EXPECT_NEAR(t[0].real(), -std::sin(theta / 2), 1e-15);
    EXPECT_NEAR(t[1].real(), std::cos(theta / 2), 1e-15);
}

TEST(ApplyGate, NegativePolarityControlActsOnlyWhenControlIsZero) {
    const double theta = 1.1;
    const auto g = gate::ry(theta, 0, {{1, false}});
    const auto from00 = apply_gate(new_state(2), g);
    EXPECT_NEAR(from00[0b00].real(), std::cos(theta / 2), 1e-15);
    EXPECT_NEAR(from00[0b01].real(), std::sin(theta / 2), 1e-15);
    EXPECT_NEAR(std::abs(from00[0b10]) + std::abs(from00[0b11]), 0.0, 1e-15);

    const auto from10 = apply_gate(apply_gate(new_state(2), gate::x(1)), g);
    EXPECT_NEAR(from10[0b10].real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(from10[0b00]) + std::abs(from10[0b01]) + std::abs(from10[0b11]), 0.0, 1e-15);
}

TEST(ApplyGate, MatchesDenseMatrixOracleOnRandomCircuits) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t q = 1 + trial % 5;
        auto s = random_state(q, rng);
        std::vector<oracle::cplx> ref(s.amplitudes().begin(), s.amplitudes().end());
        for (int step = 0; step < 6; ++step) {
            const auto g = random_gate(q, rng);
            s.apply(g);
            ref = oracle::apply(oracle_matrix(q, g), ref);
        }
        for (std::size_t b = 0; b < ref.size(); ++b) ASSERT_LT(std::abs(s[b] - ref[b]), 1e-12) << "trial " << trial;
    }
}

TEST(ApplyGate, PreservesNorm) {
    std::mt19937_64 rng(5);
    auto s = new_state(6);
    for (int i = 0; i < 500; ++i) {
        s.apply(random_gate(6, rng));
        ASSERT_NEAR(s.norm_squared(), 1.0, 1e-10);
    }
}

TEST(ApplyGate, ZeroPolarityEqualsXConjugation) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_state(4, rng);
        auto g = random_gate(4, rng);
        if (g.controls.empty()) g.controls.push_back({(g.target + 1) % 4, false});
        g.controls[0].polarity = false;
        auto positive = g;
        positive.controls[0].polarity = true;
        const std::size_t c = g.controls[0].qubit;
        const auto direct = apply_gate(s, g);
        const auto sandwich = apply_gate(apply_gate(apply_gate(s, gate::x(c)), positive), gate::x(c));
        for (std::size_t b = 0; b < 16; ++b) ASSERT_LT(std::abs(direct[b] - sandwich[b]), 1e-12);
    }
}

TEST(ApplyGate, RejectsInvalidGates) {
    auto s = new_state(2);
    EXPECT_THROW(s.apply(gate::h(2)), std::out_of_range);
    EXPECT_THROW(s.apply(gate::h(0, {{3, true}})), std::out_of_range);
    EXPECT_THROW(s.apply(gate::h(0, {{0, true}})), std::invalid_argument);
    EXPECT_THROW(s.apply(gate::h(0, {{1, true}, {1, false}})), std::invalid_argument);
    EXPECT_THROW(s.apply(gate::ry(std::nan(""), 0)), std::invalid_argument);
}

TEST(Probabilities, Examples) {
    const auto plus = probabilities(apply_gate(new_state(1), gate::h(0)));
    EXPECT_NEAR(plus[0], 0.5, 1e-15);
    EXPECT_NEAR(plus[1], 0.5, 1e-15);
    const auto one = probabilities(apply_gate(new_state(1), gate::x(0)));
    EXPECT_EQ(one[0], 0.0);
    EXPECT_EQ(one[1], 1.0);
}

TEST(Probabilities, RandomStateMatchesModuli) {
    std::mt19937_64 rng(3);
    const auto s = random_state(3, rng);
    const auto p = probabilities(s);
    double sum = 0.0;
    for (std::size_t b = 0; b < 8; ++b) {
        const double re = s[b].real(), im = s[b].imag();
        EXPECT_NEAR(p[b], re * re + im * im, 1e-15);
        sum += p[b];
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(Measure, AnalyticGivesExactDistribution) {
    const auto d = measure(apply_gate(new_state(1), gate::h(0)), analytic_mode{});
    EXPECT_NEAR(d[0], 0.5, 1e-15);
    EXPECT_NEAR(d[1], 0.5, 1e-15);
    EXPECT_NEAR(d.total(), 1.0, 1e-15);
}

TEST(Measure, SampledStaysWithinThreeSigma) {
    const auto h = measure(apply_gate(new_state(1), gate::h(0)), sampled_mode{4096, 99});
    EXPECT_EQ(h.total(), 4096u);
    EXPECT_LE(std::abs(static_cast<double>(h[0]) / 4096 - 0.5), 3 * std::sqrt(0.25 / 4096));
}

TEST(Measure, SingleShot) {
    const auto h = measure(apply_gate(new_state(2), gate::h(0)), sampled_mode{1, 7});
    EXPECT_EQ(h.total(), 1u);
    ASSERT_EQ(h.counts().size(), 1u);
    EXPECT_EQ(h.counts().begin()->second, 1u);
}

TEST(Measure, RejectsZeroShots) {
    EXPECT_THROW(measure(new_state(1), sampled_mode{0, 1}), std::invalid_argument);
}

TEST(Measure, DeterministicPerSeed) {
    std::mt19937_64 rng(8);
    const auto s = random_state(4, rng);
    EXPECT_EQ(measure(s, sampled_mode{3000, 42}), measure(s, sampled_mode{3000, 42}));
    EXPECT_NE(measure(s, sampled_mode{3000, 42}), measure(s, sampled_mode{3000, 43}));
}

TEST(Measure, FrequenciesConvergeWithinFourSigma) {
    std::mt19937_64 rng(21);
    constexpr std::uint64_t t = 1 << 16;
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_state(4, rng);
        const auto p = probabilities(s);
        const auto h = measure(s, sampled_mode{t, static_cast<std::uint64_t>(trial)});
        ASSERT_EQ(h.total(), t);
        for (std::size_t b = 0; b < p.size(); ++b) {
            const double sigma = std::sqrt(p[b] * (1 - p[b]) / t);
            EXPECT_LE(std::abs(static_cast<double>(h[b]) / t - p[b]), 4 * sigma + 1e-12) << "outcome " << b;
        }
    }
}

TEST(Measure, NeverSamplesZeroProbabilityOutcomes) {
    auto s = apply_gate(new_state(3), gate::h(1));
    const auto h = measure(s, sampled_mode{10000, 4});
    for (const auto& [key, n] : h.counts()) EXPECT_TRUE(key == 0b000 || key == 0b010) << key;
}

TEST(Postselect, KeepsMatchingOutcomes) {
    const auto h = make_hist(2, {{"00", 10}, {"01", 20}, {"10", 30}, {"11", 40}});
    const auto kept = postselect(h, {{1, true}});
    EXPECT_EQ(kept.total(), 70u);
    EXPECT_EQ(kept[from_bitstring("10")], 30u);
    EXPECT_EQ(kept[from_bitstring("11")], 40u);
    EXPECT_EQ(kept.counts().size(), 2u);
}

TEST(Postselect, EmptySliceHasZeroKept) {
    const auto h = make_hist(2, {{"00", 10}, {"01", 5}});
    const auto kept = postselect(h, {{1, true}});
    EXPECT_TRUE(kept.empty());
    EXPECT_EQ(kept.total(), 0u);
}

TEST(Postselect, SequentialEqualsCombined) {
    std::mt19937_64 rng(2);
    shot_histogram h(4);
    for (std::uint64_t k = 0; k < 16; ++k) h.add(k, rng() % 50);
    EXPECT_EQ(postselect(postselect(h, {{0, false}}), {{1, true}}), postselect(h, {{0, false}, {1, true}}));
}

TEST(Postselect, ContradictoryConditionsKeepNothing) {
    const auto h = make_hist(2, {{"00", 1}, {"01", 2}});
    EXPECT_EQ(postselect(h, {{0, true}, {0, false}}).total(), 0u);
}

TEST(Marginal, SumsOverOtherQubits) {
    const auto h = make_hist(2, {{"00", 1}, {"01", 2}, {"10", 3}, {"11", 4}});
    const auto m = marginal(h, {1});
    EXPECT_EQ(m[0], 3u);
    EXPECT_EQ(m[1], 7u);
    EXPECT_EQ(m.total(), 10u);
}

TEST(Marginal, AllQubitsInOrderIsIdentity) {
    const auto h = make_hist(3, {{"000", 1}, {"101", 2}, {"110", 3}});
    EXPECT_EQ(marginal(h, {0, 1, 2}), h);
}

TEST(Marginal, MatchesGroupByOracle) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        distribution h(6);
        std::map<std::uint64_t, double> raw;
        for (int i = 0; i < 40; ++i) {
            const auto key = rng() % 64;
            const double w = static_cast<double>(rng() % 100 + 1);
            h.add(key, w);
            raw[key] += w;
        }
        std::vector<std::size_t> qs{0, 1, 2, 3, 4, 5};
        std::shuffle(qs.begin(), qs.end(), rng);
        qs.resize(1 + rng() % 5);
        const auto got = marginal(h, std::span<const std::size_t>(qs));
        const auto want = oracle::group_by(raw, qs);
        ASSERT_EQ(got.counts().size(), want.size());
        for (const auto& [k, w] : want) EXPECT_DOUBLE_EQ(got[k], w);
    }
}

TEST(Marginal, RejectsDuplicatesAndBadIndices) {
    const auto h = make_hist(2, {{"01", 1}});
    EXPECT_THROW(marginal(h, {0, 0}), std::invalid_argument);
    EXPECT_THROW(marginal(h, {2}), std::out_of_range);
}

TEST(Bitstring, HighestQubitFirst) {
    EXPECT_EQ(to_bitstring(0b10, 2), "10");
    EXPECT_EQ(to_bitstring(1, 3), "001");
    EXPECT_EQ(from_bitstring("110"), 6u);
    EXPECT_THROW(from_bitstring("12"), std::invalid_argument);
}

TEST(Histogram, RejectsKeysWiderThanRegister) {
    shot_histogram h(2);
    EXPECT_THROW(h.add(4, 1), std::out_of_range);
}
