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
#include "qkmeans/circuit_plan.hpp"
#include "qkmeans/encoding.hpp"

using namespace qkm;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<double> random_unit(std::size_t n, std::mt19937_64& rng) {
    auto v = random_vector(n, rng);
    double s = 0.0;
    for (double x : v) s += x * x;
    for (auto& x : v) x /= std::sqrt(s);
    return v;
}

// Register i in uniform superposition followed by the encoding, on qubits
// (a, i..., r) with a left untouched.
circuit_plan encoding_plan(std::span<const double> angles, std::size_t nq) {
    circuit_plan plan(register_layout::make(nq, 0, 0));
    for (auto q : plan.layout.index) plan.append(gate::h(q));
    encode_vector(plan, angles, {plan.layout.index, plan.layout.reg, {}});
    return plan;
}

} // namespace

TEST(Standardize, TwoValueColumn) {
    const auto z = standardize(matrix{{1.0}, {3.0}});
    EXPECT_DOUBLE_EQ(z.data(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(z.data(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(z.scaling.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(z.scaling.stddev[0], 1.0);
}

TEST(Standardize, ConstantColumnBecomesZeros) {
    const auto z = standardize(matrix{{5.0, 1.0}, {5.0, 2.0}, {5.0, 4.0}});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(z.data(i, 0), 0.0);
    EXPECT_EQ(z.scaling.stddev[0], 0.0);
}

TEST(Standardize, RandomColumnsHaveZeroMeanUnitStd) {
    std::mt19937_64 rng(1);
    matrix x(10, 3);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = 5.0 * static_cast<double>(j) + random_vector(1, rng, 3.0)[0];
    const auto z = standardize(x);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 10; ++i) mean += z.data(i, j);
        mean /= 10;
        for (std::size_t i = 0; i < 10; ++i) var += (z.data(i, j) - mean) * (z.data(i, j) - mean);
        EXPECT_LE(std::abs(mean), 1e-12);
        EXPECT_LE(std::abs(std::sqrt(var / 10) - 1.0), 1e-12);
    }
}

TEST(Standardize, NeedsTwoRecords) { EXPECT_THROW(standardize(matrix{{1.0, 2.0}}), std::invalid_argument); }

TEST(Isp, OriginMapsToSouthPole) {
    const auto p = isp(std::vector<double>{0.0, 0.0});
    EXPECT_EQ(p, (std::vector<double>{0.0, 0.0, -1.0}));
}

TEST(Isp, UnitVectorMapsToEquator) {
    const auto p = isp(std::vector<double>{1.0, 0.0});
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_DOUBLE_EQ(p[2], 0.0);
}

TEST(Isp, ThreeFourExample) {
    const auto p = isp(std::vector<double>{3.0, 4.0});
    EXPECT_NEAR(p[0], 3.0 / 13.0, 1e-15);
    EXPECT_NEAR(p[1], 4.0 / 13.0, 1e-15);
    EXPECT_NEAR(p[2], 12.0 / 13.0, 1e-15);
}

TEST(Isp, UnitNormAndLastCoordinateRange) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 2000; ++t) {
        const auto x = random_vector(1 + t % 10, rng, 0.5 + t % 7);
        const auto p = isp(x);
        double s = 0.0;
        for (double v : p) {
            s += v * v;
            EXPECT_LE(std::abs(v), 1.0);
        }
        EXPECT_NEAR(std::sqrt(s), 1.0, 1e-12);
        EXPECT_GE(p.back(), -1.0);
        EXPECT_LT(p.back(), 1.0);
    }
}

TEST(RecoverDistance, UnitNormsLeaveDistanceUnchanged) {
    EXPECT_DOUBLE_EQ(recover_distance(0.37, 1.0, 1.0), 0.37);
    EXPECT_DOUBLE_EQ(recover_distance(1.9, 1.0, 1.0), 1.9);
}

TEST(RecoverDistance, ThreeFourToOrigin) {
    const std::vector<double> x{3.0, 4.0}, y{0.0, 0.0};
    const double dp = oracle::euclid(isp(x), isp(y));
    EXPECT_NEAR(recover_distance(dp, 5.0, 0.0), 5.0, 1e-9);
}

TEST(RecoverDistance, ZeroStaysZero) { EXPECT_EQ(recover_distance(0.0, 3.0, 2.0), 0.0); }

TEST(RecoverDistance, DomainChecks) {
    EXPECT_THROW(recover_distance(-0.1, 1, 1), std::domain_error);
    EXPECT_THROW(recover_distance(2.1, 1, 1), std::domain_error);
    EXPECT_DOUBLE_EQ(recover_distance(2.0 + 5e-7, 1.0, 1.0), 2.0);
}

TEST(RecoverDistance, RoundTripOnRandomPairs) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5000; ++t) {
        const std::size_t n = 2 + t % 7;
        const auto x = random_vector(n, rng, 1.5), y = random_vector(n, rng, 1.5);
        const double nx = std::sqrt(squared_norm(x)), ny = std::sqrt(squared_norm(y));
        EXPECT_NEAR(recover_distance(oracle::euclid(isp(x), isp(y)), nx, ny), oracle::euclid(x, y), 1e-9);
    }
}

TEST(Widths, PaddedDimensionAndIndexWidth) {
    EXPECT_EQ(padded_dimension(1), 2u);
    EXPECT_EQ(padded_dimension(3), 4u);
    EXPECT_EQ(padded_dimension(4), 4u);
    EXPECT_EQ(padded_dimension(5), 8u);
    EXPECT_EQ(index_width(1), 0u);
    EXPECT_EQ(index_width(2), 1u);
    EXPECT_EQ(index_width(3), 2u);
    EXPECT_EQ(index_width(16), 4u);
    EXPECT_EQ(index_width(150), 8u);
}

TEST(Project, RowsAreUnitAndAnglesMatch) {
    std::mt19937_64 rng(12);
    matrix x(20, 3);
    for (auto& v : x.data()) v = random_vector(1, rng)[0];
    const auto p = project(x);
    EXPECT_EQ(p.projected.cols(), 4u);
    EXPECT_EQ(p.angles.cols(), 4u);
    EXPECT_EQ(p.index_qubits, 2u);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        EXPECT_NEAR(std::sqrt(squared_norm(p.projected.row(i))), 1.0, 1e-12);
        EXPECT_NEAR(p.norms[i], std::sqrt(squared_norm(x.row(i))), 1e-15);
        for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(p.angles(i, j), 2.0 * std::asin(p.projected(i, j)));
    }
}

TEST(Project, PaddingSlotsHaveZeroAngle) {
    const auto p = project(matrix{{0.5, 0.25, 1.0, -1.0}, {0.0, 0.0, 0.0, 0.0}});
    ASSERT_EQ(p.angles.cols(), 8u);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 5; j < 8; ++j) EXPECT_EQ(p.angles(i, j), 0.0);
}

TEST(Prepare, CarriesEveryStage) {
    const matrix raw{{1.0, 10.0}, {3.0, 20.0}, {5.0, 60.0}};
    const auto d = prepare(raw, {"a", "b"});
    EXPECT_EQ(d.raw, raw);
    EXPECT_EQ(d.standardized, standardize(raw).data);
    EXPECT_EQ(d.points.projected.rows(), 3u);
    EXPECT_EQ(d.feature_names.size(), 2u);
}

TEST(EncodeVector, ZeroAnglesAppendNothing) {
    circuit_plan plan(register_layout::make(2, 0, 0));
    encode_vector(plan, std::vector<double>(4, 0.0), {plan.layout.index, plan.layout.reg, {}});
    EXPECT_TRUE(plan.gates.empty());
}

TEST(EncodeVector, AngleCountMustMatchIndexRegister) {
    circuit_plan plan(register_layout::make(2, 0, 0));
    EXPECT_THROW(encode_vector(plan, std::vector<double>(3, 0.1), {plan.layout.index, plan.layout.reg, {}}),
                 std::invalid_argument);
}

TEST(EncodeVector, SingleSlotExample) {
    // (pi, 0) on one index qubit: r = 1 only in branch i = 0, with probability 1/2.
    const std::vector<double> angles{std::numbers::pi, 0.0};
    const auto plan = encoding_plan(angles, 1);
    ASSERT_EQ(plan.gates.size(), 2u);
    const auto s = simulate(plan);
    const std::size_t i = std::size_t{1} << plan.layout.index[0], r = std::size_t{1} << plan.layout.reg;
    EXPECT_NEAR(std::norm(s[r]), 0.5, 1e-15);
    EXPECT_NEAR(std::norm(s[r | i]), 0.0, 1e-15);
}

TEST(EncodeVector, ControlsFollowIndexPatternAndExtras) {
    circuit_plan plan(register_layout::make(2, 0, 0));
    const std::vector<double> angles{0.1, 0.0, 0.3, 0.4};
    encode_vector(plan, angles, {plan.layout.index, plan.layout.reg, {{plan.layout.ancilla, false}}});
    ASSERT_EQ(plan.gates.size(), 3u);
    const auto& g = plan.gates[1]; // slot 2 = binary 10
    EXPECT_EQ(g.target, plan.layout.reg);
    EXPECT_DOUBLE_EQ(g.theta, 0.3);
    ASSERT_EQ(g.controls.size(), 3u);
    EXPECT_EQ(g.controls[0], (control{plan.layout.index[0], false}));
    EXPECT_EQ(g.controls[1], (control{plan.layout.index[1], true}));
    EXPECT_EQ(g.controls[2], (control{plan.layout.ancilla, false}));
}

TEST(EncodeVector, RegisterOneBranchIsProportionalToVector) {
    std::mt19937_64 rng(31);
    for (std::size_t nq = 1; nq <= 4; ++nq) {
        for (int t = 0; t < 20; ++t) {
            const std::size_t padded = std::size_t{1} << nq;
            const auto x = random_unit(padded, rng);
            const auto plan = encoding_plan(encoding_angles(x, padded), nq);
            const auto s = simulate(plan);
            const std::size_t r = std::size_t{1} << plan.layout.reg;
            double p = 0.0;
            std::vector<double> branch(padded);
            for (std::size_t j = 0; j < padded; ++j) {
                std::size_t b = r;
                for (std::size_t k = 0; k < nq; ++k)
                    if ((j >> k) & 1U) b |= std::size_t{1} << plan.layout.index[k];
                branch[j] = s[b].real();
                p += std::norm(s[b]);
            }
            EXPECT_NEAR(p, 1.0 / static_cast<double>(padded), 1e-12);
            for (std::size_t j = 0; j < padded; ++j) EXPECT_NEAR(branch[j] / std::sqrt(p), x[j], 1e-10);
        }
    }
}

TEST(EncodeVector, PostselectionBoundedByInverseDimension) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 50; ++t) {
        const std::size_t nq = 1 + t % 3, padded = std::size_t{1} << nq;
        auto x = random_unit(padded, rng);
        const double shrink = 0.3 + 0.6 * static_cast<double>(t % 5) / 5.0;
        for (auto& v : x) v *= shrink;
        const auto s = simulate(encoding_plan(encoding_angles(x, padded), nq));
        double p = 0.0;
        for (std::size_t b = 0; b < s.dimension(); ++b)
            if (b & (std::size_t{1} << (nq + 1))) p += std::norm(s[b]);
        EXPECT_LT(p, 1.0 / static_cast<double>(padded));
        EXPECT_NEAR(p, shrink * shrink / static_cast<double>(padded), 1e-12);
    }
}
