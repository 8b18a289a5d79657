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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkm {

/// Requirement that `qubit` was measured as `bit`.
struct bit_condition {
    std::size_t qubit;
    bool bit;
};

/// Outcome table over basis states of a `width`-qubit register.
///
/// Keys are basis indices with qubit j stored in bit j. `Weight` is an
/// integer count for shot-sampled runs and a probability for exact
/// (analytic) runs. `total()` is the number of shots t, or after
/// post-selection the number kept t'.
template <class Weight>
class basic_histogram {
public:
    using weight_type = Weight;
    using map_type = std::map<std::uint64_t, Weight>;

    basic_histogram() = default;
    explicit basic_histogram(std::size_t width) : width_(width) {}

    std::size_t width() const noexcept { return width_; }
    Weight total() const noexcept { return total_; }
    const map_type& counts() const noexcept { return counts_; }
    bool empty() const noexcept { return counts_.empty(); }

    Weight operator[](std::uint64_t key) const {
        auto it = counts_.find(key);
        return it == counts_.end() ? Weight{} : it->second;
    }

    void add(std::uint64_t key, Weight w) {
        if (width_ < 64 && (key >> width_) != 0)
            throw std::out_of_range("histogram key wider than register");
        if (w == Weight{}) return;
        counts_[key] += w;
        total_ += w;
    }

    friend bool operator==(const basic_histogram&, const basic_histogram&) = default;

private:
    std::size_t width_ = 0;
    map_type counts_;
    Weight total_{};
};

using shot_histogram = basic_histogram<std::uint64_t>;
using distribution = basic_histogram<double>;

/// Keeps the outcomes matching every condition. The result's total is t'.
template <class W>
basic_histogram<W> postselect(const basic_histogram<W>& hist, std::span<const bit_condition> conditions) {
    std::uint64_t mask = 0, value = 0;
    for (const auto& c : conditions) {
        if (c.qubit >= hist.width()) throw std::out_of_range("postselect: qubit out of range");
        const std::uint64_t bit = std::uint64_t{1} << c.qubit;
        if ((mask & bit) && ((value & bit) != 0) != c.bit) return basic_histogram<W>(hist.width());
        mask |= bit;
        if (c.bit) value |= bit;
    }
    basic_histogram<W> out(hist.width());
    for (const auto& [key, w] : hist.counts())
        if ((key & mask) == value) out.add(key, w);
    return out;
}

template <class W>
basic_histogram<W> postselect(const basic_histogram<W>& hist, std::initializer_list<bit_condition> conditions) {
    return postselect(hist, std::span<const bit_condition>(conditions.begin(), conditions.size()));
}

/// Sums over all qubits not listed. Bit i of a result key is the value of
/// `qubits[i]`.
template <class W>
basic_histogram<W> marginal(const basic_histogram<W>& hist, std::span<const std::size_t> qubits) {
    std::uint64_t seen = 0;
    for (auto q : qubits) {
        if (q >= hist.width()) throw std::out_of_range("marginal: qubit out of range");
        if (seen & (std::uint64_t{1} << q)) throw std::invalid_argument("marginal: duplicate qubit index");
        seen |= std::uint64_t{1} << q;
    }
    basic_histogram<W> out(qubits.size());
    for (const auto& [key, w] : hist.counts()) {
        std::uint64_t sub = 0;
        for (std::size_t i = 0; i < qubits.size(); ++i) sub |= ((key >> qubits[i]) & 1U) << i;
        out.add(sub, w);
    }
    return out;
}

template <class W>
basic_histogram<W> marginal(const basic_histogram<W>& hist, std::initializer_list<std::size_t> qubits) {
    return marginal(hist, std::span<const std::size_t>(qubits.begin(), qubits.size()));
}

/// Display form: highest qubit first, so "10" means qubit 1 is set.
inline std::string to_bitstring(std::uint64_t key, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t j = 0; j < width; ++j)
        if ((key >> j) & 1U) s[width - 1 - j] = '1';
    return s;
}

inline std::uint64_t from_bitstring(const std::string& s) {
    std::uint64_t key = 0;
    for (char c : s) {
        if (c != '0' && c != '1') throw std::invalid_argument("from_bitstring: not a bit string: " + s);
        key = (key << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return key;
}

} // namespace qkm
