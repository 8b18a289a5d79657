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
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <span>
#include <stdexcept>
#include <vector>

#include "matrix.hpp"

namespace qkm {

struct metrics_report {
    std::size_t n_ite = 0;
    double avg_similarity = 100.0; // percent
    double sse = 0.0;
    double silhouette = 0.0;
    std::optional<double> v_measure; // needs ground truth
};

/// Sum of squared distances from each record to its assigned centroid.
inline double sse(const matrix& data, std::span<const std::size_t> labels, const matrix& centroids) {
    if (labels.size() != data.rows()) throw std::invalid_argument("sse: label count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (labels[i] >= centroids.rows()) throw std::out_of_range("sse: label out of range");
        total += squared_distance(data.row(i), centroids.row(labels[i]));
    }
    return total;
}

/// Mean silhouette coefficient. Members of singleton clusters score 0.
inline double silhouette(const matrix& data, std::span<const std::size_t> labels) {
    const std::size_t m = data.rows();
    if (labels.size() != m) throw std::invalid_argument("silhouette: label count mismatch");
    std::map<std::size_t, std::size_t> remap;
    for (auto l : labels) remap.emplace(l, 0);
    if (remap.size() < 2) throw std::invalid_argument("silhouette: need at least 2 clusters");
    std::size_t next = 0;
    for (auto& [l, dense] : remap) dense = next++;
    std::vector<std::size_t> lab(m), sizes(remap.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        lab[i] = remap[labels[i]];
        ++sizes[lab[i]];
    }
    std::vector<double> sums(remap.size());
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (sizes[lab[i]] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) sums[lab[j]] += euclidean_distance(data.row(i), data.row(j));
        const double a = sums[lab[i]] / static_cast<double>(sizes[lab[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c)
            if (c != lab[i]) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(m);
}

namespace detail {

struct contingency {
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> rows, cols;
    double n = 0.0;
};

inline contingency make_contingency(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("label sequences differ in length");
    contingency c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        c.joint[{a[i], b[i]}] += 1.0;
        c.rows[a[i]] += 1.0;
        c.cols[b[i]] += 1.0;
    }
    c.n = static_cast<double>(a.size());
    return c;
}

inline double entropy(const std::map<std::size_t, double>& counts, double n) {
    double h = 0.0;
    for (const auto& [_, c] : counts) h -= (c / n) * std::log(c / n);
    return h;
}

} // namespace detail

/// V-measure (beta = 1) of a predicted clustering against ground truth.
inline double v_measure(std::span<const std::size_t> labels_true, std::span<const std::size_t> labels_pred) {
    const auto c = detail::make_contingency(labels_true, labels_pred);
    if (c.n == 0.0) return 1.0;
    const double h_class = detail::entropy(c.rows, c.n);
    const double h_clust = detail::entropy(c.cols, c.n);
    double h_class_given_clust = 0.0, h_clust_given_class = 0.0;
    for (const auto& [key, nij] : c.joint) {
        h_class_given_clust -= (nij / c.n) * std::log(nij / c.cols.at(key.second));
        h_clust_given_class -= (nij / c.n) * std::log(nij / c.rows.at(key.first));
    }
    const double homogeneity = h_class == 0.0 ? 1.0 : 1.0 - h_class_given_clust / h_class;
    const double completeness = h_clust == 0.0 ? 1.0 : 1.0 - h_clust_given_class / h_clust;
    if (homogeneity + completeness == 0.0) return 0.0;
    return std::clamp(2.0 * homogeneity * completeness / (homogeneity + completeness), 0.0, 1.0);
}

/// Pair-counting comparison; percentages of all unordered record pairs.
struct pair_confusion_t {
    double tp = 0.0; // together in both
    double fp = 0.0; // together in the reference only
    double fn = 0.0; // together in the candidate only
    double tn = 0.0; // apart in both
};

/// `reference` plays the ground-truth role. Counts pairs from the
/// contingency table instead of enumerating all M(M-1)/2 pairs.
inline pair_confusion_t pair_confusion(std::span<const std::size_t> reference, std::span<const std::size_t> candidate) {
    const auto c = detail::make_contingency(reference, candidate);
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    const double total = pairs(c.n);
    if (total == 0.0) return {100.0, 0.0, 0.0, 0.0};
    double both = 0.0, ref = 0.0, cand = 0.0;
    for (const auto& [_, v] : c.joint) both += pairs(v);
    for (const auto& [_, v] : c.rows) ref += pairs(v);
    for (const auto& [_, v] : c.cols) cand += pairs(v);
    pair_confusion_t out;
    out.tp = 100.0 * both / total;
    out.fp = 100.0 * (ref - both) / total;
    out.fn = 100.0 * (cand - both) / total;
    out.tn = 100.0 - out.tp - out.fp - out.fn;
    return out;
}

} // namespace qkm
