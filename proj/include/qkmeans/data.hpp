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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "matrix.hpp"

namespace qkm {

struct dataset {
    matrix data;
    std::optional<std::vector<std::size_t>> ground_truth;
    std::string name;
    std::vector<std::string> feature_names;

    std::size_t num_classes() const {
        if (!ground_truth || ground_truth->empty()) return 0;
        return *std::max_element(ground_truth->begin(), ground_truth->end()) + 1;
    }
};

class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t row, std::size_t column)
        : std::runtime_error(what + " at line " + std::to_string(row) + ", column " + std::to_string(column)),
          row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_, column_;
};

/// Isotropic Gaussian clusters; M split as evenly as possible, earlier
/// centers taking the remainder.
inline dataset gen_blobs(std::size_t m, const matrix& centers, double stddev, std::uint64_t seed) {
    if (centers.rows() == 0) throw std::invalid_argument("gen_blobs: no centers");
    if (stddev < 0.0) throw std::invalid_argument("gen_blobs: negative std");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    dataset ds{matrix(m, centers.cols()), std::vector<std::size_t>(m), "blobs", {}};
    const std::size_t c = centers.rows();
    std::size_t i = 0;
    for (std::size_t label = 0; label < c; ++label) {
        const std::size_t count = m / c + (label < m % c ? 1 : 0);
        for (std::size_t n = 0; n < count; ++n, ++i) {
            for (std::size_t j = 0; j < centers.cols(); ++j) ds.data(i, j) = centers(label, j) + stddev * noise(rng);
            (*ds.ground_truth)[i] = label;
        }
    }
    for (std::size_t j = 0; j < centers.cols(); ++j) ds.feature_names.push_back("x" + std::to_string(j));
    return ds;
}

/// Shear applied to the anisotropic blobs: x' = T x.
inline const matrix& aniso_transform() {
    static const matrix t{{0.6, -0.6}, {-0.4, 0.8}};
    return t;
}

inline const matrix& aniso_centers() {
    static const matrix c{{-10.736510, -6.555317}, {-5.507268, 0.106514}, {2.326505, 0.606163}};
    return c;
}

/// Three Gaussian blobs sheared by aniso_transform().
inline dataset gen_aniso(std::size_t m, std::uint64_t seed, double stddev = 1.0,
                         const matrix& centers = aniso_centers()) {
    auto ds = gen_blobs(m, centers, stddev, seed);
    const auto& t = aniso_transform();
    for (std::size_t i = 0; i < ds.data.rows(); ++i) {
        const double x = ds.data(i, 0), y = ds.data(i, 1);
        ds.data(i, 0) = t(0, 0) * x + t(0, 1) * y;
        ds.data(i, 1) = t(1, 0) * x + t(1, 1) * y;
    }
    ds.name = "aniso";
    return ds;
}

/// Two interleaving half circles of radius 1; the second is shifted by
/// (1, 0.5) and flipped. Points are spaced evenly in angle, then jittered.
inline dataset gen_moons(std::size_t m, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const std::size_t outer = m - m / 2, inner = m / 2;
    dataset ds{matrix(m, 2), std::vector<std::size_t>(m), "moon", {"x0", "x1"}};
    auto angle = [](std::size_t n, std::size_t count) {
        return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(n) / static_cast<double>(count - 1);
    };
    for (std::size_t n = 0; n < outer; ++n) {
        const double t = angle(n, outer);
        ds.data(n, 0) = std::cos(t);
        ds.data(n, 1) = std::sin(t);
        (*ds.ground_truth)[n] = 0;
    }
    for (std::size_t n = 0; n < inner; ++n) {
        const double t = angle(n, inner);
        ds.data(outer + n, 0) = 1.0 - std::cos(t);
        ds.data(outer + n, 1) = 0.5 - std::sin(t);
        (*ds.ground_truth)[outer + n] = 1;
    }
    if (noise > 0.0)
        for (auto& v : ds.data.data()) v += noise * jitter(rng);
    return ds;
}

/// Random subset of `count` records without replacement, original order kept.
inline dataset subsample(const dataset& ds, std::size_t count, std::uint64_t seed) {
    if (count >= ds.data.rows()) return ds;
    std::vector<std::size_t> idx(ds.data.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    dataset out{matrix(), std::nullopt, ds.name, ds.feature_names};
    if (ds.ground_truth) out.ground_truth.emplace();
    for (auto i : idx) {
        out.data.append_row(ds.data.row(i));
        if (ds.ground_truth) out.ground_truth->push_back((*ds.ground_truth)[i]);
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace detail

/// Label column selector: by zero-based index or by header name.
using column_ref = std::variant<std::size_t, std::string>;

/// Reads a comma-separated numeric table. Labels, when a column is named,
/// are integer-coded in order of first appearance.
inline dataset load_csv(const std::string& path, bool has_header, std::optional<column_ref> label_column = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    dataset ds;
    ds.name = path;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> width, label_idx;
    std::map<std::string, std::size_t> codes;
    std::vector<double> row;

    auto resolve_label = [&](const std::vector<std::string>& header) {
        if (!label_column) return;
        if (const auto* idx = std::get_if<std::size_t>(&*label_column)) {
            label_idx = *idx;
        } else {
            const auto& name = std::get<std::string>(*label_column);
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw parse_error("load_csv: no column named '" + name + "'", line_no, 0);
            label_idx = static_cast<std::size_t>(it - header.begin());
        }
        if (*label_idx >= header.size()) throw parse_error("load_csv: label column out of range", line_no, *label_idx);
    };

    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (header_pending) {
            header_pending = false;
            width = cells.size();
            resolve_label(cells);
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (!label_idx || c != *label_idx) ds.feature_names.push_back(cells[c]);
            continue;
        }
        if (!width) {
            width = cells.size();
            std::vector<std::string> anon(cells.size());
            for (std::size_t c = 0; c < anon.size(); ++c) anon[c] = "x" + std::to_string(c);
            resolve_label(anon);
            for (std::size_t c = 0; c < anon.size(); ++c)
                if (!label_idx || c != *label_idx) ds.feature_names.push_back(anon[c]);
        }
        if (cells.size() != *width)
            throw parse_error("load_csv: expected " + std::to_string(*width) + " cells, got " +
                                  std::to_string(cells.size()),
                              line_no, cells.size());
        row.clear();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_idx && c == *label_idx) {
                const auto [it, inserted] = codes.emplace(cells[c], codes.size());
                if (!ds.ground_truth) ds.ground_truth.emplace();
                ds.ground_truth->push_back(it->second);
                continue;
            }
            const auto v = detail::parse_double(cells[c]);
            if (!v) throw parse_error("load_csv: non-numeric cell '" + cells[c] + "'", line_no, c + 1);
            row.push_back(*v);
        }
        ds.data.append_row(row);
    }
    if (ds.data.rows() == 0) throw parse_error("load_csv: no data rows in " + path, line_no, 0);
    return ds;
}

/// Writes features (17 significant digits) and, if present, a trailing
/// "label" column.
inline void write_csv(const dataset& ds, std::ostream& out) {
    for (std::size_t j = 0; j < ds.data.cols(); ++j) {
        if (j) out << ',';
        out << (j < ds.feature_names.size() ? ds.feature_names[j] : "x" + std::to_string(j));
    }
    if (ds.ground_truth) out << ",label";
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < ds.data.rows(); ++i) {
        for (std::size_t j = 0; j < ds.data.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.data(i, j));
            if (j) out << ',';
            out << buf;
        }
        if (ds.ground_truth) out << ',' << (*ds.ground_truth)[i];
        out << '\n';
    }
}

inline void save_csv(const dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path);
    write_csv(ds, out);
    if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

struct named_features {
    std::vector<std::string> names;
};
struct top_variance {
    std::size_t count;
};
using feature_selection = std::variant<named_features, top_variance>;

inline dataset select_features(const dataset& ds, const feature_selection& mode) {
    std::vector<std::size_t> keep;
    if (const auto* named = std::get_if<named_features>(&mode)) {
        for (const auto& n : named->names) {
            const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), n);
            if (it == ds.feature_names.end()) throw std::invalid_argument("select_features: unknown feature '" + n + "'");
            keep.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
        }
    } else {
        const auto count = std::get<top_variance>(mode).count;
        const std::size_t n = ds.data.cols(), m = ds.data.rows();
        if (count > n) throw std::invalid_argument("select_features: count exceeds feature count");
        std::vector<double> var(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m; ++i) mean += ds.data(i, j);
            mean /= static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) var[j] += (ds.data(i, j) - mean) * (ds.data(i, j) - mean);
            var[j] /= m > 1 ? static_cast<double>(m - 1) : 1.0;
        }
        std::vector<std::size_t> order(n);
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
        keep.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(keep.begin(), keep.end());
    }
    dataset out{matrix(ds.data.rows(), keep.size()), ds.ground_truth, ds.name, {}};
    for (std::size_t c = 0; c < keep.size(); ++c) {
        out.feature_names.push_back(keep[c] < ds.feature_names.size() ? ds.feature_names[keep[c]]
                                                                      : "x" + std::to_string(keep[c]));
        for (std::size_t i = 0; i < ds.data.rows(); ++i) out.data(i, c) = ds.data(i, keep[c]);
    }
    return out;
}

} // namespace qkm
