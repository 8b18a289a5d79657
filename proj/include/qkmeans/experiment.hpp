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

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "circuits.hpp"
#include "clustering.hpp"
#include "data.hpp"
#include "elbow.hpp"
#include "encoding.hpp"
#include "metrics.hpp"

#ifndef QKMEANS_DATA_DIR
#define QKMEANS_DATA_DIR "data"
#endif

namespace qkm {

inline constexpr int artifact_schema_version = 1;

/// Where records come from: a built-in generator or bundled table, or a CSV.
struct dataset_spec {
    std::string source = "blobs"; // blobs | blobs2 | aniso | moon | blobs3 | iris | wine | csv:<path>
    std::optional<std::size_t> samples; // generator size; 1500 (16 for blobs3) when unset
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
    double noise = 0.05; // moon only
    std::optional<feature_selection> features;
    std::optional<column_ref> label_column;
    bool has_header = true;
    std::string data_dir = QKMEANS_DATA_DIR;
};

inline const matrix& blobs_centers() {
    static const matrix c{{7.46858806, 9.37081326}, {7.3838908, 0.61711383}, {-5.34543344, -9.77202391}};
    return c;
}

inline const matrix& blobs2_centers() {
    static const matrix c{{-2.4, -1.2}, {2.4, -1.2}, {0.0, 3.0}};
    return c;
}

inline const matrix& blobs3_centers() {
    static const matrix c{{-3.0, -3.0}, {3.0, 3.0}};
    return c;
}

inline constexpr double blobs_std = 1.0;
inline constexpr double blobs2_std = 1.3;
inline constexpr double blobs3_std = 0.8;

inline dataset make_dataset(const dataset_spec& spec) {
    dataset ds;
    const auto& s = spec.source;
    const std::size_t n = spec.samples.value_or(s == "blobs3" ? 16 : 1500);
    if (s == "blobs") {
        ds = gen_blobs(n, blobs_centers(), blobs_std, spec.seed);
    } else if (s == "blobs2") {
        ds = gen_blobs(n, blobs2_centers(), blobs2_std, spec.seed);
    } else if (s == "blobs3") {
        ds = gen_blobs(n, blobs3_centers(), blobs3_std, spec.seed);
    } else if (s == "aniso") {
        ds = gen_aniso(n, spec.seed);
    } else if (s == "moon") {
        ds = gen_moons(n, spec.noise, spec.seed);
    } else if (s == "iris") {
        ds = load_csv(spec.data_dir + "/iris.csv", true, column_ref{std::string("class")});
        if (!spec.features) ds = select_features(ds, named_features{{"sepal_length", "petal_length", "petal_width"}});
    } else if (s == "wine") {
        ds = load_csv(spec.data_dir + "/wine.csv", true, column_ref{std::string("class")});
        if (!spec.features) ds = select_features(ds, top_variance{7});
    } else if (s.rfind("csv:", 0) == 0) {
        ds = load_csv(s.substr(4), spec.has_header, spec.label_column);
    } else {
        throw std::invalid_argument("dataset.source: unknown dataset '" + s + "'");
    }
    if (s != "csv" && s.rfind("csv:", 0) != 0) ds.name = s;
    if (spec.features) ds = select_features(ds, *spec.features);
    if (spec.sample) ds = subsample(ds, *spec.sample, detail::derive_seed(spec.seed, {0x5a3e1e}));
    return ds;
}

struct experiment_config {
    dataset_spec dataset;
    clustering_params params;
    std::size_t reps = 1;
    std::string out_dir;

    void validate(std::size_t m) const {
        if (reps < 1) throw std::invalid_argument("reps: must be >= 1");
        params.validate(m);
    }
};

inline nlohmann::json to_json(const dataset_spec& d) {
    nlohmann::json j{{"source", d.source}, {"seed", d.seed}, {"noise", d.noise}};
    j["samples"] = d.samples ? nlohmann::json(*d.samples) : nlohmann::json(nullptr);
    j["sample"] = d.sample ? nlohmann::json(*d.sample) : nlohmann::json(nullptr);
    if (d.features) {
        if (const auto* n = std::get_if<named_features>(&*d.features))
            j["features"] = {{"named", n->names}};
        else
            j["features"] = {{"top_variance", std::get<top_variance>(*d.features).count}};
    }
    return j;
}

inline nlohmann::json to_json(const clustering_params& p) {
    nlohmann::json j{{"algorithm", to_string(p.assignment)},
                     {"k", p.k},
                     {"shots_base", p.shots_base},
                     {"sc_thresh", p.sc_thresh},
                     {"max_ite", p.max_ite},
                     {"m1", p.m1},
                     {"seed", p.seed},
                     {"delta", p.delta},
                     {"analytic", p.mode == measurement::analytic},
                     {"threads", p.threads}};
    j["shots"] = p.shots ? nlohmann::json(*p.shots) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const pair_confusion_t& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

struct repetition_result {
    std::uint64_t seed = 0;
    metrics_report metrics;
    std::optional<double> silhouette; // empty when fewer than 2 clusters are populated
    pair_confusion_t confusion_vs_kmeans;
    std::size_t fallbacks = 0;
    std::size_t retries = 0;
    std::vector<double> similarity_per_iteration;
    std::vector<std::size_t> labels;
    double seconds_prepare = 0.0, seconds_cluster = 0.0, seconds_baseline = 0.0, seconds_metrics = 0.0;
};

struct run_artifact {
    experiment_config config;
    std::string dataset_name;
    std::size_t records = 0, features = 0;
    std::vector<repetition_result> reps;

    nlohmann::json to_json() const;
    std::string metrics_csv() const;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string csv_number(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

} // namespace detail

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline nlohmann::json run_artifact::to_json() const {
    nlohmann::json j;
    j["schema_version"] = artifact_schema_version;
    j["config"] = {{"dataset", qkm::to_json(config.dataset)}, {"params", qkm::to_json(config.params)},
                   {"reps", config.reps}};
    j["dataset"] = {{"name", dataset_name}, {"records", records}, {"features", features}};
    std::vector<double> ite, sim, sse_v, sil, vm, fp_fn;
    for (const auto& r : reps) {
        nlohmann::json rj{{"seed", r.seed},
                          {"n_ite", r.metrics.n_ite},
                          {"avg_similarity", r.metrics.avg_similarity},
                          {"sse", r.metrics.sse},
                          {"silhouette", detail::optional_number(r.silhouette)},
                          {"v_measure", detail::optional_number(r.metrics.v_measure)},
                          {"similarity_per_iteration", r.similarity_per_iteration},
                          {"pair_confusion_vs_kmeans", qkm::to_json(r.confusion_vs_kmeans)},
                          {"fallbacks", r.fallbacks},
                          {"retries", r.retries},
                          {"wall_clock_seconds",
                           {{"prepare", r.seconds_prepare},
                            {"cluster", r.seconds_cluster},
                            {"baseline", r.seconds_baseline},
                            {"metrics", r.seconds_metrics}}}};
        j["repetitions"].push_back(rj);
        ite.push_back(static_cast<double>(r.metrics.n_ite));
        sim.push_back(r.metrics.avg_similarity);
        sse_v.push_back(r.metrics.sse);
        if (r.silhouette) sil.push_back(*r.silhouette);
        if (r.metrics.v_measure) vm.push_back(*r.metrics.v_measure);
        fp_fn.push_back(r.confusion_vs_kmeans.fp + r.confusion_vs_kmeans.fn);
    }
    auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    j["aggregate"] = {{"n_ite", num(mean_of(ite))},       {"avg_similarity", num(mean_of(sim))},
                      {"sse", num(mean_of(sse_v))},       {"silhouette", num(mean_of(sil))},
                      {"v_measure", num(mean_of(vm))},    {"pair_fp_plus_fn", num(mean_of(fp_fn))}};
    return j;
}

inline std::string run_artifact::metrics_csv() const {
    std::string out = "rep,seed,n_ite,avg_similarity,sse,silhouette,v_measure,tp,fp,fn,tn,fallbacks,retries\n";
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        const auto& c = r.confusion_vs_kmeans;
        out += std::to_string(i) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.metrics.n_ite) + ',' +
               detail::csv_number(r.metrics.avg_similarity) + ',' + detail::csv_number(r.metrics.sse) + ',' +
               detail::csv_number(r.silhouette) + ',' + detail::csv_number(r.metrics.v_measure) + ',' +
               detail::csv_number(c.tp) + ',' + detail::csv_number(c.fp) + ',' + detail::csv_number(c.fn) + ',' +
               detail::csv_number(c.tn) + ',' + std::to_string(r.fallbacks) + ',' + std::to_string(r.retries) + '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Writes the files and a manifest listing them into `dir`.
inline void write_outputs(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                          const std::string& command) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest{{"schema_version", artifact_schema_version}, {"command", command}};
    for (const auto& [name, body] : files) {
        write_text(dir / name, body);
        manifest["files"].push_back(name);
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

/// Seed of repetition `rep`; repetition 0 uses the configured seed itself.
inline std::uint64_t repetition_seed(std::uint64_t seed, std::size_t rep) {
    return rep == 0 ? seed : detail::derive_seed(seed, {0x4e9, rep});
}

/// Runs `config.reps` independent seeded clusterings and collects metrics,
/// including the pair confusion against a classical run from the same seed.
inline run_artifact cmd_run(const experiment_config& config) {
    using clock = std::chrono::steady_clock;
    const auto t_prep = clock::now();
    const auto ds = make_dataset(config.dataset);
    const auto prepared = standardize(ds.data);
    const double prep_seconds = detail::seconds_since(t_prep);
    config.validate(ds.data.rows());

    run_artifact art;
    art.config = config;
    art.dataset_name = ds.name;
    art.records = ds.data.rows();
    art.features = ds.data.cols();
    art.reps.resize(config.reps);
    detail::parallel_for(config.reps, config.params.threads, [&](std::size_t rep) {
        auto params = config.params;
        params.seed = repetition_seed(config.params.seed, rep);
        params.threads = 1;
        repetition_result r;
        r.seed = params.seed;
        r.seconds_prepare = prep_seconds;

        auto t0 = clock::now();
        const auto result = run(prepared.data, params);
        r.seconds_cluster = detail::seconds_since(t0);

        t0 = clock::now();
        auto baseline_params = params;
        baseline_params.assignment = assignment_strategy::classical;
        const auto baseline = params.assignment == assignment_strategy::classical ? result
                                                                                  : run(prepared.data, baseline_params);
        r.seconds_baseline = detail::seconds_since(t0);

        t0 = clock::now();
        r.metrics.n_ite = result.n_ite;
        r.metrics.avg_similarity = result.avg_similarity();
        r.metrics.sse = sse(prepared.data, result.labels, result.centroids);
        try {
            r.silhouette = silhouette(prepared.data, result.labels);
            r.metrics.silhouette = *r.silhouette;
        } catch (const std::invalid_argument&) {
            r.metrics.silhouette = 0.0;
        }
        if (ds.ground_truth) r.metrics.v_measure = v_measure(*ds.ground_truth, result.labels);
        r.confusion_vs_kmeans = pair_confusion(baseline.labels, result.labels);
        for (const auto& h : result.history) {
            r.similarity_per_iteration.push_back(h.similarity);
            r.fallbacks += h.fallbacks;
            r.retries += h.retries;
        }
        r.labels = result.labels;
        r.seconds_metrics = detail::seconds_since(t0);
        art.reps[rep] = std::move(r);
    });
    return art;
}

/// Elbow curve per algorithm; returns CSV text "k,sse".
inline std::string elbow_csv(const std::vector<elbow_point>& points) {
    std::string out = "k,sse\n";
    for (const auto& p : points) out += std::to_string(p.k) + ',' + detail::csv_number(p.sse) + '\n';
    return out;
}

inline std::vector<elbow_point> cmd_elbow(const experiment_config& config, std::size_t k_min, std::size_t k_max,
                                          std::size_t restarts = 5) {
    const auto ds = make_dataset(config.dataset);
    if (k_max > ds.data.rows()) throw std::invalid_argument("k_max: exceeds the number of records");
    const auto z = standardize(ds.data);
    return elbow(z.data, k_min, k_max, config.params, restarts);
}

struct postselect_point {
    std::size_t m;
    double probability; // exact P(r = 1)
    double bound;       // 1 / N'
};

/// Exact P(r = 1) of qc3 loaded with M random unit records and k random unit
/// centroids of dimension `padded` (all slots nonzero).
inline std::vector<postselect_point> cmd_postselect(std::size_t padded, std::size_t k, std::size_t m_min,
                                                    std::size_t m_max, std::uint64_t seed) {
    if (padded < 2 || (padded & (padded - 1)) != 0) throw std::invalid_argument("n_prime: must be a power of two >= 2");
    if (k < 1 || m_min < 1 || m_min > m_max) throw std::invalid_argument("postselect: need k >= 1 and 1 <= m_min <= m_max");
    const std::size_t nq = index_width(padded);
    auto random_unit_angles = [&](std::size_t rows, std::mt19937_64& rng) {
        std::normal_distribution<double> g(0.0, 1.0);
        matrix out(rows, padded);
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<double> v(padded);
            double s = 0.0;
            for (auto& x : v) {
                x = g(rng);
                s += x * x;
            }
            for (auto& x : v) x /= std::sqrt(s);
            const auto a = encoding_angles(v, padded);
            std::copy(a.begin(), a.end(), out.row(i).begin());
        }
        return out;
    };
    std::vector<postselect_point> out;
    for (std::size_t m = m_min; m <= m_max; ++m) {
        std::mt19937_64 rng(detail::derive_seed(seed, {m}));
        const auto records = random_unit_angles(m, rng);
        const auto centroids = random_unit_angles(k, rng);
        const auto plan = build_qc3(records, centroids, nq, index_width(m), index_width(k));
        out.push_back({m, postselection_probability(plan), 1.0 / static_cast<double>(padded)});
    }
    return out;
}

inline std::string postselect_csv(const std::vector<postselect_point>& points) {
    std::string out = "m,probability,bound\n";
    for (const auto& p : points)
        out += std::to_string(p.m) + ',' + detail::csv_number(p.probability) + ',' + detail::csv_number(p.bound) + '\n';
    return out;
}

/// Reference high-level figures for IRIS with k = 3 (qubits, gates, depth,
/// shots), echoed next to ours for comparison.
struct reference_stats {
    std::size_t qubits, gates, depth, shots;
};

inline std::optional<reference_stats> reference_iris_stats(assignment_strategy s) {
    switch (s) {
    case assignment_strategy::q11: return reference_stats{5, 53, 41, 1024};
    case assignment_strategy::q1k: return reference_stats{9, 111, 83, 3072};
    case assignment_strategy::qmk: return reference_stats{23, 5065, 3064, 460800};
    default: return std::nullopt;
    }
}

struct stats_row {
    assignment_strategy variant;
    circuit_stats_t ours;
    std::uint64_t shots;
    std::optional<reference_stats> reference;
};

/// Builds one circuit of the requested variant on the prepared dataset
/// (first record(s), k-Means++ centroids) and reports its size.
inline stats_row cmd_stats(const dataset_spec& spec, assignment_strategy variant, std::size_t k, std::size_t m1,
                           std::uint64_t seed) {
    if (!is_quantum(variant)) throw std::invalid_argument("stats: variant must be q11, q1k or qmk");
    const auto ds = make_dataset(spec);
    const auto z = standardize(ds.data);
    const auto records = project(z.data);
    const auto centroids = project(kmeanspp_init(z.data, k, seed));
    clustering_params p;
    p.k = k;
    p.m1 = m1;
    p.assignment = variant;
    p.validate(z.data.rows());
    circuit_plan plan;
    switch (variant) {
    case assignment_strategy::q11:
        plan = build_qc1(records.angles.row(0), centroids.angles.row(0), records.index_qubits);
        break;
    case assignment_strategy::q1k:
        plan = build_qc2(records.angles.row(0), centroids.angles, records.index_qubits, index_width(k));
        break;
    default: {
        const std::size_t batch = p.batch_size(z.data.rows());
        matrix angles;
        for (std::size_t i = 0; i < batch; ++i) angles.append_row(records.angles.row(i));
        plan = build_qc3(angles, centroids.angles, records.index_qubits, index_width(batch), index_width(k));
    }
    }
    const bool iris_k3 = spec.source == "iris" && k == 3 && (variant != assignment_strategy::qmk ||
                                                             p.batch_size(z.data.rows()) == z.data.rows());
    return {variant, circuit_stats(plan), p.shots_per_circuit(z.data.rows()),
            iris_k3 ? reference_iris_stats(variant) : std::nullopt};
}

inline std::string stats_csv(const std::vector<stats_row>& rows) {
    std::string out = "variant,qubits,gates,depth,shots,reference_qubits,reference_gates,reference_depth,reference_shots\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.variant)) + ',' + std::to_string(r.ours.qubits) + ',' +
               std::to_string(r.ours.gate_count) + ',' + std::to_string(r.ours.depth) + ',' + std::to_string(r.shots);
        if (r.reference)
            out += ',' + std::to_string(r.reference->qubits) + ',' + std::to_string(r.reference->gates) + ',' +
                   std::to_string(r.reference->depth) + ',' + std::to_string(r.reference->shots);
        else
            out += ",,,,";
        out += '\n';
    }
    return out;
}

} // namespace qkm
