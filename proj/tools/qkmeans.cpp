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


// Command-line front end: run, elbow, postselect, stats, gen.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qkmeans.hpp"
#include "qkmeans/experiment.hpp"

namespace {

struct dataset_flags {
    std::string dataset = "blobs";
    std::optional<std::size_t> samples, sample;
    std::optional<std::uint64_t> data_seed;
    double noise = 0.05;
    std::vector<std::string> features;
    std::optional<std::size_t> top_variance;
    std::string label_column;
    bool no_header = false;
    std::string data_dir = QKMEANS_DATA_DIR;

    void attach(CLI::App* app) {
        app->add_option("--dataset", dataset, "blobs|blobs2|aniso|moon|blobs3|iris|wine|csv:<path>")
            ->capture_default_str();
        app->add_option("--samples", samples, "generator size (default 1500, 16 for blobs3)");
        app->add_option("--sample", sample, "random subsample size taken after generation");
        app->add_option("--data-seed", data_seed, "generator/subsample seed (default: --seed)");
        app->add_option("--noise", noise, "moon noise")->capture_default_str();
        app->add_option("--features", features, "feature columns to keep, by name")->delimiter(',');
        app->add_option("--top-variance", top_variance, "keep the N highest-variance features");
        app->add_option("--label-column", label_column, "CSV ground-truth column (name or 0-based index)");
        app->add_flag("--no-header", no_header, "CSV has no header row");
        app->add_option("--data-dir", data_dir, "directory holding iris.csv and wine.csv")->capture_default_str();
    }

    qkm::dataset_spec spec(std::uint64_t seed) const {
        qkm::dataset_spec s;
        s.source = dataset;
        s.samples = samples;
        s.sample = sample;
        s.seed = data_seed.value_or(seed);
        s.noise = noise;
        s.has_header = !no_header;
        s.data_dir = data_dir;
        if (!features.empty() && top_variance)
            throw std::invalid_argument("--features and --top-variance are mutually exclusive");
        if (!features.empty()) s.features = qkm::named_features{features};
        if (top_variance) s.features = qkm::top_variance{*top_variance};
        if (!label_column.empty()) {
            const bool numeric = label_column.find_first_not_of("0123456789") == std::string::npos;
            s.label_column = numeric ? qkm::column_ref{static_cast<std::size_t>(std::stoull(label_column))}
                                     : qkm::column_ref{label_column};
        }
        return s;
    }
};

struct clustering_flags {
    std::string algorithm = "kmeans";
    std::size_t k = 2;
    std::optional<std::uint64_t> shots;
    std::uint64_t shots_base = 1024;
    std::size_t m1 = 0;
    double delta = 0.0;
    double sc_thresh = 1e-4;
    std::size_t max_ite = 5;
    bool analytic = false;

    void attach(CLI::App* app, bool with_algorithm = true) {
        if (with_algorithm)
            app->add_option("--algorithm", algorithm, "kmeans|delta|q11|q1k|qmk")->capture_default_str();
        app->add_option("--k", k, "number of clusters")->capture_default_str();
        app->add_option("--shots", shots, "shots per circuit (default: 1024, k*1024 or M1*k*1024)");
        app->add_option("--shots-base", shots_base, "base shot count of the default rule")->capture_default_str();
        app->add_option("--m1", m1, "qmk batch size (0 = all records)")->capture_default_str();
        app->add_option("--delta", delta, "delta-k-Means tolerance")->capture_default_str();
        app->add_option("--sc-thresh", sc_thresh, "relative centroid-shift stopping threshold")->capture_default_str();
        app->add_option("--max-ite", max_ite, "maximum iterations")->capture_default_str();
        app->add_flag("--analytic", analytic, "use exact probabilities instead of sampled shots");
    }

    qkm::clustering_params params(std::uint64_t seed, std::size_t threads) const {
        qkm::clustering_params p;
        p.assignment = qkm::parse_strategy(algorithm);
        p.k = k;
        p.shots = shots;
        p.shots_base = shots_base;
        p.m1 = m1;
        p.delta = delta;
        p.sc_thresh = sc_thresh;
        p.max_ite = max_ite;
        p.mode = analytic ? qkm::measurement::analytic : qkm::measurement::sampled;
        p.seed = seed;
        p.threads = threads;
        return p;
    }
};

void emit(const std::string& out_dir, const std::string& command,
          const std::vector<std::pair<std::string, std::string>>& files) {
    if (out_dir.empty()) {
        for (const auto& f : files) std::cout << f.second;
        return;
    }
    qkm::write_outputs(out_dir, files, command);
}

std::string joined_argv(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int fail(const std::string& type, const std::string& message, int code) {
    std::cerr << nlohmann::json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid quantum k-Means experiments on a statevector simulator"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "base seed")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads")->capture_default_str();
        sub->add_option("--out-dir", out_dir, "write files and a manifest here instead of stdout");
    };

    dataset_flags data;
    clustering_flags clus;

    auto* run = app.add_subcommand("run", "run seeded clustering repetitions and report metrics");
    std::size_t reps = 1;
    std::string format = "json";
    common(run);
    data.attach(run);
    clus.attach(run);
    run->add_option("--reps", reps, "independent repetitions")->capture_default_str();
    run->add_option("--format", format, "stdout format when --out-dir is unset: json|csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    auto* elbow = app.add_subcommand("elbow", "SSE versus k, best of several seeded restarts");
    std::vector<std::string> algorithms{"kmeans"};
    std::size_t k_min = 2, k_max = 8, restarts = 5;
    common(elbow);
    data.attach(elbow);
    clus.attach(elbow, false);
    elbow->add_option("--algorithms", algorithms, "comma-separated list of algorithms")->delimiter(',');
    elbow->add_option("--k-min", k_min, "smallest k of the sweep")->capture_default_str();
    elbow->add_option("--k-max", k_max, "largest k of the sweep")->capture_default_str();
    elbow->add_option("--restarts", restarts, "seeded restarts per k")->capture_default_str();

    auto* post = app.add_subcommand("postselect", "exact P(r=1) of the batched circuit versus M");
    std::size_t n_prime = 4, post_k = 2, m_min = 1, m_max = 128;
    common(post);
    post->add_option("--n-prime", n_prime, "padded dimension (power of two)")->capture_default_str();
    post->add_option("--k", post_k, "number of centroids")->capture_default_str();
    post->add_option("--m-min", m_min, "smallest record count")->capture_default_str();
    post->add_option("--m-max", m_max, "largest record count")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "qubits, gate count and depth of each circuit variant");
    std::vector<std::string> variants{"q11", "q1k", "qmk"};
    common(stats);
    data.attach(stats);
    clus.attach(stats, false);
    stats->add_option("--variants", variants, "comma-separated subset of q11,q1k,qmk")->delimiter(',');

    auto* gen = app.add_subcommand("gen", "write a generated or loaded dataset as CSV");
    std::string output;
    common(gen);
    data.attach(gen);
    gen->add_option("--output,-o", output, "output CSV path (stdout when unset)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    const std::string command = joined_argv(argc, argv);
    try {
        if (threads < 1) throw std::invalid_argument("--threads: must be >= 1");
        if (*run) {
            qkm::experiment_config cfg;
            cfg.dataset = data.spec(seed);
            cfg.params = clus.params(seed, threads);
            cfg.reps = reps;
            cfg.out_dir = out_dir;
            const auto art = qkm::cmd_run(cfg);
            if (out_dir.empty())
                std::cout << (format == "csv" ? art.metrics_csv() : art.to_json().dump(2) + "\n");
            else
                qkm::write_outputs(out_dir, {{"run.json", art.to_json().dump(2) + "\n"}, {"metrics.csv", art.metrics_csv()}},
                                   command);
        } else if (*elbow) {
            qkm::experiment_config cfg;
            cfg.dataset = data.spec(seed);
            std::vector<std::pair<std::string, std::string>> files;
            std::string combined = "algorithm,k,sse\n";
            for (const auto& name : algorithms) {
                clus.algorithm = name;
                cfg.params = clus.params(seed, threads);
                const auto points = qkm::cmd_elbow(cfg, k_min, k_max, restarts);
                const std::string label = qkm::to_string(cfg.params.assignment);
                files.emplace_back("elbow_" + label + ".csv", qkm::elbow_csv(points));
                for (const auto& p : points) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.17g", p.sse);
                    combined += label + ',' + std::to_string(p.k) + ',' + buf + '\n';
                }
            }
            if (out_dir.empty())
                std::cout << combined;
            else
                qkm::write_outputs(out_dir, files, command);
        } else if (*post) {
            const auto points = qkm::cmd_postselect(n_prime, post_k, m_min, m_max, seed);
            emit(out_dir, command, {{"postselect.csv", qkm::postselect_csv(points)}});
        } else if (*stats) {
            std::vector<qkm::stats_row> rows;
            for (const auto& v : variants)
                rows.push_back(qkm::cmd_stats(data.spec(seed), qkm::parse_strategy(v), clus.k, clus.m1, seed));
            emit(out_dir, command, {{"stats.csv", qkm::stats_csv(rows)}});
        } else if (*gen) {
            const auto ds = qkm::make_dataset(data.spec(seed));
            std::ostringstream body;
            qkm::write_csv(ds, body);
            if (!output.empty())
                qkm::write_text(output, body.str());
            else
                emit(out_dir, command, {{(ds.name.empty() ? std::string("dataset") : ds.name) + ".csv", body.str()}});
        }
    } catch (const qkm::parse_error& e) {
        return fail("parse_error", e.what(), 1);
    } catch (const qkm::estimation_failure& e) {
        return fail("estimation_failure", e.what(), 1);
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what(), 1);
    } catch (const std::out_of_range& e) {
        return fail("out_of_range", e.what(), 1);
    } catch (const std::exception& e) {
        return fail("runtime_error", e.what(), 1);
    }
    return 0;
}
