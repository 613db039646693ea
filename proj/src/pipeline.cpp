#include "recovgraph/pipeline.hpp"

#include "recovgraph/csvio.hpp"
#include "recovgraph/errors.hpp"
#include "recovgraph/rng.hpp"
#include "recovgraph/trajectory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

namespace recovgraph {

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t session_seed(std::uint64_t base, const std::string& patient,
                           const std::string& game, int instance) {
    const std::string key = patient + '\x1f' + game + '\x1f' + std::to_string(instance);
    return stream_seed(base, fnv1a(key));
}

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& task) {
    if (threads <= 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min(threads, n_tasks);
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
        });
    }
    for (auto& worker : workers) worker.join();
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& mat) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(mat(i, j));
        }
        out << '\n';
    }
    if (!out.good()) throw Error("write failed for " + path.string());
}

void write_realization_csvs(const std::filesystem::path& dir, const std::string& stem,
                            const GraphRealization& realization) {
    {
        std::ofstream out(dir / (stem + "_edges.csv"));
        if (!out) throw Error("cannot write realization edge list for " + stem);
        out << "source,target\n";
        const auto& adj = realization.adjacency;
        for (Eigen::Index s = 0; s < adj.rows(); ++s) {
            for (Eigen::Index t = s + 1; t < adj.cols(); ++t) {
                if (adj(s, t)) out << (s + 1) << ',' << (t + 1) << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / (stem + "_adj.csv"));
        if (!out) throw Error("cannot write adjacency matrix for " + stem);
        const auto& adj = realization.adjacency;
        for (Eigen::Index s = 0; s < adj.rows(); ++s) {
            for (Eigen::Index t = 0; t < adj.cols(); ++t) {
                if (t > 0) out << ',';
                out << adj(s, t);
            }
            out << '\n';
        }
    }
}

std::string pair_label(int from, int to) {
    return "(" + std::to_string(from) + "," + std::to_string(to) + ")";
}

// Per-session outcome kept after the heavy sample set is released.
struct SessionOutcome {
    SessionRef ref;
    bool failed = false;
    std::string error;
    std::uint64_t seed = 0;
    double ridge = 0.0;
    double acceptance_rate = 1.0;
    std::vector<double> log_posterior;
    double seconds = 0.0;
};

struct Group {
    std::string patient_id;
    std::string game_id;
    std::vector<SessionRef> sessions;  // sorted by instance
};

std::vector<Group> group_sessions(const Manifest& manifest) {
    std::map<std::pair<std::string, std::string>, Group> groups;
    for (const auto& ref : manifest.sessions) {
        auto& group = groups[{ref.patient_id, ref.game_id}];
        group.patient_id = ref.patient_id;
        group.game_id = ref.game_id;
        group.sessions.push_back(ref);
    }
    std::vector<Group> ordered;
    ordered.reserve(groups.size());
    for (auto& [key, group] : groups) {
        std::sort(group.sessions.begin(), group.sessions.end(),
                  [](const SessionRef& a, const SessionRef& b) { return a.instance < b.instance; });
        for (std::size_t i = 1; i < group.sessions.size(); ++i) {
            if (group.sessions[i].instance == group.sessions[i - 1].instance) {
                throw ContractError("duplicate instance " +
                                    std::to_string(group.sessions[i].instance) + " for " +
                                    group.patient_id + "/" + group.game_id);
            }
        }
        ordered.push_back(std::move(group));
    }
    return ordered;
}

Manifest resolve_manifest(const RunConfig& config) {
    if (!config.manifest_path.empty()) {
        return load_manifest(config.manifest_path);
    }
    if (!config.session_files.empty()) {
        return manifest_from_files(config.session_files);
    }
    throw ContractError("no manifest or session files given");
}

struct SessionArtifacts {
    CorrelationStructure correlation;
    GraphSampleSet samples;
};

// norms -> standardize -> correlation -> sampling for one session.
SessionArtifacts process_session(const SessionRef& ref, const RunConfig& config,
                                 std::uint64_t seed) {
    RawSession raw = read_session_csv(ref.path);
    raw.patient_id = ref.patient_id;
    raw.game_id = ref.game_id;
    raw.instance = ref.instance;
    if (static_cast<int>(raw.n_joints()) != config.n_joints) {
        throw DataError(ref.path.filename().string() + ": " +
                        std::to_string(raw.n_joints()) + " joints, configured for " +
                        std::to_string(config.n_joints));
    }
    const SessionSeries series = standardize(raw);

    SessionArtifacts artifacts;
    artifacts.correlation = correlation_structure(series, config.ridge_ladder);

    SampleOptions options;
    options.n_samples = config.n_samples;
    options.proposal = config.proposal;
    options.seed = seed;
    options.direct = config.direct_sampling;
    artifacts.samples = sample_edges(artifacts.correlation.partial, options);
    return artifacts;
}

std::string session_stem(const SessionRef& ref) {
    return "P" + sanitize_id(ref.patient_id) + "_G" + sanitize_id(ref.game_id) + "_J" +
           std::to_string(ref.instance);
}

nlohmann::json config_to_json(const RunConfig& config) {
    nlohmann::json j;
    j["manifest"] = config.manifest_path.generic_string();
    j["output_dir"] = config.output_dir.generic_string();
    j["n_samples"] = config.n_samples;
    j["proposal"] = to_string(config.proposal);
    j["seed"] = config.seed;
    j["tau_list"] = config.tau_list;
    j["scale_hellinger"] = config.scale_hellinger;
    j["scale_kl"] = config.scale_kl;
    j["ridge_ladder"] = config.ridge_ladder;
    j["n_joints"] = config.n_joints;
    j["dump_correlation"] = config.dump_correlation;
    j["dump_samples"] = config.dump_samples;
    j["all_pairs"] = config.all_pairs;
    j["direct_sampling"] = config.direct_sampling;
    return j;
}

} // namespace

int resolve_threads(const RunConfig& config) {
    if (config.threads > 0) return config.threads;
    if (const char* env = std::getenv("RECOVGRAPH_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string sanitize_id(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (const char c : id) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '.';
        out.push_back(keep ? c : '_');
    }
    return out.empty() ? "unnamed" : out;
}

RunReport run_pipeline(const RunConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    if (config.output_dir.empty()) {
        throw ContractError("run_pipeline: output directory not set");
    }
    std::filesystem::create_directories(config.output_dir);

    const Manifest manifest = resolve_manifest(config);
    const std::vector<Group> groups = group_sessions(manifest);
    const int threads = resolve_threads(config);

    RunReport report;
    std::vector<RecoveryPoint> recovery_points;
    nlohmann::json session_meta = nlohmann::json::array();
    nlohmann::json plot_trajectories = nlohmann::json::array();

    for (const Group& group : groups) {
        const auto n_sessions = static_cast<int>(group.sessions.size());
        std::vector<SessionOutcome> outcomes(static_cast<std::size_t>(n_sessions));

        parallel_for(n_sessions, threads, [&](int i) {
            const auto t0 = std::chrono::steady_clock::now();
            SessionOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
            outcome.ref = group.sessions[static_cast<std::size_t>(i)];
            outcome.seed = session_seed(config.seed, outcome.ref.patient_id,
                                        outcome.ref.game_id, outcome.ref.instance);
            try {
                SessionArtifacts artifacts = process_session(outcome.ref, config, outcome.seed);
                const std::string stem = session_stem(outcome.ref);
                if (config.dump_correlation) {
                    write_matrix_csv(config.output_dir / ("correlation_" + stem + ".csv"),
                                     artifacts.correlation.pearson);
                    write_matrix_csv(config.output_dir / ("partial_" + stem + ".csv"),
                                     artifacts.correlation.partial);
                }
                if (config.dump_samples) {
                    save_sample_set(config.output_dir / ("samples_" + stem + ".rgss"),
                                    artifacts.samples);
                }
                for (const double tau : config.tau_list) {
                    write_realization_csvs(
                        config.output_dir,
                        "realization_" + stem + "_tau" + format_double(tau),
                        realize_graph(artifacts.samples, tau));
                }
                outcome.ridge = artifacts.correlation.ridge_applied;
                outcome.acceptance_rate = artifacts.samples.acceptance_rate;
                outcome.log_posterior = std::move(artifacts.samples.log_posterior);
            } catch (const std::exception& e) {
                outcome.failed = true;
                outcome.error = e.what();
            }
            outcome.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        });

        GroupStatus status;
        status.patient_id = group.patient_id;
        status.game_id = group.game_id;

        // Usable prefix: instances 1..m present and processed successfully.
        int usable = 0;
        for (int i = 0; i < n_sessions; ++i) {
            const SessionOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
            if (outcome.ref.instance != i + 1 || outcome.failed) break;
            ++usable;
        }
        const int max_instance = n_sessions > 0
                                     ? outcomes[static_cast<std::size_t>(n_sessions - 1)].ref.instance
                                     : 0;
        for (int i = 0; i < n_sessions; ++i) {
            const SessionOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
            report.sessions_processed += outcome.failed ? 0 : 1;
            report.sessions_failed += outcome.failed ? 1 : 0;
            if (outcome.failed) {
                status.session_errors.push_back("instance " +
                                                std::to_string(outcome.ref.instance) + ": " +
                                                outcome.error);
            }
            nlohmann::json meta;
            meta["patient_id"] = outcome.ref.patient_id;
            meta["game_id"] = outcome.ref.game_id;
            meta["instance"] = outcome.ref.instance;
            meta["seed"] = outcome.seed;
            meta["failed"] = outcome.failed;
            if (outcome.failed) {
                meta["error"] = outcome.error;
            } else {
                meta["ridge_applied"] = outcome.ridge;
                meta["acceptance_rate"] = outcome.acceptance_rate;
            }
            meta["seconds"] = outcome.seconds;
            session_meta.push_back(std::move(meta));
        }
        {
            // Instances expected 1..max but absent from the manifest.
            std::vector<bool> present(static_cast<std::size_t>(max_instance) + 1, false);
            for (const auto& outcome : outcomes) {
                if (outcome.ref.instance <= max_instance) {
                    present[static_cast<std::size_t>(outcome.ref.instance)] = true;
                }
            }
            for (int j = 1; j <= max_instance; ++j) {
                if (!present[static_cast<std::size_t>(j)]) status.missing_instances.push_back(j);
            }
        }
        status.n_instances_used = usable;
        status.status = usable == 0 ? "failed"
                        : (usable == n_sessions && status.missing_instances.empty())
                            ? "ok"
                            : "incomplete";

        if (usable > 0) {
            std::vector<InstanceDistance> steps;
            steps.reserve(static_cast<std::size_t>(usable - 1));
            for (int j = 1; j < usable; ++j) {
                InstanceDistance step;
                step.from_instance = j;
                step.to_instance = j + 1;
                step.distance.hellinger =
                    hellinger(outcomes[static_cast<std::size_t>(j)].log_posterior,
                              outcomes[static_cast<std::size_t>(j - 1)].log_posterior,
                              config.scale_hellinger);
                step.distance.kl =
                    kl_divergence(outcomes[static_cast<std::size_t>(j)].log_posterior,
                                  outcomes[static_cast<std::size_t>(j - 1)].log_posterior,
                                  config.scale_kl);
                step.distance.n_samples = config.n_samples;
                step.distance.scale_hellinger = config.scale_hellinger;
                step.distance.scale_kl = config.scale_kl;
                steps.push_back(step);
            }

            const std::string group_stem =
                sanitize_id(group.patient_id) + "_" + sanitize_id(group.game_id);
            {
                std::ofstream out(config.output_dir / ("distances_" + group_stem + ".csv"));
                if (!out) throw Error("cannot write distances CSV for " + group_stem);
                out << "instance_pair,hellinger,kl\n";
                for (const auto& step : steps) {
                    out << csv_quote(pair_label(step.from_instance, step.to_instance)) << ','
                        << format_double(step.distance.hellinger) << ','
                        << format_double(step.distance.kl) << '\n';
                }
            }
            if (config.all_pairs && usable > 2) {
                std::ofstream out(config.output_dir /
                                  ("distances_all_pairs_" + group_stem + ".csv"));
                if (!out) throw Error("cannot write all-pairs distances CSV for " + group_stem);
                out << "instance_pair,hellinger,kl\n";
                for (int a = 1; a < usable; ++a) {
                    for (int b = a + 1; b <= usable; ++b) {
                        const auto& later = outcomes[static_cast<std::size_t>(b - 1)];
                        const auto& earlier = outcomes[static_cast<std::size_t>(a - 1)];
                        out << csv_quote(pair_label(a, b)) << ','
                            << format_double(hellinger(later.log_posterior,
                                                       earlier.log_posterior,
                                                       config.scale_hellinger))
                            << ','
                            << format_double(kl_divergence(later.log_posterior,
                                                           earlier.log_posterior,
                                                           config.scale_kl))
                            << '\n';
                    }
                }
            }

            RecoveryTrajectory trajectory = mrs_trajectory(steps);
            trajectory.patient_id = group.patient_id;
            trajectory.game_id = group.game_id;
            for (int j = 0; j < usable; ++j) {
                trajectory.platform_points[static_cast<std::size_t>(j)] =
                    outcomes[static_cast<std::size_t>(j)].ref.platform_points;
            }
            write_trajectory_csv(config.output_dir / ("trajectory_" + group_stem + ".csv"),
                                 trajectory);
            ++report.trajectories_written;

            if (config.emit_plot_json) {
                nlohmann::json series;
                series["patient_id"] = group.patient_id;
                series["game_id"] = group.game_id;
                series["instance"] = nlohmann::json::array();
                for (int j = 1; j <= usable; ++j) series["instance"].push_back(j);
                series["mrs_hellinger"] = trajectory.mrs_hellinger;
                series["mrs_kl"] = trajectory.mrs_kl;
                plot_trajectories.push_back(std::move(series));
            }

            if (usable >= 2) {
                try {
                    RecoveryPoint point;
                    point.patient_id = group.patient_id;
                    point.game_id = group.game_id;
                    point.alpha = recovery_parameter(trajectory);
                    point.initial_score = trajectory.platform_points[0];
                    point.n_instances = usable;
                    recovery_points.push_back(std::move(point));
                } catch (const DataError& e) {
                    status.session_errors.push_back(std::string("alpha: ") + e.what());
                }
            }
        }
        report.groups.push_back(std::move(status));
    }

    write_recommendation_csv(config.output_dir / "recommendation.csv", recovery_points);

    if (config.emit_plot_json) {
        nlohmann::json plots;
        plots["trajectories"] = std::move(plot_trajectories);
        nlohmann::json recommendation = nlohmann::json::object();
        for (const auto& [game, rows] : recommendation_table(recovery_points)) {
            nlohmann::json series;
            series["initial_score"] = nlohmann::json::array();
            series["alpha"] = nlohmann::json::array();
            series["patient_id"] = nlohmann::json::array();
            for (const auto& point : rows) {
                if (!point.initial_score) continue;
                series["initial_score"].push_back(*point.initial_score);
                series["alpha"].push_back(point.alpha);
                series["patient_id"].push_back(point.patient_id);
            }
            recommendation[game] = std::move(series);
        }
        plots["recommendation"] = std::move(recommendation);
        std::ofstream out(config.output_dir / "plots.json");
        if (!out) throw Error("cannot write plots.json");
        out << plots.dump(2) << '\n';
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    {
        nlohmann::json meta;
        meta["config"] = config_to_json(config);
        meta["threads"] = threads;
        meta["sessions"] = std::move(session_meta);
        nlohmann::json group_meta = nlohmann::json::array();
        for (const auto& status : report.groups) {
            nlohmann::json g;
            g["patient_id"] = status.patient_id;
            g["game_id"] = status.game_id;
            g["status"] = status.status;
            g["n_instances_used"] = status.n_instances_used;
            g["missing_instances"] = status.missing_instances;
            g["errors"] = status.session_errors;
            group_meta.push_back(std::move(g));
        }
        meta["groups"] = std::move(group_meta);
        meta["sessions_processed"] = report.sessions_processed;
        meta["sessions_failed"] = report.sessions_failed;
        meta["trajectories_written"] = report.trajectories_written;
        meta["wall_seconds"] = report.wall_seconds;
        std::ofstream out(config.output_dir / "run_metadata.json");
        if (!out) throw Error("cannot write run_metadata.json");
        out << meta.dump(2) << '\n';
    }
    return report;
}

RunReport realize_graphs(const RunConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    if (config.output_dir.empty()) {
        throw ContractError("realize_graphs: output directory not set");
    }
    if (config.tau_list.empty()) {
        throw ContractError("realize_graphs: no tau values given");
    }
    std::filesystem::create_directories(config.output_dir);

    const Manifest manifest = resolve_manifest(config);
    const int threads = resolve_threads(config);
    const auto n_sessions = static_cast<int>(manifest.sessions.size());

    RunReport report;
    std::vector<std::string> errors(static_cast<std::size_t>(n_sessions));
    parallel_for(n_sessions, threads, [&](int i) {
        const SessionRef& ref = manifest.sessions[static_cast<std::size_t>(i)];
        try {
            const std::uint64_t seed =
                session_seed(config.seed, ref.patient_id, ref.game_id, ref.instance);
            const SessionArtifacts artifacts = process_session(ref, config, seed);
            const std::string stem = session_stem(ref);
            for (const double tau : config.tau_list) {
                write_realization_csvs(config.output_dir,
                                       "realization_" + stem + "_tau" + format_double(tau),
                                       realize_graph(artifacts.samples, tau));
            }
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (int i = 0; i < n_sessions; ++i) {
        if (errors[static_cast<std::size_t>(i)].empty()) {
            ++report.sessions_processed;
        } else {
            ++report.sessions_failed;
            GroupStatus status;
            status.patient_id = manifest.sessions[static_cast<std::size_t>(i)].patient_id;
            status.game_id = manifest.sessions[static_cast<std::size_t>(i)].game_id;
            status.status = "failed";
            status.session_errors.push_back(errors[static_cast<std::size_t>(i)]);
            report.groups.push_back(std::move(status));
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace recovgraph
