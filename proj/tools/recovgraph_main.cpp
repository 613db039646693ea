// recovgraph: learns random-graph posteriors from joint-location time series,
// computes statistical distances between successive session posteriors, and
// builds per-patient recovery score trajectories and exergame
// recommendations.

#include "recovgraph/csvio.hpp"
#include "recovgraph/distance.hpp"
#include "recovgraph/errors.hpp"
#include "recovgraph/pipeline.hpp"
#include "recovgraph/synth.hpp"
#include "recovgraph/trajectory.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace recovgraph;

struct CommonOptions {
    std::string manifest;
    std::vector<std::string> files;
    std::string output_dir = ".";
    std::int64_t n_samples = 50000;
    std::string proposal = "uniform";
    std::uint64_t seed = 0;
    std::vector<double> tau_list;
    double scale_hellinger = kDefaultHellingerScale;
    double scale_kl = kDefaultKlScale;
    std::vector<double> ridge_ladder;
    int n_joints = 20;
    bool dump_correlation = false;
    bool dump_samples = false;
    bool all_pairs = false;
    bool direct_sampling = false;
    bool plot_json = false;
    int threads = 0;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt, bool with_inputs) {
    if (with_inputs) {
        cmd->add_option("--manifest", opt.manifest, "Manifest JSON listing session files");
        cmd->add_option("files", opt.files,
                        "Session CSVs named P<patient>_G<game>_J<instance>.csv");
    }
    cmd->add_option("-o,--out", opt.output_dir, "Output directory")->capture_default_str();
    cmd->add_option("--samples", opt.n_samples, "Edge samples per session")
        ->capture_default_str();
    cmd->add_option("--proposal", opt.proposal, "Rejection-sampling proposal density")
        ->check(CLI::IsMember({"uniform", "bernoulli"}))
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Base RNG seed")->capture_default_str();
    cmd->add_option("--scale-hellinger", opt.scale_hellinger,
                    "Posterior scale for the Hellinger distance")
        ->capture_default_str();
    cmd->add_option("--scale-kl", opt.scale_kl, "Posterior scale for the KL divergence")
        ->capture_default_str();
    cmd->add_option("--ridge", opt.ridge_ladder,
                    "Override the ridge escalation ladder for near-singular correlation matrices");
    cmd->add_option("--joints", opt.n_joints, "Expected joint count per session")
        ->capture_default_str();
    cmd->add_flag("--direct-sampling", opt.direct_sampling,
                  "Replace rejection sampling with direct Bernoulli inversion");
    cmd->add_option("--threads", opt.threads,
                    "Worker threads (default: RECOVGRAPH_THREADS or hardware)");
}

RunConfig to_run_config(const CommonOptions& opt) {
    RunConfig config;
    if (!opt.manifest.empty()) config.manifest_path = opt.manifest;
    for (const auto& f : opt.files) config.session_files.emplace_back(f);
    config.output_dir = opt.output_dir;
    config.n_samples = opt.n_samples;
    config.proposal = proposal_from_string(opt.proposal);
    config.seed = opt.seed;
    config.tau_list = opt.tau_list;
    config.scale_hellinger = opt.scale_hellinger;
    config.scale_kl = opt.scale_kl;
    if (!opt.ridge_ladder.empty()) config.ridge_ladder = opt.ridge_ladder;
    config.n_joints = opt.n_joints;
    config.dump_correlation = opt.dump_correlation;
    config.dump_samples = opt.dump_samples;
    config.all_pairs = opt.all_pairs;
    config.direct_sampling = opt.direct_sampling;
    config.emit_plot_json = opt.plot_json;
    config.threads = opt.threads;
    return config;
}

int report_outcome(const RunReport& report, bool need_trajectories) {
    for (const auto& group : report.groups) {
        if (group.status != "ok") {
            std::cerr << "note: " << group.patient_id << "/" << group.game_id << " "
                      << group.status;
            if (!group.missing_instances.empty()) {
                std::cerr << " (missing instance";
                for (const int j : group.missing_instances) std::cerr << ' ' << j;
                std::cerr << ")";
            }
            std::cerr << '\n';
            for (const auto& e : group.session_errors) std::cerr << "  " << e << '\n';
        }
    }
    std::cout << "sessions: " << report.sessions_processed << " ok, "
              << report.sessions_failed << " failed";
    if (need_trajectories) std::cout << "; trajectories: " << report.trajectories_written;
    std::cout << "; wall: " << format_double(report.wall_seconds) << " s\n";
    if (need_trajectories && report.trajectories_written == 0) return 1;
    if (!need_trajectories && report.sessions_processed == 0) return 1;
    return 0;
}

int run_analyze(const CommonOptions& opt) {
    return report_outcome(run_pipeline(to_run_config(opt)), true);
}

int run_graph(const CommonOptions& opt) {
    return report_outcome(realize_graphs(to_run_config(opt)), false);
}

int run_distance(const std::string& later_path, const std::string& earlier_path,
                 double scale_hellinger, double scale_kl, const std::string& out_path,
                 const std::string& pair) {
    const GraphSampleSet later = load_sample_set(later_path);
    const GraphSampleSet earlier = load_sample_set(earlier_path);
    const DistanceResult result = distance_between(later, earlier, scale_hellinger, scale_kl);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error("cannot write " + out_path);
        out = &file;
    }
    *out << "instance_pair,hellinger,kl\n"
         << csv_quote(pair) << ',' << format_double(result.hellinger) << ','
         << format_double(result.kl) << '\n';
    return 0;
}

std::vector<InstanceDistance> read_distance_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    const std::string where = path.filename().string();
    std::string line;
    if (!std::getline(in, line) ||
        csv_split(line) != std::vector<std::string>{"instance_pair", "hellinger", "kl"}) {
        throw ParseError(where + ": expected header instance_pair,hellinger,kl");
    }
    std::vector<InstanceDistance> steps;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = csv_split(line);
        const std::string context = where + ": row " + std::to_string(row);
        if (fields.size() != 3) {
            throw ParseError(context + ": expected 3 fields");
        }
        std::string pair = fields[0];
        if (pair.size() < 5 || pair.front() != '(' || pair.back() != ')') {
            throw ParseError(context + ": malformed instance pair '" + pair + "'");
        }
        const auto comma = pair.find(',');
        if (comma == std::string::npos) {
            throw ParseError(context + ": malformed instance pair '" + pair + "'");
        }
        InstanceDistance step;
        step.from_instance = static_cast<int>(parse_long(pair.substr(1, comma - 1), context));
        step.to_instance = static_cast<int>(
            parse_long(pair.substr(comma + 1, pair.size() - comma - 2), context));
        step.distance.hellinger = parse_double(fields[1], context);
        step.distance.kl = parse_double(fields[2], context);
        steps.push_back(step);
    }
    return steps;
}

int run_trajectory(const std::string& distances_path, const std::string& out_path) {
    const auto steps = read_distance_csv(distances_path);
    const RecoveryTrajectory trajectory = mrs_trajectory(steps);
    write_trajectory_csv(out_path, trajectory);
    std::cout << "wrote " << out_path << " (" << trajectory.n_instances() << " instances)\n";
    return 0;
}

// trajectory_<patient>_<game>.csv; the patient part may not contain '_'.
bool split_trajectory_filename(const std::string& name, std::string& patient,
                               std::string& game) {
    constexpr std::string_view prefix = "trajectory_";
    constexpr std::string_view suffix = ".csv";
    if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
        return false;
    }
    const std::string stem =
        name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    const auto underscore = stem.find('_');
    if (underscore == std::string::npos || underscore == 0 || underscore + 1 >= stem.size()) {
        return false;
    }
    patient = stem.substr(0, underscore);
    game = stem.substr(underscore + 1);
    return true;
}

int run_recommend(const std::vector<std::string>& trajectory_files,
                  const std::string& manifest_path, const std::string& out_path) {
    std::vector<std::string> files = trajectory_files;
    Manifest manifest;
    if (!manifest_path.empty()) manifest = load_manifest(manifest_path);

    std::vector<RecoveryPoint> points;
    for (const auto& file : files) {
        const fs::path path(file);
        RecoveryTrajectory trajectory = read_trajectory_csv(path);
        std::string patient, game;
        if (!split_trajectory_filename(path.filename().string(), patient, game)) {
            throw ParseError(file + ": expected a trajectory_<patient>_<game>.csv name");
        }
        trajectory.patient_id = patient;
        trajectory.game_id = game;

        RecoveryPoint point;
        point.patient_id = patient;
        point.game_id = game;
        point.n_instances = trajectory.n_instances();
        if (!trajectory.platform_points.empty() && trajectory.platform_points[0]) {
            point.initial_score = trajectory.platform_points[0];
        } else {
            for (const auto& ref : manifest.sessions) {
                if (ref.instance == 1 && sanitize_id(ref.patient_id) == patient &&
                    sanitize_id(ref.game_id) == game && ref.platform_points) {
                    point.initial_score = ref.platform_points;
                    break;
                }
            }
        }
        try {
            point.alpha = recovery_parameter(trajectory);
        } catch (const DataError& e) {
            std::cerr << "note: skipping " << patient << "/" << game << ": " << e.what()
                      << '\n';
            continue;
        }
        points.push_back(std::move(point));
    }
    write_recommendation_csv(out_path, points);
    std::cout << "wrote " << out_path << " (" << points.size() << " rows before filtering)\n";
    return 0;
}

struct SynthOptions {
    std::string spec_path;
    std::string output_dir = ".";
    std::string patient = "SYN1";
    std::string game = "Synthetic";
    int n_joints = 20;
    std::int64_t n_frames = 1000;
    int n_instances = 6;
    std::uint64_t seed = 0;
    double rho_start = 0.9;
    double rho_end = 0.1;
    bool no_drift = false;
};

int run_synth(const SynthOptions& opt) {
    SynthSpec spec;
    int n_instances = opt.n_instances;
    if (!opt.spec_path.empty()) {
        spec = load_synth_spec(opt.spec_path);
        n_instances = spec.drift.empty() ? opt.n_instances : static_cast<int>(spec.drift.size());
    } else {
        spec.patient_id = opt.patient;
        spec.game_id = opt.game;
        spec.n_joints = opt.n_joints;
        spec.n_frames = opt.n_frames;
        spec.seed = opt.seed;
        spec.population_correlation = diffuse_correlation(opt.n_joints, opt.rho_start);
        if (!opt.no_drift) {
            spec.drift =
                correlation_ramp(opt.n_joints, opt.rho_start, opt.rho_end, opt.n_instances);
        }
    }
    const fs::path manifest_path = write_synth_cohort(spec, opt.output_dir, n_instances);
    std::cout << "wrote " << manifest_path.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recovery trajectories from random-graph posteriors of "
                 "joint-location time series"};
    app.require_subcommand(1);
    // Keys for a subcommand live in its section, e.g. [analyze] samples=4000;
    // command-line flags override file values.
    app.set_config("--config", "", "Read options from an INI/TOML file");

    CommonOptions analyze_opt;
    auto* analyze = app.add_subcommand(
        "analyze", "Run the full pipeline over a manifest of session CSVs");
    add_common_options(analyze, analyze_opt, true);
    analyze->add_option("--tau", analyze_opt.tau_list,
                        "Also export graph realizations at these cutoffs");
    analyze->add_flag("--dump-correlation", analyze_opt.dump_correlation,
                      "Write per-session correlation and partial-correlation CSVs");
    analyze->add_flag("--dump-samples", analyze_opt.dump_samples,
                      "Persist per-session sample sets (.rgss containers)");
    analyze->add_flag("--all-pairs", analyze_opt.all_pairs,
                      "Also write distances between all instance pairs (diagnostic only)");
    analyze->add_flag("--plot-json", analyze_opt.plot_json,
                      "Write plots.json with trajectory and recommendation series");

    CommonOptions graph_opt;
    auto* graph = app.add_subcommand(
        "graph", "Realize graphs at chosen cutoffs for each session");
    add_common_options(graph, graph_opt, true);
    graph->add_option("--tau", graph_opt.tau_list, "Cutoff values in [0, 1]")->required();

    std::string dist_later, dist_earlier, dist_out, dist_pair = "(1,2)";
    double dist_scale_h = kDefaultHellingerScale;
    double dist_scale_kl = kDefaultKlScale;
    auto* distance = app.add_subcommand(
        "distance", "Distance between two sample-set containers "
                    "(first argument is the later instance)");
    distance->add_option("later", dist_later, "Sample set of the later instance (.rgss)")
        ->required();
    distance->add_option("earlier", dist_earlier, "Sample set of the earlier instance (.rgss)")
        ->required();
    distance->add_option("--scale-hellinger", dist_scale_h, "")->capture_default_str();
    distance->add_option("--scale-kl", dist_scale_kl, "")->capture_default_str();
    distance->add_option("-o,--out", dist_out, "Write the CSV row here instead of stdout");
    distance->add_option("--pair", dist_pair, "Instance-pair label for the CSV row")
        ->capture_default_str();

    std::string traj_in, traj_out = "trajectory.csv";
    auto* trajectory = app.add_subcommand(
        "trajectory", "Fold a consecutive-pair distance CSV into a trajectory CSV");
    trajectory->add_option("distances", traj_in, "distances_<patient>_<game>.csv")->required();
    trajectory->add_option("-o,--out", traj_out, "Output CSV")->capture_default_str();

    std::vector<std::string> rec_files;
    std::string rec_manifest, rec_out = "recommendation.csv";
    auto* recommend = app.add_subcommand(
        "recommend", "Build the recommendation table from trajectory CSVs");
    recommend->add_option("trajectories", rec_files, "trajectory_<patient>_<game>.csv files")
        ->required();
    recommend->add_option("--manifest", rec_manifest,
                          "Manifest JSON supplying platform points when the "
                          "trajectories lack them");
    recommend->add_option("-o,--out", rec_out, "Output CSV")->capture_default_str();

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand(
        "synth", "Generate a synthetic cohort with known correlation structure");
    synth->add_option("--spec", synth_opt.spec_path, "Cohort spec JSON");
    synth->add_option("-o,--out", synth_opt.output_dir, "Output directory")
        ->capture_default_str();
    synth->add_option("--patient", synth_opt.patient, "")->capture_default_str();
    synth->add_option("--game", synth_opt.game, "")->capture_default_str();
    synth->add_option("--joints", synth_opt.n_joints, "")->capture_default_str();
    synth->add_option("--frames", synth_opt.n_frames, "Frames per session")
        ->capture_default_str();
    synth->add_option("--instances", synth_opt.n_instances, "")->capture_default_str();
    synth->add_option("--seed", synth_opt.seed, "")->capture_default_str();
    synth->add_option("--rho-start", synth_opt.rho_start,
                      "Chain correlation at the first instance")
        ->capture_default_str();
    synth->add_option("--rho-end", synth_opt.rho_end,
                      "Chain correlation at the last instance")
        ->capture_default_str();
    synth->add_flag("--no-drift", synth_opt.no_drift,
                    "Keep the correlation constant at rho-start across instances");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_analyze(analyze_opt);
        if (graph->parsed()) return run_graph(graph_opt);
        if (distance->parsed()) {
            return run_distance(dist_later, dist_earlier, dist_scale_h, dist_scale_kl,
                                dist_out, dist_pair);
        }
        if (trajectory->parsed()) return run_trajectory(traj_in, traj_out);
        if (recommend->parsed()) return run_recommend(rec_files, rec_manifest, rec_out);
        if (synth->parsed()) return run_synth(synth_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
