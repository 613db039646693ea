#ifndef RECOVGRAPH_PIPELINE_HPP
#define RECOVGRAPH_PIPELINE_HPP

#include "recovgraph/correlation.hpp"
#include "recovgraph/distance.hpp"
#include "recovgraph/graph.hpp"
#include "recovgraph/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace recovgraph {

/// Full configuration of an analysis run. Defaults follow the reference
/// protocol: 50,000 samples, uniform proposal, 20 joints, posterior scales
/// 1e15 (Hellinger) and 1e25 (KL).
struct RunConfig {
    std::filesystem::path manifest_path;                // either this ...
    std::vector<std::filesystem::path> session_files;   // ... or bare files
    std::filesystem::path output_dir;

    std::int64_t n_samples = 50000;
    Proposal proposal = Proposal::Uniform;
    std::uint64_t seed = 0;
    std::vector<double> tau_list;
    double scale_hellinger = kDefaultHellingerScale;
    double scale_kl = kDefaultKlScale;
    std::vector<double> ridge_ladder{std::begin(kDefaultRidgeLadder),
                                     std::end(kDefaultRidgeLadder)};
    int n_joints = 20;

    bool dump_correlation = false;
    bool dump_samples = false;
    bool all_pairs = false;
    bool direct_sampling = false;
    bool emit_plot_json = false;
    /// 0: use RECOVGRAPH_THREADS, falling back to the hardware thread count.
    int threads = 0;
};

struct GroupStatus {
    std::string patient_id;
    std::string game_id;
    std::string status;  // "ok", "incomplete", "failed"
    int n_instances_used = 0;
    std::vector<int> missing_instances;
    std::vector<std::string> session_errors;
};

struct RunReport {
    int sessions_processed = 0;
    int sessions_failed = 0;
    int trajectories_written = 0;
    std::vector<GroupStatus> groups;
    double wall_seconds = 0.0;
};

/// Runs the full analysis: location norms, standardization, correlation
/// structure, edge sampling, consecutive-pair distances, trajectories, and
/// the recommendation table, with all artifacts written under
/// config.output_dir. Session failures are isolated to their (patient, game)
/// group. Output is byte-identical for a fixed (inputs, config, seed) at any
/// thread count.
RunReport run_pipeline(const RunConfig& config);

/// Realizes graphs at each tau in config.tau_list for every session, writing
/// edge-list and adjacency CSVs under config.output_dir.
RunReport realize_graphs(const RunConfig& config);

/// Worker-pool size: config override, then RECOVGRAPH_THREADS, then the
/// hardware thread count.
int resolve_threads(const RunConfig& config);

/// File-name-safe form of an id (alphanumerics, '-', '.' kept).
std::string sanitize_id(const std::string& id);

} // namespace recovgraph

#endif
