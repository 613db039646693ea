#ifndef RECOVGRAPH_SYNTH_HPP
#define RECOVGRAPH_SYNTH_HPP

#include "recovgraph/ingest.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace recovgraph {

/// Synthetic cohort description: correlated Gaussian location channels with a
/// known population correlation, optionally drifting across instances to
/// model recovery as weakening inter-joint coupling.
struct SynthSpec {
    std::string patient_id = "SYN1";
    std::string game_id = "Synthetic";
    int n_joints = 20;
    std::int64_t n_frames = 1000;
    Eigen::MatrixXd population_correlation;  // symmetric positive definite, unit diagonal
    std::uint64_t seed = 0;
    /// When non-empty, instance j uses drift[j-1] instead of
    /// population_correlation.
    std::vector<Eigen::MatrixXd> drift;
};

/// Equicorrelated matrix: 1 on the diagonal, rho everywhere else.
Eigen::MatrixXd equicorrelated(int n_joints, double rho);

/// Chain (first-order autoregressive) correlation: entry (i, j) = rho^|i-j|.
/// Models joints coupled along a kinematic chain, the strongest coupling
/// between neighbours.
Eigen::MatrixXd chain_correlation(int n_joints, double rho);

/// Diffuse-coupling correlation: every joint pair carries a weak partial
/// correlation of fixed random sign, scaled by rho and kept inside the
/// positive-definite budget of the precision matrix for all rho in [0, 1].
/// Models whole-body compensation, where all joints co-move and the coupling
/// fades as rho decreases. The sign pattern is pinned by pattern_seed.
Eigen::MatrixXd diffuse_correlation(int n_joints, double rho,
                                    std::uint64_t pattern_seed = 977);

/// Diffuse-coupling matrices with rho stepping linearly from rho_start to
/// rho_end across n_instances. The default drift model: recovery as the
/// fading of inter-joint coupling.
std::vector<Eigen::MatrixXd> correlation_ramp(int n_joints, double rho_start,
                                              double rho_end, int n_instances);

/// Generates the instance-th session (1-based) of the cohort: frames of
/// correlated Gaussian location channels, emitted as (r, 0, 0) coordinate
/// triples with a +10 offset so the location norm reproduces the channel
/// exactly. Deterministic given (spec, instance).
RawSession generate_session(const SynthSpec& spec, int instance);

/// Parses a spec from JSON. population_correlation and drift entries are
/// either explicit matrices or {"type": "equicorrelated"|"chain"|"diffuse",
/// "rho": x}; drift may also be {"type": "ramp", "rho_start": a,
/// "rho_end": b, "n_instances": n}.
SynthSpec load_synth_spec(const std::filesystem::path& path);

/// Writes session CSVs named P<patient>_G<game>_J<j>.csv plus manifest.json
/// into directory. n_instances defaults to the drift length (or 1).
/// Returns the manifest path.
std::filesystem::path write_synth_cohort(const SynthSpec& spec,
                                         const std::filesystem::path& directory,
                                         int n_instances = 0);

} // namespace recovgraph

#endif
