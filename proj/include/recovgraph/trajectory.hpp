#ifndef RECOVGRAPH_TRAJECTORY_HPP
#define RECOVGRAPH_TRAJECTORY_HPP

#include "recovgraph/distance.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recovgraph {

/// Distance between a consecutive pair of instances of one (patient, game).
struct InstanceDistance {
    int from_instance = 0;  // j - 1
    int to_instance = 0;    // j
    DistanceResult distance;
};

/// Mobility recovery score trajectory for one (patient, game):
/// score(1) = 0, score(j) = step(j-1, j) + score(j-1), in a Hellinger and a
/// KL variant. The per-step distances are kept as the rate vectors.
struct RecoveryTrajectory {
    std::string patient_id;
    std::string game_id;
    std::vector<double> mrs_hellinger;  // length n_instances
    std::vector<double> mrs_kl;         // length n_instances
    std::vector<double> rate_hellinger; // length n_instances - 1
    std::vector<double> rate_kl;        // length n_instances - 1
    /// Platform-assigned points, pass-through metadata; never used in scores.
    std::vector<std::optional<int>> platform_points;

    int n_instances() const { return static_cast<int>(mrs_hellinger.size()); }
};

/// One row of the recommendation analysis.
struct RecoveryPoint {
    std::string patient_id;
    std::string game_id;
    double alpha = 0.0;
    std::optional<int> initial_score;  // platform points at the first instance
    int n_instances = 0;
};

/// Folds ordered consecutive-pair distances into a trajectory. The input must
/// cover pairs (1,2), (2,3), ... contiguously; a gap raises ContractError
/// naming the missing pair. An empty input yields the single-point
/// trajectory [0].
RecoveryTrajectory mrs_trajectory(std::span<const InstanceDistance> steps);

/// Normalized range of the KL-based score:
/// (score(n_max) - score(2)) / score(n_max).
/// Throws DataError when |score(n_max)| < 1e-12 (undefined alpha) or the
/// trajectory has fewer than two instances.
double recovery_parameter(const RecoveryTrajectory& trajectory);

/// Filters to trajectories with at least four instances and groups by game.
/// Rows within a game keep their input order.
std::map<std::string, std::vector<RecoveryPoint>> recommendation_table(
    std::span<const RecoveryPoint> points);

/// CSV with columns instance,mrs_hellinger,mrs_kl,rate_hellinger,rate_kl,
/// platform_points. Rates are blank on the first row; points are blank when
/// absent.
void write_trajectory_csv(const std::filesystem::path& path,
                          const RecoveryTrajectory& trajectory);
RecoveryTrajectory read_trajectory_csv(const std::filesystem::path& path);

/// CSV with columns game,patient,initial_score,alpha,n_instances, filtered
/// and grouped as in recommendation_table.
void write_recommendation_csv(const std::filesystem::path& path,
                              std::span<const RecoveryPoint> points);

} // namespace recovgraph

#endif
