#ifndef RECOVGRAPH_INGEST_HPP
#define RECOVGRAPH_INGEST_HPP

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace recovgraph {

/// One recorded play-through: per-frame (x, y, z) coordinates of the tracked
/// joints, or pre-computed location values when `prenormed` is set.
struct RawSession {
    std::string patient_id;
    std::string game_id;
    int instance = 1;
    std::vector<std::string> joint_names;
    /// frames x (3 * joints) spatial coordinates, or frames x joints location
    /// values when prenormed.
    Eigen::MatrixXd coords;
    bool prenormed = false;
    /// Recording interval in seconds; metadata only, never used in analysis.
    double sample_interval = 1.0 / 30.0;

    Eigen::Index frame_count() const { return coords.rows(); }
    Eigen::Index n_joints() const {
        return prenormed ? coords.cols() : coords.cols() / 3;
    }
};

/// Per-column standardized joint-location time series for one session.
/// Column means and standard deviations are retained for provenance.
struct SessionSeries {
    std::string patient_id;
    std::string game_id;
    int instance = 1;
    std::vector<std::string> joint_names;
    Eigen::MatrixXd values;          // frames x joints, standardized
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_stds;
    std::vector<std::uint8_t> degenerate;  // constant input columns, zero-filled

    Eigen::Index q() const { return values.rows(); }
    Eigen::Index n_joints() const { return values.cols(); }
};

/// Euclidean norm of each joint's (x, y, z) vector, per frame.
/// For prenormed sessions returns the absolute value of the stored column.
Eigen::MatrixXd location_norms(const RawSession& raw);

/// Centers each column by its sample mean (divisor q) and divides by the
/// sample standard deviation (divisor q - 1). Constant columns are flagged
/// degenerate and zero-filled instead of producing NaNs.
SessionSeries standardize(const Eigen::MatrixXd& norms);

/// location_norms + standardize, carrying over session metadata.
SessionSeries standardize(const RawSession& raw);

/// Reads one session CSV. Accepts two header layouts:
///   <name>_x,<name>_y,<name>_z per joint  (coordinate triples), or
///   <name>_r per joint                    (pre-computed location values).
/// Metadata is filled from the filename when it matches
/// P<patient>_G<game>_J<instance>.csv.
RawSession read_session_csv(const std::filesystem::path& path);

/// Extracts (patient, game, instance) from a P<id>_G<name>_J<n>.csv name.
/// Returns false when the name does not match.
bool parse_session_filename(const std::string& filename, std::string& patient,
                            std::string& game, int& instance);

/// Writes a session CSV in the coordinate-triple layout read_session_csv accepts.
void write_session_csv(const std::filesystem::path& path, const RawSession& raw);

} // namespace recovgraph

#endif
