#include "recovgraph/trajectory.hpp"

#include "recovgraph/csvio.hpp"
#include "recovgraph/errors.hpp"

#include <cmath>
#include <fstream>

namespace recovgraph {

RecoveryTrajectory mrs_trajectory(std::span<const InstanceDistance> steps) {
    RecoveryTrajectory trajectory;
    const auto n_steps = static_cast<int>(steps.size());
    for (int i = 0; i < n_steps; ++i) {
        const int expected_from = i + 1;
        if (steps[static_cast<std::size_t>(i)].from_instance != expected_from ||
            steps[static_cast<std::size_t>(i)].to_instance != expected_from + 1) {
            throw ContractError("mrs_trajectory: expected pair (" +
                                std::to_string(expected_from) + ", " +
                                std::to_string(expected_from + 1) + "), got (" +
                                std::to_string(steps[static_cast<std::size_t>(i)].from_instance) +
                                ", " +
                                std::to_string(steps[static_cast<std::size_t>(i)].to_instance) +
                                ")");
        }
    }

    const int n_instances = n_steps + 1;
    trajectory.mrs_hellinger.assign(static_cast<std::size_t>(n_instances), 0.0);
    trajectory.mrs_kl.assign(static_cast<std::size_t>(n_instances), 0.0);
    trajectory.rate_hellinger.reserve(static_cast<std::size_t>(n_steps));
    trajectory.rate_kl.reserve(static_cast<std::size_t>(n_steps));
    trajectory.platform_points.assign(static_cast<std::size_t>(n_instances), std::nullopt);

    for (int i = 0; i < n_steps; ++i) {
        const DistanceResult& d = steps[static_cast<std::size_t>(i)].distance;
        trajectory.rate_hellinger.push_back(d.hellinger);
        trajectory.rate_kl.push_back(d.kl);
        trajectory.mrs_hellinger[static_cast<std::size_t>(i + 1)] =
            trajectory.mrs_hellinger[static_cast<std::size_t>(i)] + d.hellinger;
        trajectory.mrs_kl[static_cast<std::size_t>(i + 1)] =
            trajectory.mrs_kl[static_cast<std::size_t>(i)] + d.kl;
    }
    return trajectory;
}

double recovery_parameter(const RecoveryTrajectory& trajectory) {
    const int n = trajectory.n_instances();
    if (n < 2) {
        throw DataError("recovery_parameter: trajectory has fewer than two instances");
    }
    const double total = trajectory.mrs_kl[static_cast<std::size_t>(n - 1)];
    if (std::abs(total) < 1e-12) {
        throw DataError("recovery_parameter: KL score at the last instance is zero, "
                        "alpha is undefined");
    }
    const double at_second = trajectory.mrs_kl[1];
    return (total - at_second) / total;
}

std::map<std::string, std::vector<RecoveryPoint>> recommendation_table(
    std::span<const RecoveryPoint> points) {
    std::map<std::string, std::vector<RecoveryPoint>> by_game;
    for (const auto& point : points) {
        if (point.n_instances >= 4) {
            by_game[point.game_id].push_back(point);
        }
    }
    return by_game;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const RecoveryTrajectory& trajectory) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "instance,mrs_hellinger,mrs_kl,rate_hellinger,rate_kl,platform_points\n";
    for (int j = 0; j < trajectory.n_instances(); ++j) {
        const auto i = static_cast<std::size_t>(j);
        out << (j + 1) << ',' << format_double(trajectory.mrs_hellinger[i]) << ','
            << format_double(trajectory.mrs_kl[i]) << ',';
        if (j >= 1) out << format_double(trajectory.rate_hellinger[i - 1]);
        out << ',';
        if (j >= 1) out << format_double(trajectory.rate_kl[i - 1]);
        out << ',';
        if (i < trajectory.platform_points.size() && trajectory.platform_points[i]) {
            out << *trajectory.platform_points[i];
        }
        out << '\n';
    }
    if (!out.good()) {
        throw Error("write failed for " + path.string());
    }
}

RecoveryTrajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    const std::string where = path.filename().string();
    std::string line;
    if (!std::getline(in, line) ||
        csv_split(line) != std::vector<std::string>{"instance", "mrs_hellinger", "mrs_kl",
                                                    "rate_hellinger", "rate_kl",
                                                    "platform_points"}) {
        throw ParseError(where + ": not a trajectory CSV");
    }
    RecoveryTrajectory trajectory;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = csv_split(line);
        if (fields.size() != 6) {
            throw ParseError(where + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected 6");
        }
        const std::string context = where + ": row " + std::to_string(row);
        const long instance = parse_long(fields[0], context);
        if (instance != row) {
            throw ParseError(context + ": instance " + std::to_string(instance) +
                             " out of order");
        }
        trajectory.mrs_hellinger.push_back(parse_double(fields[1], context));
        trajectory.mrs_kl.push_back(parse_double(fields[2], context));
        if (row > 1) {
            trajectory.rate_hellinger.push_back(parse_double(fields[3], context));
            trajectory.rate_kl.push_back(parse_double(fields[4], context));
        }
        if (fields[5].empty()) {
            trajectory.platform_points.emplace_back(std::nullopt);
        } else {
            trajectory.platform_points.emplace_back(
                static_cast<int>(parse_long(fields[5], context)));
        }
    }
    if (trajectory.mrs_hellinger.empty()) {
        throw ParseError(where + ": no trajectory rows");
    }
    return trajectory;
}

void write_recommendation_csv(const std::filesystem::path& path,
                              std::span<const RecoveryPoint> points) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << "game,patient,initial_score,alpha,n_instances\n";
    for (const auto& [game, rows] : recommendation_table(points)) {
        for (const auto& point : rows) {
            out << csv_quote(game) << ',' << csv_quote(point.patient_id) << ',';
            if (point.initial_score) out << *point.initial_score;
            out << ',' << format_double(point.alpha) << ',' << point.n_instances << '\n';
        }
    }
    if (!out.good()) {
        throw Error("write failed for " + path.string());
    }
}

} // namespace recovgraph
