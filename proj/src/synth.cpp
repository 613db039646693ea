#include "recovgraph/synth.hpp"

#include "recovgraph/errors.hpp"
#include "recovgraph/manifest.hpp"
#include "recovgraph/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace recovgraph {

Eigen::MatrixXd equicorrelated(int n_joints, double rho) {
    Eigen::MatrixXd mat = Eigen::MatrixXd::Constant(n_joints, n_joints, rho);
    mat.diagonal().setOnes();
    return mat;
}

Eigen::MatrixXd chain_correlation(int n_joints, double rho) {
    Eigen::MatrixXd mat(n_joints, n_joints);
    for (int i = 0; i < n_joints; ++i) {
        for (int j = 0; j < n_joints; ++j) {
            mat(i, j) = std::pow(rho, std::abs(i - j));
        }
    }
    return mat;
}

Eigen::MatrixXd diffuse_correlation(int n_joints, double rho, std::uint64_t pattern_seed) {
    if (rho < 0.0 || rho > 1.0) {
        throw ContractError("diffuse_correlation: rho outside [0, 1]");
    }
    Rng pattern_rng(pattern_seed);
    Eigen::MatrixXd signs = Eigen::MatrixXd::Zero(n_joints, n_joints);
    for (int i = 0; i < n_joints; ++i) {
        for (int j = i + 1; j < n_joints; ++j) {
            signs(i, j) = signs(j, i) = (pattern_rng.next() >> 63) ? 1.0 : -1.0;
        }
    }
    // Scale the coupling so the precision matrix keeps a 5% spectral margin
    // at rho = 1.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(signs);
    const double radius = std::max(std::abs(eig.eigenvalues().minCoeff()),
                                   std::abs(eig.eigenvalues().maxCoeff()));
    const double coupling = radius > 0.0 ? 0.95 * rho / radius : 0.0;
    const Eigen::MatrixXd precision =
        Eigen::MatrixXd::Identity(n_joints, n_joints) - coupling * signs;
    Eigen::MatrixXd sigma = precision.inverse();
    const Eigen::VectorXd inv_sqrt = sigma.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = inv_sqrt.asDiagonal() * sigma * inv_sqrt.asDiagonal();
    corr = ((corr + corr.transpose()) / 2.0).eval();
    corr.diagonal().setOnes();
    return corr;
}

std::vector<Eigen::MatrixXd> correlation_ramp(int n_joints, double rho_start,
                                              double rho_end, int n_instances) {
    if (n_instances < 1) {
        throw ContractError("correlation_ramp: need at least one instance");
    }
    std::vector<Eigen::MatrixXd> ramp;
    ramp.reserve(static_cast<std::size_t>(n_instances));
    for (int j = 0; j < n_instances; ++j) {
        double rho = rho_start;
        if (n_instances > 1) {
            rho = j == n_instances - 1
                      ? rho_end
                      : rho_start + (rho_end - rho_start) * static_cast<double>(j) /
                                        static_cast<double>(n_instances - 1);
        }
        ramp.push_back(diffuse_correlation(n_joints, rho));
    }
    return ramp;
}

RawSession generate_session(const SynthSpec& spec, int instance) {
    if (instance < 1) {
        throw ContractError("generate_session: instance indices are 1-based");
    }
    const Eigen::MatrixXd* correlation = &spec.population_correlation;
    if (!spec.drift.empty()) {
        if (instance > static_cast<int>(spec.drift.size())) {
            throw ContractError("generate_session: instance " + std::to_string(instance) +
                                " beyond drift list of length " +
                                std::to_string(spec.drift.size()));
        }
        correlation = &spec.drift[static_cast<std::size_t>(instance - 1)];
    }
    const int s = spec.n_joints;
    if (correlation->rows() != s || correlation->cols() != s) {
        throw DataError("generate_session: correlation matrix is " +
                        std::to_string(correlation->rows()) + "x" +
                        std::to_string(correlation->cols()) + ", expected " +
                        std::to_string(s) + "x" + std::to_string(s));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(*correlation);
    if (llt.info() != Eigen::Success) {
        throw DataError("generate_session: population correlation is not positive definite");
    }
    const Eigen::MatrixXd chol_lower = llt.matrixL();

    Rng rng(stream_seed(spec.seed, static_cast<std::uint64_t>(instance)));
    const std::int64_t q = spec.n_frames;
    Eigen::MatrixXd gauss(q, s);
    for (std::int64_t t = 0; t < q; ++t) {
        for (int j = 0; j < s; j += 2) {
            const auto pair = rng.normal_pair();
            gauss(t, j) = pair[0];
            if (j + 1 < s) gauss(t, j + 1) = pair[1];
        }
    }

    // Row t of gauss * L^T has the requested population correlation. The +10
    // offset keeps every channel positive, so the location norm of (r, 0, 0)
    // recovers the channel without folding.
    const Eigen::MatrixXd channels = (gauss * chol_lower.transpose()).array() + 10.0;

    RawSession raw;
    raw.patient_id = spec.patient_id;
    raw.game_id = spec.game_id;
    raw.instance = instance;
    raw.coords = Eigen::MatrixXd::Zero(q, 3 * s);
    for (int j = 0; j < s; ++j) {
        raw.coords.col(3 * j) = channels.col(j);
        raw.joint_names.push_back("joint" + std::to_string(j + 1));
    }
    return raw;
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& node, int n_joints,
                                 const std::string& where) {
    if (node.is_array()) {
        const auto rows = node.size();
        if (rows == 0 || static_cast<int>(rows) != n_joints) {
            throw ParseError(where + ": expected a " + std::to_string(n_joints) + "x" +
                             std::to_string(n_joints) + " matrix");
        }
        Eigen::MatrixXd mat(n_joints, n_joints);
        for (int i = 0; i < n_joints; ++i) {
            const auto& row = node[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != n_joints) {
                throw ParseError(where + ": row " + std::to_string(i + 1) +
                                 " has the wrong length");
            }
            for (int j = 0; j < n_joints; ++j) {
                mat(i, j) = row[static_cast<std::size_t>(j)].get<double>();
            }
        }
        return mat;
    }
    if (node.is_object()) {
        const std::string type = node.value("type", "");
        if (type == "equicorrelated") return equicorrelated(n_joints, node.at("rho").get<double>());
        if (type == "chain") return chain_correlation(n_joints, node.at("rho").get<double>());
        if (type == "diffuse") {
            return diffuse_correlation(n_joints, node.at("rho").get<double>(),
                                       node.value("pattern_seed", std::uint64_t{977}));
        }
        throw ParseError(where + ": unknown correlation type '" + type + "'");
    }
    throw ParseError(where + ": expected a matrix or a typed correlation object");
}

} // namespace

SynthSpec load_synth_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    SynthSpec spec;
    spec.patient_id = doc.value("patient_id", spec.patient_id);
    spec.game_id = doc.value("game_id", spec.game_id);
    spec.n_joints = doc.value("n_joints", spec.n_joints);
    spec.n_frames = doc.value("n_frames", spec.n_frames);
    spec.seed = doc.value("seed", spec.seed);
    if (spec.n_joints < 2) {
        throw ParseError(path.string() + ": n_joints must be at least 2");
    }
    if (spec.n_frames < 3) {
        throw ParseError(path.string() + ": n_frames must be at least 3");
    }

    if (doc.contains("population_correlation")) {
        spec.population_correlation = matrix_from_json(
            doc["population_correlation"], spec.n_joints,
            path.string() + ": population_correlation");
    } else {
        spec.population_correlation = Eigen::MatrixXd::Identity(spec.n_joints, spec.n_joints);
    }

    if (doc.contains("drift")) {
        const auto& drift = doc["drift"];
        if (drift.is_object() && drift.value("type", "") == "ramp") {
            spec.drift = correlation_ramp(spec.n_joints, drift.at("rho_start").get<double>(),
                                          drift.at("rho_end").get<double>(),
                                          drift.at("n_instances").get<int>());
        } else if (drift.is_array()) {
            for (std::size_t j = 0; j < drift.size(); ++j) {
                spec.drift.push_back(matrix_from_json(
                    drift[j], spec.n_joints,
                    path.string() + ": drift[" + std::to_string(j) + "]"));
            }
        } else {
            throw ParseError(path.string() + ": drift must be a matrix list or a ramp object");
        }
    }
    return spec;
}

std::filesystem::path write_synth_cohort(const SynthSpec& spec,
                                         const std::filesystem::path& directory,
                                         int n_instances) {
    if (n_instances <= 0) {
        n_instances = spec.drift.empty() ? 1 : static_cast<int>(spec.drift.size());
    }
    std::filesystem::create_directories(directory);

    Manifest manifest;
    for (int j = 1; j <= n_instances; ++j) {
        const RawSession session = generate_session(spec, j);
        const std::string name =
            "P" + spec.patient_id + "_G" + spec.game_id + "_J" + std::to_string(j) + ".csv";
        write_session_csv(directory / name, session);
        SessionRef ref;
        ref.path = name;
        ref.patient_id = spec.patient_id;
        ref.game_id = spec.game_id;
        ref.instance = j;
        manifest.sessions.push_back(std::move(ref));
    }
    const std::filesystem::path manifest_path = directory / "manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

} // namespace recovgraph
