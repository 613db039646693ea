#include "recovgraph/synth.hpp"

#include "recovgraph/correlation.hpp"
#include "recovgraph/errors.hpp"
#include "recovgraph/manifest.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace recovgraph;
namespace fs = std::filesystem;

TEST_CASE("generated sessions are reproducible from spec and seed") {
    SynthSpec spec;
    spec.n_joints = 4;
    spec.n_frames = 50;
    spec.seed = 2024;
    spec.population_correlation = equicorrelated(4, 0.3);
    const RawSession a = generate_session(spec, 1);
    const RawSession b = generate_session(spec, 1);
    CHECK(testutil::exact_equal(a.coords, b.coords));
    const RawSession other = generate_session(spec, 2);
    CHECK_FALSE(testutil::exact_equal(a.coords, other.coords));
}

TEST_CASE("channels are emitted as positive (r, 0, 0) triples") {
    SynthSpec spec;
    spec.n_joints = 3;
    spec.n_frames = 100;
    spec.seed = 7;
    spec.population_correlation = Eigen::MatrixXd::Identity(3, 3);
    const RawSession raw = generate_session(spec, 1);
    REQUIRE(raw.coords.cols() == 9);
    for (int j = 0; j < 3; ++j) {
        CHECK((raw.coords.col(3 * j).array() > 0.0).all());
        CHECK((raw.coords.col(3 * j + 1).array() == 0.0).all());
        CHECK((raw.coords.col(3 * j + 2).array() == 0.0).all());
    }
    // The location norm stage recovers the channel exactly.
    const Eigen::MatrixXd norms = location_norms(raw);
    for (int j = 0; j < 3; ++j) {
        CHECK(testutil::exact_equal(norms.col(j), raw.coords.col(3 * j)));
    }
}

TEST_CASE("independent channels estimate a near-identity correlation") {
    SynthSpec spec;
    spec.n_joints = 6;
    spec.n_frames = 10000;
    spec.seed = 99;
    spec.population_correlation = Eigen::MatrixXd::Identity(6, 6);
    const Eigen::MatrixXd corr = pearson_matrix(standardize(generate_session(spec, 1)));
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            if (i != j) CHECK(std::abs(corr(i, j)) < 0.05);
        }
    }
}

TEST_CASE("sample correlation converges at the Monte Carlo rate") {
    for (const std::int64_t q : {std::int64_t{1000}, std::int64_t{10000}}) {
        SynthSpec spec;
        spec.n_joints = 20;
        spec.n_frames = q;
        spec.seed = 1234;
        spec.population_correlation = equicorrelated(20, 0.5);
        const Eigen::MatrixXd corr = pearson_matrix(standardize(generate_session(spec, 1)));
        const double max_err =
            (corr - spec.population_correlation).cwiseAbs().maxCoeff();
        CHECK(max_err < 3.0 / std::sqrt(static_cast<double>(q)));
    }
}

TEST_CASE("non-positive-definite population correlation is rejected") {
    SynthSpec spec;
    spec.n_joints = 3;
    spec.n_frames = 10;
    spec.population_correlation = equicorrelated(3, -0.9);  // eigenvalue 1 - 2*0.9 < 0
    CHECK_THROWS_AS(generate_session(spec, 1), DataError);
}

TEST_CASE("drift list bounds are enforced") {
    SynthSpec spec;
    spec.n_joints = 3;
    spec.n_frames = 10;
    spec.drift = correlation_ramp(3, 0.9, 0.1, 2);
    CHECK_NOTHROW(generate_session(spec, 2));
    CHECK_THROWS_AS(generate_session(spec, 3), ContractError);
    CHECK_THROWS_AS(generate_session(spec, 0), ContractError);
}

TEST_CASE("diffuse correlation is a valid correlation family") {
    const Eigen::MatrixXd identity_limit = diffuse_correlation(8, 0.0);
    CHECK((identity_limit - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd strong = diffuse_correlation(8, 0.9);
    CHECK(strong.diagonal().isOnes(1e-12));
    CHECK((strong - strong.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(strong.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(strong);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    // Same pattern seed, weaker coupling: same sign structure.
    const Eigen::MatrixXd weak = diffuse_correlation(8, 0.1);
    for (int i = 0; i < 8; ++i) {
        for (int j = i + 1; j < 8; ++j) {
            CHECK(strong(i, j) * weak(i, j) >= 0.0);
            CHECK(std::abs(weak(i, j)) < std::abs(strong(i, j)) + 1e-12);
        }
    }
}

TEST_CASE("correlation ramp endpoints follow the requested coupling") {
    const auto ramp = correlation_ramp(6, 0.9, 0.1, 5);
    REQUIRE(ramp.size() == 5);
    CHECK(testutil::exact_equal(ramp.front(), diffuse_correlation(6, 0.9)));
    CHECK(testutil::exact_equal(ramp.back(), diffuse_correlation(6, 0.1)));
}

TEST_CASE("synthetic cohorts round-trip through CSV and manifest") {
    SynthSpec spec;
    spec.patient_id = "SYNX";
    spec.game_id = "Ramp";
    spec.n_joints = 4;
    spec.n_frames = 30;
    spec.seed = 5150;
    spec.drift = correlation_ramp(4, 0.8, 0.2, 3);

    const fs::path dir = fs::temp_directory_path() / "recovgraph_synth_cohort";
    fs::remove_all(dir);
    const fs::path manifest_path = write_synth_cohort(spec, dir);
    const Manifest manifest = load_manifest(manifest_path);
    REQUIRE(manifest.sessions.size() == 3);
    for (int j = 1; j <= 3; ++j) {
        const auto& ref = manifest.sessions[static_cast<std::size_t>(j - 1)];
        CHECK(ref.patient_id == "SYNX");
        CHECK(ref.game_id == "Ramp");
        CHECK(ref.instance == j);
        const RawSession back = read_session_csv(ref.path);
        const RawSession original = generate_session(spec, j);
        CHECK(testutil::exact_equal(back.coords, original.coords));  // shortest round-trip formatting
    }
}

TEST_CASE("synth spec JSON parsing") {
    const fs::path path = fs::temp_directory_path() / "recovgraph_synth_spec.json";
    {
        std::ofstream out(path);
        out << R"({
            "patient_id": "S1", "game_id": "G", "n_joints": 4, "n_frames": 64,
            "seed": 17,
            "population_correlation": {"type": "equicorrelated", "rho": 0.4},
            "drift": {"type": "ramp", "rho_start": 0.9, "rho_end": 0.1, "n_instances": 4}
        })";
    }
    const SynthSpec spec = load_synth_spec(path);
    CHECK(spec.patient_id == "S1");
    CHECK(spec.n_joints == 4);
    CHECK(spec.n_frames == 64);
    CHECK(spec.seed == 17);
    CHECK(spec.population_correlation(0, 1) == 0.4);
    REQUIRE(spec.drift.size() == 4);
    CHECK(testutil::exact_equal(spec.drift[0], diffuse_correlation(4, 0.9)));

    const fs::path bad = fs::temp_directory_path() / "recovgraph_synth_bad.json";
    {
        std::ofstream out(bad);
        out << R"({"n_joints": 1})";
    }
    CHECK_THROWS_AS(load_synth_spec(bad), ParseError);
}
