#include "recovgraph/trajectory.hpp"

#include "recovgraph/csvio.hpp"
#include "recovgraph/errors.hpp"
#include "recovgraph/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace recovgraph;

namespace {

std::vector<InstanceDistance> steps_from(const std::vector<double>& hellinger_steps,
                                         const std::vector<double>& kl_steps) {
    std::vector<InstanceDistance> steps;
    for (std::size_t i = 0; i < hellinger_steps.size(); ++i) {
        InstanceDistance step;
        step.from_instance = static_cast<int>(i) + 1;
        step.to_instance = static_cast<int>(i) + 2;
        step.distance.hellinger = hellinger_steps[i];
        step.distance.kl = i < kl_steps.size() ? kl_steps[i] : 0.0;
        steps.push_back(step);
    }
    return steps;
}

std::string printed(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8g", value);
    return buf;
}

} // namespace

TEST_CASE("reference six-instance trajectory reproduces its steps") {
    const std::vector<double> hell = {0.10604219, 0.10589288, 0.0040824151, 0.017579886,
                                      0.022596656};
    const std::vector<double> kl = {0.10995603, 2.5307512e-5, 2.4243133e-6, 2.3849898e-3,
                                    1.1390906e-3};
    const RecoveryTrajectory trajectory = mrs_trajectory(steps_from(hell, kl));

    REQUIRE(trajectory.n_instances() == 6);
    CHECK(trajectory.mrs_hellinger[0] == 0.0);
    CHECK(trajectory.mrs_kl[0] == 0.0);
    CHECK(trajectory.mrs_hellinger[1] == 0.10604219);

    for (std::size_t j = 1; j < 6; ++j) {
        const double diff_h = trajectory.mrs_hellinger[j] - trajectory.mrs_hellinger[j - 1];
        const double diff_kl = trajectory.mrs_kl[j] - trajectory.mrs_kl[j - 1];
        CHECK(printed(diff_h) == printed(hell[j - 1]));
        CHECK(printed(diff_kl) == printed(kl[j - 1]));
        CHECK(trajectory.rate_hellinger[j - 1] == hell[j - 1]);
        CHECK(trajectory.rate_kl[j - 1] == kl[j - 1]);
    }
}

TEST_CASE("single instance gives the trajectory [0]") {
    const RecoveryTrajectory trajectory = mrs_trajectory({});
    REQUIRE(trajectory.n_instances() == 1);
    CHECK(trajectory.mrs_hellinger[0] == 0.0);
    CHECK(trajectory.mrs_kl[0] == 0.0);
    CHECK(trajectory.rate_hellinger.empty());
}

TEST_CASE("all-zero distances give an all-zero trajectory") {
    const RecoveryTrajectory trajectory =
        mrs_trajectory(steps_from({0, 0, 0}, {0, 0, 0}));
    for (const double v : trajectory.mrs_hellinger) CHECK(v == 0.0);
    for (const double v : trajectory.mrs_kl) CHECK(v == 0.0);
}

TEST_CASE("gaps in the instance sequence name the missing pair") {
    std::vector<InstanceDistance> steps = steps_from({0.1, 0.2}, {0.1, 0.2});
    steps[1].from_instance = 3;
    steps[1].to_instance = 4;
    try {
        mrs_trajectory(steps);
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("(2, 3)") != std::string::npos);
    }
}

TEST_CASE("telescoping: final score equals the sum of steps") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> hell;
        std::vector<double> kl;
        const int n_steps = 1 + static_cast<int>(rng.next() % 30);
        for (int i = 0; i < n_steps; ++i) {
            hell.push_back(rng.uniform());
            kl.push_back(rng.uniform() * 2.0 - 1.0);
        }
        const RecoveryTrajectory trajectory = mrs_trajectory(steps_from(hell, kl));

        double total_h = 0.0;
        for (const double v : hell) total_h += v;
        CHECK(std::abs(trajectory.mrs_hellinger.back() - total_h) < 1e-12);

        // Non-negative steps make the Hellinger score non-decreasing.
        for (std::size_t j = 1; j < trajectory.mrs_hellinger.size(); ++j) {
            CHECK(trajectory.mrs_hellinger[j] >= trajectory.mrs_hellinger[j - 1]);
        }
    }
}

TEST_CASE("negative KL steps propagate without clamping") {
    const RecoveryTrajectory trajectory =
        mrs_trajectory(steps_from({0.1, 0.1}, {0.5, -0.3}));
    CHECK(trajectory.mrs_kl[1] == doctest::Approx(0.5));
    CHECK(trajectory.mrs_kl[2] == doctest::Approx(0.2));
    CHECK(trajectory.mrs_kl[2] < trajectory.mrs_kl[1]);
}

TEST_CASE("recovery parameter") {
    RecoveryTrajectory trajectory;
    trajectory.mrs_kl = {0.0, 0.1, 0.5};
    trajectory.mrs_hellinger = {0.0, 0.1, 0.5};
    CHECK(recovery_parameter(trajectory) == doctest::Approx(0.8).epsilon(1e-12));

    trajectory.mrs_kl = {0.0, 0.4, 0.4};
    CHECK(recovery_parameter(trajectory) == doctest::Approx(0.0));

    trajectory.mrs_kl = {0.0, 0.7};
    trajectory.mrs_hellinger = {0.0, 0.7};
    CHECK(recovery_parameter(trajectory) == doctest::Approx(0.0));

    trajectory.mrs_kl = {0.0, 1e-14};
    CHECK_THROWS_AS(recovery_parameter(trajectory), DataError);

    trajectory.mrs_kl = {0.0};
    trajectory.mrs_hellinger = {0.0};
    CHECK_THROWS_AS(recovery_parameter(trajectory), DataError);
}

TEST_CASE("recovery parameter is invariant under uniform step rescaling") {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> kl;
        for (int i = 0; i < 6; ++i) kl.push_back(rng.uniform() + 0.05);
        std::vector<double> scaled;
        const double factor = 1.0 + rng.uniform() * 99.0;
        for (const double v : kl) scaled.push_back(v * factor);

        RecoveryTrajectory a = mrs_trajectory(steps_from(std::vector<double>(6, 0.1), kl));
        RecoveryTrajectory b = mrs_trajectory(steps_from(std::vector<double>(6, 0.1), scaled));
        CHECK(recovery_parameter(a) ==
              doctest::Approx(recovery_parameter(b)).epsilon(1e-9));
    }
}

TEST_CASE("recommendation table filters and groups") {
    std::vector<RecoveryPoint> points;
    points.push_back({"p1", "Airplane", 0.8, 230, 6});
    points.push_back({"p2", "Airplane", 0.5, 300, 3});  // too few instances
    points.push_back({"p3", "Catch", 0.9, 150, 4});
    points.push_back({"p4", "Catch", 0.2, 400, 12});

    const auto table = recommendation_table(points);
    REQUIRE(table.size() == 2);
    CHECK(table.at("Airplane").size() == 1);
    CHECK(table.at("Airplane")[0].patient_id == "p1");
    REQUIRE(table.at("Catch").size() == 2);
    CHECK(table.at("Catch")[0].patient_id == "p3");
    CHECK(table.at("Catch")[1].patient_id == "p4");

    const auto empty_table = recommendation_table(std::vector<RecoveryPoint>{});
    CHECK(empty_table.empty());
}

TEST_CASE("trajectory CSV round trip") {
    RecoveryTrajectory trajectory = mrs_trajectory(
        steps_from({0.10604219, 0.0040824151}, {2.5307512e-5, -1.1390906e-3}));
    trajectory.platform_points = {230, std::nullopt, 290};

    const auto path =
        std::filesystem::temp_directory_path() / "recovgraph_trajectory_test.csv";
    write_trajectory_csv(path, trajectory);
    const RecoveryTrajectory back = read_trajectory_csv(path);

    CHECK(back.mrs_hellinger == trajectory.mrs_hellinger);
    CHECK(back.mrs_kl == trajectory.mrs_kl);
    CHECK(back.rate_hellinger == trajectory.rate_hellinger);
    CHECK(back.rate_kl == trajectory.rate_kl);
    REQUIRE(back.platform_points.size() == 3);
    CHECK(back.platform_points[0] == 230);
    CHECK_FALSE(back.platform_points[1].has_value());
    CHECK(back.platform_points[2] == 290);
}

TEST_CASE("recommendation CSV lists only qualifying rows") {
    std::vector<RecoveryPoint> points;
    points.push_back({"p1", "Catch", 0.75, 230, 6});
    points.push_back({"p2", "Catch", 0.5, std::nullopt, 2});

    const auto path =
        std::filesystem::temp_directory_path() / "recovgraph_recommendation_test.csv";
    write_recommendation_csv(path, points);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "game,patient,initial_score,alpha,n_instances");
    std::getline(in, line);
    CHECK(line == "Catch,p1,230,0.75,6");
    CHECK_FALSE(std::getline(in, line));
}
