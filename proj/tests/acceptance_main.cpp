// Acceptance suite: one check per release criterion, each printed as a
// PASS/FAIL line with its runtime. Exits non-zero if any criterion fails.

#include "recovgraph/correlation.hpp"
#include "recovgraph/csvio.hpp"
#include "recovgraph/distance.hpp"
#include "recovgraph/graph.hpp"
#include "recovgraph/pipeline.hpp"
#include "recovgraph/rng.hpp"
#include "recovgraph/synth.hpp"
#include "recovgraph/trajectory.hpp"

#include "oracle_quadrature.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace recovgraph;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0: no limit
    std::function<bool(std::string&)> run;
};

bool nearly(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// --- criterion 1: closed form vs quadrature oracle ------------------------

bool criterion_bracket_oracle(std::string& detail) {
    double worst = 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double s = 0.1 * i;
        worst = std::max(worst,
                         std::abs(edge_marginal_bracket(s) - oracle::marginal_bracket(s)));
    }
    detail = "max |closed form - quadrature| = " + format_double(worst);
    return worst < 1e-8;
}

// --- criterion 2: edge-posterior normalization -----------------------------

bool criterion_normalization(std::string& detail) {
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double psi = rng.uniform() * 2.0 - 1.0;
        const EdgeMarginal marginal(psi);
        worst = std::max(worst, std::abs(marginal.m0() + marginal.m1() - 1.0));
    }
    detail = "max |m(0)+m(1)-1| = " + format_double(worst);
    return worst < 1e-12;
}

// --- criterion 3: sampler convergence at psi = 0.8 -------------------------

bool criterion_sampler_convergence(std::string& detail) {
    // Recompute the target from the quadrature oracle before testing.
    const double target = oracle::edge_posterior(1, 0.8);
    if (!nearly(target, 0.7186, 5e-4)) {
        detail = "oracle target " + format_double(target) + " is not near 0.7186";
        return false;
    }
    Eigen::MatrixXd partial(2, 2);
    partial << 1, 0.8, 0.8, 1;
    const GraphSampleSet set = sample_edges(partial, 50000, Proposal::Uniform, 8080);
    detail = "nu = " + format_double(set.edge_freq[0]) + ", target = " +
             format_double(target);
    return std::abs(set.edge_freq[0] - target) < 0.01;
}

// --- criterion 4: proposal robustness on a synthetic trajectory ------------

std::vector<double> hellinger_mrs(const SynthSpec& spec, int n_instances,
                                  std::int64_t n_samples, Proposal proposal) {
    std::vector<double> mrs{0.0};
    std::vector<double> prev;
    for (int j = 1; j <= n_instances; ++j) {
        const SessionSeries series = standardize(generate_session(spec, j));
        const CorrelationStructure cs = correlation_structure(series);
        SampleOptions options;
        options.n_samples = n_samples;
        options.proposal = proposal;
        options.seed = stream_seed(spec.seed, static_cast<std::uint64_t>(j));
        GraphSampleSet samples = sample_edges(cs.partial, options);
        if (!prev.empty()) {
            mrs.push_back(mrs.back() + hellinger(samples.log_posterior, prev));
        }
        prev = std::move(samples.log_posterior);
    }
    return mrs;
}

bool criterion_proposal_robustness(std::string& detail) {
    SynthSpec spec;
    spec.n_joints = 5;
    spec.n_frames = 1000;
    spec.seed = 4242;
    spec.drift = correlation_ramp(5, 0.9, 0.1, 6);

    const std::vector<double> uniform_mrs =
        hellinger_mrs(spec, 6, 50000, Proposal::Uniform);
    const std::vector<double> bernoulli_mrs =
        hellinger_mrs(spec, 6, 50000, Proposal::Bernoulli);

    double worst = 0.0;
    for (std::size_t j = 1; j < uniform_mrs.size(); ++j) {
        worst = std::max(worst, std::abs(uniform_mrs[j] - bernoulli_mrs[j]) /
                                    std::abs(uniform_mrs[j]));
    }
    detail = "worst step-wise relative difference = " + format_double(worst);
    return worst < 0.05;
}

// --- criterion 5: reference-table consistency ------------------------------

bool criterion_table_consistency(std::string& detail) {
    const std::vector<double> steps = {0.10604219, 0.10589288, 0.0040824151,
                                       0.017579886, 0.022596656};
    std::vector<InstanceDistance> distances;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        InstanceDistance d;
        d.from_instance = static_cast<int>(i) + 1;
        d.to_instance = static_cast<int>(i) + 2;
        d.distance.hellinger = steps[i];
        distances.push_back(d);
    }
    const RecoveryTrajectory trajectory = mrs_trajectory(distances);
    if (trajectory.mrs_hellinger[0] != 0.0) {
        detail = "score at the first instance is not 0";
        return false;
    }
    for (std::size_t j = 1; j < trajectory.mrs_hellinger.size(); ++j) {
        char diff_text[32];
        char step_text[32];
        std::snprintf(diff_text, sizeof(diff_text), "%.8g",
                      trajectory.mrs_hellinger[j] - trajectory.mrs_hellinger[j - 1]);
        std::snprintf(step_text, sizeof(step_text), "%.8g", steps[j - 1]);
        if (std::string(diff_text) != step_text) {
            detail = "difference " + std::string(diff_text) + " != step " + step_text;
            return false;
        }
    }
    detail = "all 5 successive differences reproduce the inputs to 8 digits";
    return true;
}

// --- criterion 6: distance axioms ------------------------------------------

bool criterion_distance_axioms(std::string& detail) {
    Rng rng(616);
    for (int i = 0; i < 50; ++i) {
        const double psi_a = rng.uniform() * 2.0 - 1.0;
        const double psi_b = rng.uniform() * 2.0 - 1.0;
        Eigen::MatrixXd pa(4, 4);
        pa.setIdentity();
        pa(0, 1) = pa(1, 0) = psi_a;
        pa(2, 3) = pa(3, 2) = psi_b;
        Eigen::MatrixXd pb = pa;
        pb(0, 2) = pb(2, 0) = psi_b / 2.0;

        const auto seed = static_cast<std::uint64_t>(1000 + i);
        const GraphSampleSet a = sample_edges(pa, 2000, Proposal::Uniform, seed);
        const GraphSampleSet a_again = sample_edges(pa, 2000, Proposal::Uniform, seed);
        const GraphSampleSet b = sample_edges(pb, 2000, Proposal::Uniform, seed + 500);

        if (hellinger(a, a_again) != 0.0 || kl_divergence(a, a_again) != 0.0) {
            detail = "identical sample sets have nonzero distance at trial " +
                     std::to_string(i);
            return false;
        }
        if (hellinger(a, b) != hellinger(b, a)) {
            detail = "hellinger asymmetry at trial " + std::to_string(i);
            return false;
        }
    }
    detail = "identity and symmetry exact over 50 seeded pairs";
    return true;
}

// --- criterion 7: end-to-end recovery detection ----------------------------

bool criterion_recovery_detection(std::string& detail) {
    const int n_seeds = 20;
    const int n_instances = 6;
    int detected = 0;
    double worst_ratio = 1e300;
    for (int seed = 0; seed < n_seeds; ++seed) {
        SynthSpec drift;
        drift.n_joints = 20;
        drift.n_frames = 1000;
        drift.seed = 7000 + static_cast<std::uint64_t>(seed);
        drift.drift = correlation_ramp(20, 0.9, 0.1, n_instances);

        SynthSpec control = drift;
        control.drift.clear();
        control.population_correlation = diffuse_correlation(20, 0.9);

        const double drift_mrs =
            hellinger_mrs(drift, n_instances, 50000, Proposal::Uniform).back();
        const double control_mrs =
            hellinger_mrs(control, n_instances, 50000, Proposal::Uniform).back();
        const double ratio = drift_mrs / control_mrs;
        worst_ratio = std::min(worst_ratio, ratio);
        if (ratio >= 5.0) ++detected;
    }
    detail = std::to_string(detected) + "/20 seeds detected (worst ratio " +
             format_double(worst_ratio) + ")";
    return detected >= 19;
}

// --- criterion 8: partial-correlation correctness ---------------------------

bool criterion_partial_correlation(std::string& detail) {
    const auto [precision, lambda] = precision_matrix(equicorrelated(3, 0.5));
    const Eigen::MatrixXd partial = partial_correlation(precision);
    double worst_analytic = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j) {
                worst_analytic =
                    std::max(worst_analytic, std::abs(partial(i, j) - 1.0 / 3.0));
            }
        }
    }
    if (lambda != 0.0 || worst_analytic >= 1e-12) {
        detail = "analytic path off by " + format_double(worst_analytic);
        return false;
    }

    SynthSpec spec;
    spec.n_joints = 3;
    spec.n_frames = 10000;
    spec.seed = 888;
    spec.population_correlation = equicorrelated(3, 0.5);
    const CorrelationStructure cs =
        correlation_structure(standardize(generate_session(spec, 1)));
    double worst_estimated = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j) {
                worst_estimated =
                    std::max(worst_estimated, std::abs(cs.partial(i, j) - 1.0 / 3.0));
            }
        }
    }
    detail = "analytic error " + format_double(worst_analytic) + ", estimated error " +
             format_double(worst_estimated);
    return worst_estimated < 0.05;
}

// --- criterion 9: determinism ------------------------------------------------

bool criterion_determinism(std::string& detail) {
    SynthSpec spec;
    spec.patient_id = "42";
    spec.game_id = "Det";
    spec.n_joints = 20;
    spec.n_frames = 400;
    spec.seed = 99;
    spec.drift = correlation_ramp(20, 0.9, 0.3, 4);
    const fs::path cohort = fresh_dir("recovgraph_acc_det_cohort");
    write_synth_cohort(spec, cohort);

    const fs::path out_a = fresh_dir("recovgraph_acc_det_a");
    const fs::path out_b = fresh_dir("recovgraph_acc_det_b");
    const fs::path out_c = fresh_dir("recovgraph_acc_det_c");
    int threads = 1;
    for (const auto& out : {out_a, out_b, out_c}) {
        RunConfig config;
        config.manifest_path = cohort / "manifest.json";
        config.output_dir = out;
        config.n_samples = 20000;
        config.seed = 1234;
        config.n_joints = 20;
        config.dump_correlation = true;
        config.tau_list = {0.2};
        config.threads = threads;
        threads += 3;  // 1, 4, 7
        run_pipeline(config);
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(out_a)) {
        const std::string name = entry.path().filename().string();
        if (name == "run_metadata.json") continue;  // carries timings
        const std::string reference = slurp(entry.path());
        if (reference != slurp(out_b / name) || reference != slurp(out_c / name)) {
            detail = name + " differs across runs";
            return false;
        }
        ++compared;
    }
    detail = std::to_string(compared) + " artifacts byte-identical at threads 1/4/7";
    return compared > 0;
}

// --- criterion 10: monotonicity ----------------------------------------------

bool criterion_monotonicity(std::string& detail) {
    Rng rng(1010);
    for (int trial = 0; trial < 100; ++trial) {
        // Random trajectory built from genuine Hellinger values of sampled
        // session pairs at small size.
        std::vector<InstanceDistance> steps;
        const int n_steps = 2 + static_cast<int>(rng.next() % 5);
        std::vector<double> prev;
        for (int j = 0; j <= n_steps; ++j) {
            Eigen::MatrixXd partial(4, 4);
            partial.setIdentity();
            partial(0, 1) = partial(1, 0) = rng.uniform() * 1.8 - 0.9;
            partial(2, 3) = partial(3, 2) = rng.uniform() * 1.8 - 0.9;
            GraphSampleSet set = sample_edges(
                partial, 500, Proposal::Uniform,
                static_cast<std::uint64_t>(trial * 100 + j));
            if (!prev.empty()) {
                InstanceDistance step;
                step.from_instance = j;
                step.to_instance = j + 1;
                step.distance.hellinger = hellinger(set.log_posterior, prev);
                step.distance.kl = kl_divergence(set.log_posterior, prev);
                steps.push_back(step);
            }
            prev = std::move(set.log_posterior);
        }
        const RecoveryTrajectory trajectory = mrs_trajectory(steps);
        for (std::size_t j = 1; j < trajectory.mrs_hellinger.size(); ++j) {
            if (trajectory.mrs_hellinger[j] < trajectory.mrs_hellinger[j - 1]) {
                detail = "score decreased at trial " + std::to_string(trial);
                return false;
            }
        }
    }

    // Realizations nested across the tau grid.
    Eigen::MatrixXd partial(6, 6);
    partial.setIdentity();
    Rng grid_rng(77);
    for (int s = 0; s < 6; ++s) {
        for (int t = s + 1; t < 6; ++t) {
            partial(s, t) = partial(t, s) = grid_rng.uniform() * 1.6 - 0.8;
        }
    }
    const GraphSampleSet set = sample_edges(partial, 10000, Proposal::Uniform, 345);
    GraphRealization prev_realization = realize_graph(set, 0.1);
    for (int i = 2; i <= 9; ++i) {
        const GraphRealization next = realize_graph(set, 0.1 * i);
        if (!((prev_realization.adjacency - next.adjacency).array() >= 0).all()) {
            detail = "edge sets not nested between tau " + format_double(0.1 * (i - 1)) +
                     " and " + format_double(0.1 * i);
            return false;
        }
        prev_realization = next;
    }
    detail = "100 trajectories non-decreasing; realizations nested over 9 cutoffs";
    return true;
}

} // namespace

int main() {
    std::vector<Criterion> criteria;
    criteria.push_back({1, "closed-form bracket matches quadrature oracle (1e-8)", 1.0,
                        criterion_bracket_oracle});
    criteria.push_back({2, "edge-posterior normalization (1e-12, 1000 draws)", 1.0,
                        criterion_normalization});
    criteria.push_back({3, "sampler convergence at psi=0.8, N=50k (0.01)", 5.0,
                        criterion_sampler_convergence});
    criteria.push_back({4, "uniform vs bernoulli proposal MRS agreement (5%)", 120.0,
                        criterion_proposal_robustness});
    criteria.push_back({5, "reference-table recursion consistency (8 digits)", 0.0,
                        criterion_table_consistency});
    criteria.push_back({6, "distance axioms exact over 50 seeded pairs", 10.0,
                        criterion_distance_axioms});
    criteria.push_back({7, "drift cohort MRS >= 5x control in >= 19/20 seeds", 300.0,
                        criterion_recovery_detection});
    criteria.push_back({8, "equicorrelated partial correlation (1e-12 / 0.05)", 0.0,
                        criterion_partial_correlation});
    criteria.push_back({9, "byte-identical pipeline outputs across thread counts", 0.0,
                        criterion_determinism});
    criteria.push_back({10, "MRS monotonicity and nested realizations", 0.0,
                        criterion_monotonicity});

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.time_limit_s > 0.0 && seconds > criterion.time_limit_s) {
            ok = false;
            detail += " [exceeded " + format_double(criterion.time_limit_s) + " s budget]";
        }
        std::printf("%s criterion %2d: %s (%.2f s) — %s\n", ok ? "PASS" : "FAIL",
                    criterion.id, criterion.name.c_str(), seconds, detail.c_str());
        if (!ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
    } else {
        std::printf("all %zu criteria passed\n", criteria.size());
    }
    return failures == 0 ? 0 : 1;
}
