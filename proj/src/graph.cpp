#include "recovgraph/graph.hpp"

#include "recovgraph/errors.hpp"
#include "recovgraph/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

namespace recovgraph {

std::string to_string(Proposal p) {
    return p == Proposal::Uniform ? "uniform" : "bernoulli";
}

Proposal proposal_from_string(const std::string& name) {
    if (name == "uniform") return Proposal::Uniform;
    if (name == "bernoulli") return Proposal::Bernoulli;
    throw ParseError("unknown proposal '" + name + "', expected uniform or bernoulli");
}

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;     // 1/sqrt(2)

// Adaptive Simpson on [a, b] with absolute tolerance tol.
double adaptive_simpson(double (*f)(double, double), double p, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = (a + b) / 2;
    const double lm = (a + m) / 2;
    const double rm = (m + b) / 2;
    const double flm = f(lm, p);
    const double frm = f(rm, p);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) {
        return left + right + (left + right - whole) / 15;
    }
    return adaptive_simpson(f, p, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, p, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(double (*f)(double, double), double p, double a, double b, double tol) {
    const double fa = f(a, p);
    const double fb = f(b, p);
    const double fm = f((a + b) / 2, p);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return adaptive_simpson(f, p, a, b, fa, fm, fb, whole, tol, 48);
}

// Integrand of the variance marginalization after the substitution v = u w^2,
// which removes the endpoint singularity: the bracket becomes
// sqrt(2u/pi) * integral_0^1 exp(-s^2 / (2 u w^2)) dw.
double marginal_integrand(double w, double s) {
    if (w <= 0.0) return s == 0.0 ? 1.0 : 0.0;
    return std::exp(-(s * s) / (2.0 * w * w));
}

} // namespace

double edge_marginal_bracket(double s_val) {
    if (s_val < 0.0 || s_val > 1.0) {
        throw ContractError("edge_marginal_bracket: separation " + std::to_string(s_val) +
                            " outside [0, 1]");
    }
    return kSqrt2OverPi * std::exp(-s_val * s_val / 2.0) -
           s_val * std::erfc(s_val * kInvSqrt2);
}

double edge_marginal_bracket(double s_val, double u) {
    if (u <= 0.0) {
        throw ContractError("edge_marginal_bracket: variance bound must be positive");
    }
    if (u == 1.0) return edge_marginal_bracket(s_val);
    if (s_val < 0.0 || s_val > 1.0) {
        throw ContractError("edge_marginal_bracket: separation " + std::to_string(s_val) +
                            " outside [0, 1]");
    }
    const double scaled = s_val / std::sqrt(u);
    return std::sqrt(u) *
           (kSqrt2OverPi * integrate(marginal_integrand, scaled, 0.0, 1.0, 1e-12));
}

EdgeMarginal::EdgeMarginal(double psi, double u) : psi_(psi), u_(u) {
    if (std::abs(psi) > 1.0 + 1e-12) {
        throw ContractError("EdgeMarginal: |psi| = " + std::to_string(std::abs(psi)) +
                            " exceeds 1");
    }
    const double a = std::min(std::abs(psi), 1.0);
    const double f_absent = edge_marginal_bracket(a, u);        // g = 0: s = |psi|
    const double f_present = edge_marginal_bracket(1.0 - a, u); // g = 1: s = 1 - |psi|
    normalizer_ = 1.0 / (f_absent + f_present);
    m0_ = f_absent * normalizer_;
    m1_ = f_present * normalizer_;
}

double edge_posterior(int g, double psi) {
    const EdgeMarginal marginal(psi);
    return marginal(g);
}

int pair_index(int s, int t, int n_nodes) {
    if (s > t) std::swap(s, t);
    if (s < 0 || t >= n_nodes || s == t) {
        throw ContractError("pair_index: invalid pair (" + std::to_string(s) + ", " +
                            std::to_string(t) + ") for " + std::to_string(n_nodes) + " nodes");
    }
    return s * (2 * n_nodes - s - 1) / 2 + (t - s - 1);
}

std::pair<int, int> pair_nodes(int e, int n_nodes) {
    int s = 0;
    int row_len = n_nodes - 1;
    while (e >= row_len) {
        e -= row_len;
        --row_len;
        ++s;
    }
    return {s, s + 1 + e};
}

namespace {

struct PairSampler {
    double m[2];       // edge posterior for g = 0, 1
    double log_m[2];
    double ratio[2];   // m(g) / (C q(g)); acceptance threshold per proposed g
    double q1 = 0.5;   // proposal probability of g = 1
    bool clamped = false;
};

PairSampler make_pair_sampler(double psi, Proposal proposal, double u) {
    PairSampler ps;
    const EdgeMarginal marginal(psi, u);
    ps.m[0] = marginal.m0();
    ps.m[1] = marginal.m1();
    ps.log_m[0] = std::log(ps.m[0]);
    ps.log_m[1] = std::log(ps.m[1]);
    if (proposal == Proposal::Uniform) {
        ps.q1 = 0.5;
        const double c = std::max(ps.m[0], ps.m[1]) / 0.5;
        ps.ratio[0] = ps.m[0] / (c * 0.5);
        ps.ratio[1] = ps.m[1] / (c * 0.5);
    } else {
        constexpr double kClampLo = 1e-6;
        const double raw = std::abs(psi);
        ps.q1 = std::clamp(raw, kClampLo, 1.0 - kClampLo);
        ps.clamped = raw != ps.q1;
        const double c = std::max(ps.m[1] / ps.q1, ps.m[0] / (1.0 - ps.q1));
        ps.ratio[0] = ps.m[0] / (c * (1.0 - ps.q1));
        ps.ratio[1] = ps.m[1] / (c * ps.q1);
    }
    return ps;
}

} // namespace

GraphSampleSet sample_edges(const Eigen::MatrixXd& partial, const SampleOptions& options) {
    const int n_nodes = static_cast<int>(partial.rows());
    if (partial.cols() != n_nodes || n_nodes < 2) {
        throw ContractError("sample_edges: partial correlation matrix must be square with >= 2 nodes");
    }
    if (options.n_samples < 1) {
        throw ContractError("sample_edges: need at least one sample");
    }
    const int n_pairs = pair_count(n_nodes);
    const std::int64_t n = options.n_samples;

    GraphSampleSet set;
    set.n_nodes = n_nodes;
    set.n_samples = n;
    set.proposal = options.proposal;
    set.rng_seed = options.seed;
    set.u = options.u;
    set.edges.assign(static_cast<std::size_t>(n_pairs) * static_cast<std::size_t>(n), 0);
    set.log_posterior.assign(static_cast<std::size_t>(n), 0.0);
    set.edge_freq.assign(static_cast<std::size_t>(n_pairs), 0.0);

    std::vector<PairSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(n_pairs));
    for (int e = 0; e < n_pairs; ++e) {
        const auto [s, t] = pair_nodes(e, n_nodes);
        samplers.push_back(make_pair_sampler(partial(s, t), options.proposal, options.u));
        if (samplers.back().clamped) set.clamped_pairs.push_back(e);
    }

    // Workers fill disjoint per-pair columns; the log posterior is
    // accumulated afterwards in fixed pair order.
    const int threads = std::max(1, options.threads);
    std::vector<std::int64_t> accepted_per_pair(static_cast<std::size_t>(n_pairs), 0);
    std::vector<std::int64_t> proposed_per_pair(static_cast<std::size_t>(n_pairs), 0);

    auto sample_pair = [&](int e) {
        const PairSampler& ps = samplers[static_cast<std::size_t>(e)];
        Rng rng(stream_seed(options.seed, static_cast<std::uint64_t>(e)));
        std::uint8_t* column = set.edges.data() +
                               static_cast<std::size_t>(e) * static_cast<std::size_t>(n);
        std::int64_t ones = 0;
        std::int64_t proposed = 0;
        if (options.direct) {
            for (std::int64_t r = 0; r < n; ++r) {
                const std::uint8_t g = rng.uniform() < ps.m[1] ? 1 : 0;
                column[r] = g;
                ones += g;
            }
            proposed = n;
        } else if (options.proposal == Proposal::Uniform) {
            for (std::int64_t r = 0; r < n; ++r) {
                for (;;) {
                    const std::uint64_t word = rng.next();
                    const auto g = static_cast<std::uint8_t>(word >> 63);
                    const double u01 =
                        static_cast<double>(word & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
                    ++proposed;
                    if (u01 <= ps.ratio[g]) {
                        column[r] = g;
                        ones += g;
                        break;
                    }
                }
            }
        } else {
            for (std::int64_t r = 0; r < n; ++r) {
                for (;;) {
                    const std::uint8_t g = rng.uniform() < ps.q1 ? 1 : 0;
                    const double u01 = rng.uniform();
                    ++proposed;
                    if (u01 <= ps.ratio[g]) {
                        column[r] = g;
                        ones += g;
                        break;
                    }
                }
            }
        }
        accepted_per_pair[static_cast<std::size_t>(e)] = n;
        proposed_per_pair[static_cast<std::size_t>(e)] = proposed;
        set.edge_freq[static_cast<std::size_t>(e)] =
            static_cast<double>(ones) / static_cast<double>(n);
    };

    if (threads == 1 || n_pairs == 1) {
        for (int e = 0; e < n_pairs; ++e) sample_pair(e);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        const int n_workers = std::min(threads, n_pairs);
        workers.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (int e = next.fetch_add(1); e < n_pairs; e = next.fetch_add(1)) {
                    sample_pair(e);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    // Accumulate log posteriors in fixed pair order (thread-count invariant).
    for (int e = 0; e < n_pairs; ++e) {
        const PairSampler& ps = samplers[static_cast<std::size_t>(e)];
        const std::uint8_t* column = set.edges.data() +
                                     static_cast<std::size_t>(e) * static_cast<std::size_t>(n);
        for (std::int64_t r = 0; r < n; ++r) {
            set.log_posterior[static_cast<std::size_t>(r)] += ps.log_m[column[r]];
        }
    }

    std::int64_t total_accepted = 0;
    std::int64_t total_proposed = 0;
    for (int e = 0; e < n_pairs; ++e) {
        total_accepted += accepted_per_pair[static_cast<std::size_t>(e)];
        total_proposed += proposed_per_pair[static_cast<std::size_t>(e)];
    }
    set.acceptance_rate = total_proposed > 0
                              ? static_cast<double>(total_accepted) /
                                    static_cast<double>(total_proposed)
                              : 1.0;
    return set;
}

GraphSampleSet sample_edges(const Eigen::MatrixXd& partial, std::int64_t n_samples,
                            Proposal proposal, std::uint64_t seed) {
    SampleOptions options;
    options.n_samples = n_samples;
    options.proposal = proposal;
    options.seed = seed;
    return sample_edges(partial, options);
}

std::vector<double> graph_log_posterior(const GraphSampleSet& samples,
                                        const Eigen::MatrixXd& partial) {
    if (static_cast<int>(partial.rows()) != samples.n_nodes ||
        static_cast<int>(partial.cols()) != samples.n_nodes) {
        throw ContractError("graph_log_posterior: partial matrix does not match sample set");
    }
    const int n_pairs = samples.n_pairs();
    const std::int64_t n = samples.n_samples;
    std::vector<double> log_post(static_cast<std::size_t>(n), 0.0);
    for (int e = 0; e < n_pairs; ++e) {
        const auto [s, t] = pair_nodes(e, samples.n_nodes);
        const EdgeMarginal marginal(partial(s, t), samples.u);
        const double log_m[2] = {std::log(marginal.m0()), std::log(marginal.m1())};
        const std::uint8_t* column = samples.edges.data() +
                                     static_cast<std::size_t>(e) * static_cast<std::size_t>(n);
        for (std::int64_t r = 0; r < n; ++r) {
            log_post[static_cast<std::size_t>(r)] += log_m[column[r]];
        }
    }
    return log_post;
}

GraphRealization realize_graph(const GraphSampleSet& samples, double tau) {
    if (tau < 0.0 || tau > 1.0) {
        throw ContractError("realize_graph: tau = " + std::to_string(tau) +
                            " outside [0, 1]");
    }
    GraphRealization realization;
    realization.tau = tau;
    realization.adjacency = Eigen::MatrixXi::Zero(samples.n_nodes, samples.n_nodes);
    for (int e = 0; e < samples.n_pairs(); ++e) {
        if (samples.edge_freq[static_cast<std::size_t>(e)] >= tau) {
            const auto [s, t] = pair_nodes(e, samples.n_nodes);
            realization.adjacency(s, t) = 1;
            realization.adjacency(t, s) = 1;
        }
    }
    return realization;
}

namespace {

constexpr char kMagic[8] = {'R', 'G', 'S', 'S', 'E', 'T', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& what) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw ParseError("sample-set container: truncated while reading " + what);
    }
    return value;
}

} // namespace

void save_sample_set(const std::filesystem::path& path, const GraphSampleSet& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, static_cast<std::uint32_t>(samples.n_nodes));
    write_raw(out, static_cast<std::uint32_t>(samples.n_pairs()));
    write_raw(out, static_cast<std::uint64_t>(samples.n_samples));
    write_raw(out, samples.rng_seed);
    write_raw(out, static_cast<std::uint8_t>(samples.proposal));
    write_raw(out, samples.u);

    const int n_pairs = samples.n_pairs();
    const std::size_t row_bytes = (static_cast<std::size_t>(n_pairs) + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (std::int64_t r = 0; r < samples.n_samples; ++r) {
        std::fill(row.begin(), row.end(), 0);
        for (int e = 0; e < n_pairs; ++e) {
            if (samples.edge(r, e)) {
                row[static_cast<std::size_t>(e) / 8] |=
                    static_cast<std::uint8_t>(1u << (e % 8));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row_bytes));
    }
    out.write(reinterpret_cast<const char*>(samples.log_posterior.data()),
              static_cast<std::streamsize>(sizeof(double) * samples.log_posterior.size()));
    if (!out.good()) {
        throw Error("write failed for " + path.string());
    }
}

GraphSampleSet load_sample_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError(path.string() + ": not a sample-set container");
    }
    GraphSampleSet set;
    set.n_nodes = static_cast<int>(read_raw<std::uint32_t>(in, "node count"));
    const auto stored_pairs = read_raw<std::uint32_t>(in, "pair count");
    set.n_samples = static_cast<std::int64_t>(read_raw<std::uint64_t>(in, "sample count"));
    set.rng_seed = read_raw<std::uint64_t>(in, "seed");
    set.proposal = static_cast<Proposal>(read_raw<std::uint8_t>(in, "proposal"));
    set.u = read_raw<double>(in, "variance bound");

    if (set.n_nodes < 2 || stored_pairs != static_cast<std::uint32_t>(set.n_pairs()) ||
        set.n_samples < 1) {
        throw ParseError(path.string() + ": inconsistent container header");
    }
    const int n_pairs = set.n_pairs();
    const std::size_t row_bytes = (static_cast<std::size_t>(n_pairs) + 7) / 8;
    set.edges.assign(static_cast<std::size_t>(n_pairs) * static_cast<std::size_t>(set.n_samples), 0);

    std::vector<std::uint8_t> row(row_bytes);
    for (std::int64_t r = 0; r < set.n_samples; ++r) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(row_bytes))) {
            throw ParseError(path.string() + ": truncated edge data at sample " +
                             std::to_string(r));
        }
        for (int e = 0; e < n_pairs; ++e) {
            const std::uint8_t bit =
                (row[static_cast<std::size_t>(e) / 8] >> (e % 8)) & 1u;
            set.edges[static_cast<std::size_t>(e) * static_cast<std::size_t>(set.n_samples) +
                      static_cast<std::size_t>(r)] = bit;
        }
    }
    set.log_posterior.resize(static_cast<std::size_t>(set.n_samples));
    if (!in.read(reinterpret_cast<char*>(set.log_posterior.data()),
                 static_cast<std::streamsize>(sizeof(double) * set.log_posterior.size()))) {
        throw ParseError(path.string() + ": truncated log-posterior data");
    }

    set.edge_freq.assign(static_cast<std::size_t>(n_pairs), 0.0);
    for (int e = 0; e < n_pairs; ++e) {
        std::int64_t ones = 0;
        const std::uint8_t* column = set.edges.data() +
                                     static_cast<std::size_t>(e) *
                                         static_cast<std::size_t>(set.n_samples);
        for (std::int64_t r = 0; r < set.n_samples; ++r) ones += column[r];
        set.edge_freq[static_cast<std::size_t>(e)] =
            static_cast<double>(ones) / static_cast<double>(set.n_samples);
    }
    return set;
}

} // namespace recovgraph
