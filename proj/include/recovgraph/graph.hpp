#ifndef RECOVGRAPH_GRAPH_HPP
#define RECOVGRAPH_GRAPH_HPP

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace recovgraph {

enum class Proposal : std::uint8_t { Uniform = 0, Bernoulli = 1 };

std::string to_string(Proposal p);
Proposal proposal_from_string(const std::string& name);

/// Closed form of the variance-marginalized edge weight at separation s_val:
///   sqrt(2/pi) * exp(-s^2/2) - s * erfc(s / sqrt(2)).
/// Strictly decreasing and positive on [0, 1].
double edge_marginal_bracket(double s_val);

/// Same weight with the variance integrated over (0, u] instead of (0, 1];
/// evaluated by adaptive quadrature when u != 1.
double edge_marginal_bracket(double s_val, double u);

/// Two-point posterior of a binary edge given the partial correlation of its
/// node pair. The separation of edge value g from |psi| is s = |g - |psi||;
/// the posterior is the bracket at s, normalized over g in {0, 1} so that
/// m(0|psi) + m(1|psi) = 1.
class EdgeMarginal {
public:
    explicit EdgeMarginal(double psi, double u = 1.0);

    double psi() const { return psi_; }
    double upper() const { return u_; }
    double normalizer() const { return normalizer_; }  // K
    double m0() const { return m0_; }
    double m1() const { return m1_; }
    double operator()(int g) const { return g ? m1_ : m0_; }

private:
    double psi_ = 0.0;
    double u_ = 1.0;
    double normalizer_ = 0.0;
    double m0_ = 0.0;
    double m1_ = 0.0;
};

/// m(g | psi) with the default variance bound u = 1.
double edge_posterior(int g, double psi);

/// Number of unordered node pairs for n_nodes.
inline int pair_count(int n_nodes) { return n_nodes * (n_nodes - 1) / 2; }

/// Row-major upper-triangle pair ordering: (0,1), (0,2), ..., (0,S-1), (1,2), ...
/// This ordering is fixed; sample sets pair their r-th draws across sessions
/// by it.
int pair_index(int s, int t, int n_nodes);
std::pair<int, int> pair_nodes(int e, int n_nodes);

/// N binary edge-vector samples for one session, with per-sample log graph
/// posteriors and per-pair edge frequencies.
struct GraphSampleSet {
    int n_nodes = 0;
    std::int64_t n_samples = 0;
    Proposal proposal = Proposal::Uniform;
    std::uint64_t rng_seed = 0;
    double u = 1.0;

    /// Pair-major storage: edge(r, e) == edges[e * n_samples + r].
    std::vector<std::uint8_t> edges;
    std::vector<double> log_posterior;  // length n_samples
    std::vector<double> edge_freq;      // length pair_count(n_nodes)

    /// accepted / proposed over all pairs; 1 for direct sampling.
    double acceptance_rate = 1.0;
    /// Pairs whose Bernoulli proposal parameter was clamped away from {0, 1}.
    std::vector<int> clamped_pairs;

    int n_pairs() const { return pair_count(n_nodes); }
    std::uint8_t edge(std::int64_t r, int e) const {
        return edges[static_cast<std::size_t>(e) * static_cast<std::size_t>(n_samples) +
                     static_cast<std::size_t>(r)];
    }
};

struct SampleOptions {
    std::int64_t n_samples = 50000;
    Proposal proposal = Proposal::Uniform;
    std::uint64_t seed = 0;
    /// Replace rejection sampling with direct Bernoulli inversion.
    bool direct = false;
    /// Upper bound of the variance-marginalization interval.
    double u = 1.0;
    /// Worker threads across node pairs. Results are identical for any value.
    int threads = 1;
};

/// Draws n_samples binary edge vectors from the per-pair edge posteriors by
/// rejection sampling: propose g from the proposal density q, accept when
/// u <= m(g|psi) / (C q(g)) with C the smallest constant such that
/// C q >= m pointwise, retry until acceptance. Every pair uses an RNG stream
/// derived from (seed, pair index), so output is deterministic and
/// independent of thread count.
GraphSampleSet sample_edges(const Eigen::MatrixXd& partial, const SampleOptions& options);
GraphSampleSet sample_edges(const Eigen::MatrixXd& partial, std::int64_t n_samples,
                            Proposal proposal, std::uint64_t seed);

/// Per-sample log graph posterior: entry r is the sum over node pairs of
/// log m(g_e^(r) | psi_e). Recomputes from the stored edges; sample_edges
/// already fills GraphSampleSet::log_posterior with the same values.
std::vector<double> graph_log_posterior(const GraphSampleSet& samples,
                                        const Eigen::MatrixXd& partial);

/// Adjacency at cutoff tau: edge present iff its sampled frequency >= tau.
struct GraphRealization {
    Eigen::MatrixXi adjacency;  // symmetric 0/1, zero diagonal
    double tau = 0.0;
};

GraphRealization realize_graph(const GraphSampleSet& samples, double tau);

/// Compact binary container. Layout (little-endian):
///   magic "RGSSET01", u32 n_nodes, u32 n_pairs, u64 n_samples, u64 seed,
///   u8 proposal, f64 u, then n_samples rows of ceil(n_pairs/8) bit-packed
///   edge bytes (row-major over pairs), then n_samples f64 log posteriors.
void save_sample_set(const std::filesystem::path& path, const GraphSampleSet& samples);
GraphSampleSet load_sample_set(const std::filesystem::path& path);

} // namespace recovgraph

#endif
