#ifndef RECOVGRAPH_DISTANCE_HPP
#define RECOVGRAPH_DISTANCE_HPP

#include "recovgraph/graph.hpp"

#include <cstdint>
#include <span>

namespace recovgraph {

inline constexpr double kDefaultHellingerScale = 1e15;
inline constexpr double kDefaultKlScale = 1e25;

/// Distances between the graph posteriors of two sessions, paired draw by
/// draw. Posterior values are multiplied by the stated scale before use;
/// the scales are applied at distance time and never persisted.
struct DistanceResult {
    double hellinger = 0.0;  // >= 0
    double kl = 0.0;         // may be negative
    std::int64_t n_samples = 0;
    double scale_hellinger = kDefaultHellingerScale;
    double scale_kl = kDefaultKlScale;
};

/// Discretized Hellinger distance between two per-sample posterior sequences:
/// sqrt( (1/N) sum_r (sqrt(scale pi_a^(r)) - sqrt(scale pi_b^(r)))^2 ).
/// Symmetric in (a, b) and exactly 0 for identical sequences. Summation uses
/// a fixed-tree pairwise reduction, so the value is reproducible bit for bit.
double hellinger(std::span<const double> log_posterior_a,
                 std::span<const double> log_posterior_b,
                 double scale = kDefaultHellingerScale);

/// Kullback-Leibler divergence, later session in the numerator:
/// sum_r scale pi_later^(r) (log pi_later^(r) - log pi_earlier^(r)).
/// The log ratio is unaffected by the scale; the weight term is linear in it.
/// May be negative.
double kl_divergence(std::span<const double> log_posterior_later,
                     std::span<const double> log_posterior_earlier,
                     double scale = kDefaultKlScale);

double hellinger(const GraphSampleSet& a, const GraphSampleSet& b,
                 double scale = kDefaultHellingerScale);
double kl_divergence(const GraphSampleSet& later, const GraphSampleSet& earlier,
                     double scale = kDefaultKlScale);

/// Both distances at once; `later` and `earlier` fix the KL orientation.
DistanceResult distance_between(const GraphSampleSet& later, const GraphSampleSet& earlier,
                                double scale_hellinger = kDefaultHellingerScale,
                                double scale_kl = kDefaultKlScale);

/// Deterministic fixed-tree pairwise sum of f(i) for i in [0, n).
/// Independent of thread count and more accurate than sequential addition.
template <typename TermFn>
double pairwise_sum(std::int64_t begin, std::int64_t end, const TermFn& term) {
    const std::int64_t n = end - begin;
    if (n <= 32) {
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i) acc += term(i);
        return acc;
    }
    const std::int64_t mid = begin + n / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

} // namespace recovgraph

#endif
