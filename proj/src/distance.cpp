#include "recovgraph/distance.hpp"

#include "recovgraph/errors.hpp"

#include <cmath>
#include <string>

namespace recovgraph {

namespace {

void check_paired(std::size_t na, std::size_t nb, const char* what) {
    if (na != nb) {
        throw ContractError(std::string(what) + ": sample counts differ (" +
                            std::to_string(na) + " vs " + std::to_string(nb) + ")");
    }
    if (na == 0) {
        throw ContractError(std::string(what) + ": empty sample sets");
    }
}

void check_compatible(const GraphSampleSet& a, const GraphSampleSet& b, const char* what) {
    if (a.n_nodes != b.n_nodes) {
        throw ContractError(std::string(what) + ": node counts differ (" +
                            std::to_string(a.n_nodes) + " vs " + std::to_string(b.n_nodes) +
                            "), pair orderings are incompatible");
    }
    check_paired(a.log_posterior.size(), b.log_posterior.size(), what);
}

} // namespace

double hellinger(std::span<const double> log_posterior_a,
                 std::span<const double> log_posterior_b, double scale) {
    check_paired(log_posterior_a.size(), log_posterior_b.size(), "hellinger");
    const double sqrt_scale = std::sqrt(scale);
    const auto n = static_cast<std::int64_t>(log_posterior_a.size());
    const double sum = pairwise_sum(std::int64_t{0}, n, [&](std::int64_t r) {
        const auto i = static_cast<std::size_t>(r);
        const double d = sqrt_scale * (std::exp(0.5 * log_posterior_a[i]) -
                                       std::exp(0.5 * log_posterior_b[i]));
        return d * d;
    });
    return std::sqrt(sum / static_cast<double>(n));
}

double kl_divergence(std::span<const double> log_posterior_later,
                     std::span<const double> log_posterior_earlier, double scale) {
    check_paired(log_posterior_later.size(), log_posterior_earlier.size(), "kl_divergence");
    const auto n = static_cast<std::int64_t>(log_posterior_later.size());
    return pairwise_sum(std::int64_t{0}, n, [&](std::int64_t r) {
        const auto i = static_cast<std::size_t>(r);
        return scale * std::exp(log_posterior_later[i]) *
               (log_posterior_later[i] - log_posterior_earlier[i]);
    });
}

double hellinger(const GraphSampleSet& a, const GraphSampleSet& b, double scale) {
    check_compatible(a, b, "hellinger");
    return hellinger(std::span<const double>(a.log_posterior),
                     std::span<const double>(b.log_posterior), scale);
}

double kl_divergence(const GraphSampleSet& later, const GraphSampleSet& earlier, double scale) {
    check_compatible(later, earlier, "kl_divergence");
    return kl_divergence(std::span<const double>(later.log_posterior),
                         std::span<const double>(earlier.log_posterior), scale);
}

DistanceResult distance_between(const GraphSampleSet& later, const GraphSampleSet& earlier,
                                double scale_hellinger, double scale_kl) {
    DistanceResult result;
    result.hellinger = hellinger(later, earlier, scale_hellinger);
    result.kl = kl_divergence(later, earlier, scale_kl);
    result.n_samples = later.n_samples;
    result.scale_hellinger = scale_hellinger;
    result.scale_kl = scale_kl;
    return result;
}

} // namespace recovgraph
