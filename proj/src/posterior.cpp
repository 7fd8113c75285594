#include "pdcal/posterior.hpp"

namespace pdcal {

PortfolioPosterior compute_posterior(const CohortSnapshot& snapshot, const Prior& prior) {
    const BetaParams validated_prior(prior.alpha, prior.beta);
    PortfolioPosterior posterior;
    posterior.reserve(snapshot.size());
    for (const auto& g : snapshot.grades()) {
        const auto d = static_cast<double>(g.defaults);
        const auto survivors = static_cast<double>(g.performing - g.defaults);
        posterior.push_back({g.label,
                             BetaParams(validated_prior.alpha() + d, validated_prior.beta() + survivors),
                             g.performing, g.defaults});
    }
    return posterior;
}

}  // namespace pdcal
