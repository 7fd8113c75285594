#pragma once

#include <string>
#include <vector>

#include "pdcal/cohorts.hpp"
#include "pdcal/statdist.hpp"

namespace pdcal {

/// Beta prior on each grade's default rate. The uniform Beta(1,1) is the default.
struct Prior {
    double alpha = 1.0;
    double beta = 1.0;
};

struct GradePosterior {
    std::string label;
    BetaParams params;
    long long performing;
    long long defaults;

    /// True when the grade had no observations and its posterior is just the prior.
    bool prior_only() const noexcept { return performing == 0; }
};

/// Independent per-grade posteriors, best grade first.
using PortfolioPosterior = std::vector<GradePosterior>;

/// Beta(α₀ + d, β₀ + n − d) for every grade of the snapshot.
PortfolioPosterior compute_posterior(const CohortSnapshot& snapshot, const Prior& prior = {});

}  // namespace pdcal
