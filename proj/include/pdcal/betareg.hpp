#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "pdcal/statdist.hpp"

namespace pdcal {

enum class Link { logit };

double inverse_link(Link link, double eta);
double apply_link(Link link, double mu);

struct RegressionModel {
    double intercept = 0.0;
    std::vector<double> coefficients;  // one per regressor
    Link link = Link::logit;
    double precision = 1.0;            // φ: implied shapes are (μφ, (1 − μ)φ)
    bool precision_identified = true;  // false when φ is the fallback value
};

/// Fallback φ when the data cannot identify dispersion (no residual degrees
/// of freedom, or an exact fit).
inline constexpr double kUnidentifiedPrecision = 1e10;

struct Prediction {
    double mean;
    BetaParams implied;
};

/// μ* = link⁻¹(β₀ + Σ βⱼ yⱼ). InputError on length mismatch.
Prediction predict_mean(const RegressionModel& model, std::span<const double> regressors);

struct Observation {
    std::vector<double> regressors;
    double mu;
};

/// Least squares of link(μ) on the regressors, then a moment estimate of φ.
/// Needs at least k + 1 observations with μ in (0,1) and a full-rank design.
RegressionModel fit(const std::vector<Observation>& history, Link link = Link::logit);

struct LabelledRows {
    std::vector<std::string> regressor_names;
    std::vector<std::string> labels;
    std::vector<Observation> rows;  // mu unused for new data
};

/// History CSV: period,mu,y1,...,yk
LabelledRows parse_history_csv(std::istream& in);

/// New-data CSV: period,y1,...,yk
LabelledRows parse_newdata_csv(std::istream& in);

}  // namespace pdcal
