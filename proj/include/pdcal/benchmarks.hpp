#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "pdcal/calibrator.hpp"
#include "pdcal/cohorts.hpp"

namespace pdcal {

struct PTConfig {
    double confidence = 0.75;
    bool enforce_monotone = true;
};

/// Portfolio default rate Σd / Σn. InputError when Σn = 0.
double central_tendency(const CohortSnapshot& snapshot);

/// Most prudent estimation: grade i pools grades i..m and takes the upper
/// confidence bound sup{θ : P(X ≤ Dᵢ | Nᵢ, θ) ≥ 1 − confidence}.
/// With enforce_monotone a running maximum is applied best to worst.
std::vector<double> pluto_tasche(const CohortSnapshot& snapshot, const PTConfig& cfg = {});

/// Rescales `pds` so that their performing-weighted mean equals the central tendency.
std::vector<double> scale_to_ct(const std::vector<double>& pds, const CohortSnapshot& snapshot);

struct MethodColumn {
    std::string name;
    std::vector<double> pds;
};

struct ScaledComparison {
    std::string period;
    std::vector<std::string> labels;
    std::vector<long long> performing;
    double central_tendency = 0.0;
    long long total_performing = 0;
    long long total_defaults = 0;
    std::vector<MethodColumn> columns;  // scaled; "simulated" and "pluto_tasche" first
};

ScaledComparison build_comparison(const CohortSnapshot& snapshot, const std::vector<double>& simulated,
                                  const std::vector<double>& pt,
                                  const std::vector<MethodColumn>& external = {});

ScaledComparison build_comparison(const CohortSnapshot& snapshot, const CalibrationResult& calib,
                                  const std::vector<double>& pt,
                                  const std::vector<MethodColumn>& external = {});

/// External methods CSV: grade_order,method_name,pd. Columns are returned in
/// order of first appearance and must cover grades 1..grade_count exactly.
std::vector<MethodColumn> parse_external_methods(std::istream& in, std::size_t grade_count);

}  // namespace pdcal
