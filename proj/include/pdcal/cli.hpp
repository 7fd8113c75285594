#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "pdcal/calibrator.hpp"

namespace pdcal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr const char* kToolVersion = "1.0.0";

/// Dispatches `calibrate`, `compare` or `predict`; returns the process exit code.
int run(int argc, const char* const* argv);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// One row of calibration.csv as read back by `compare`.
struct CalibrationRow {
    int grade_order;
    std::string label;
    long long performing;
    long long defaults;
    double observed_rate;
    double alpha_hat;
    double beta_hat;
    double mean;
    double median;
    double ci_lo;
    double ci_hi;
};

std::vector<CalibrationRow> read_calibration_csv(std::istream& in);

}  // namespace pdcal::cli
