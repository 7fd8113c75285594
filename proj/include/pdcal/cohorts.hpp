#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pdcal {

/// Ordered non-default grades (index 0 = best quality) plus the default bucket label.
class RatingScale {
public:
    RatingScale(std::vector<std::string> grades, std::string default_bucket_label = "C/D");

    const std::vector<std::string>& grades() const noexcept { return grades_; }
    const std::string& default_bucket_label() const noexcept { return default_label_; }
    std::size_t size() const noexcept { return grades_.size(); }
    std::optional<std::size_t> index_of(const std::string& label) const;

private:
    std::vector<std::string> grades_;
    std::string default_label_;
};

struct GradeCounts {
    int order;             // 1-based rating order
    std::string label;
    long long performing;  // n_R, performing at period start
    long long defaults;    // d_R, defaulted by period end
};

/// Counts for one period; grades sorted by order.
class CohortSnapshot {
public:
    CohortSnapshot(std::string period, std::vector<GradeCounts> grades);

    const std::string& period() const noexcept { return period_; }
    const std::vector<GradeCounts>& grades() const noexcept { return grades_; }
    std::size_t size() const noexcept { return grades_.size(); }
    const GradeCounts& operator[](std::size_t i) const { return grades_[i]; }

    long long total_performing() const noexcept;
    long long total_defaults() const noexcept;
    RatingScale scale(std::string default_bucket_label = "C/D") const;

private:
    std::string period_;
    std::vector<GradeCounts> grades_;
};

/// Raw grade label → merged grade label. Merged groups must be contiguous in raw order.
class BinningMap {
public:
    explicit BinningMap(std::vector<std::pair<std::string, std::string>> raw_to_merged);
    static BinningMap identity(const CohortSnapshot& snapshot);

    const std::string* merged(const std::string& raw) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct ParseOptions {
    /// Rows with this label (or with empty counts) are the default bucket and are dropped.
    std::string default_bucket_label = "C/D";
    /// When set, every grade label must belong to this scale and every scale grade must appear.
    std::optional<RatingScale> scale;
};

/// Header: period,grade_order,grade_label,performing_start,defaults_end
std::vector<CohortSnapshot> parse_cohort_csv(std::istream& in, const ParseOptions& options = {});
std::vector<CohortSnapshot> parse_cohort_csv(const std::filesystem::path& path,
                                             const ParseOptions& options = {});

void write_cohort_csv(std::ostream& out, const std::vector<CohortSnapshot>& snapshots);

/// Sums counts within each merged group; order of first appearance is kept.
CohortSnapshot apply_binning(const CohortSnapshot& snapshot, const BinningMap& map);

struct ObservedRate {
    double rate;             // d/n, 0 for an empty cohort
    bool undefined_sample;   // n == 0
};
std::vector<ObservedRate> observed_default_rates(const CohortSnapshot& snapshot);

/// Locates the snapshot for a period label; InputError if absent.
const CohortSnapshot& find_period(const std::vector<CohortSnapshot>& snapshots,
                                  const std::string& period);

}  // namespace pdcal
