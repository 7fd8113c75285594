#include "pdcal/cohorts.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "pdcal/csv.hpp"
#include "pdcal/error.hpp"

namespace pdcal {

RatingScale::RatingScale(std::vector<std::string> grades, std::string default_bucket_label)
    : grades_(std::move(grades)), default_label_(std::move(default_bucket_label)) {
    if (grades_.size() < 2) throw InputError("rating scale needs at least 2 non-default grades");
    std::set<std::string> seen;
    for (const auto& g : grades_) {
        if (g.empty()) throw InputError("rating scale: empty grade label");
        if (!seen.insert(g).second) throw InputError("rating scale: duplicate grade '" + g + "'");
        if (g == default_label_) {
            throw InputError("rating scale: default bucket '" + g + "' listed as a grade");
        }
    }
}

std::optional<std::size_t> RatingScale::index_of(const std::string& label) const {
    const auto it = std::find(grades_.begin(), grades_.end(), label);
    if (it == grades_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - grades_.begin());
}

CohortSnapshot::CohortSnapshot(std::string period, std::vector<GradeCounts> grades)
    : period_(std::move(period)), grades_(std::move(grades)) {
    std::sort(grades_.begin(), grades_.end(),
              [](const GradeCounts& a, const GradeCounts& b) { return a.order < b.order; });
    std::set<std::string> labels;
    for (std::size_t i = 0; i < grades_.size(); ++i) {
        const auto& g = grades_[i];
        if (g.performing < 0 || g.defaults < 0) {
            throw InputError("period " + period_ + ", grade " + g.label + ": negative count");
        }
        if (g.defaults > g.performing) {
            throw InputError("period " + period_ + ", grade " + g.label +
                             ": defaults exceed performing");
        }
        if (i > 0 && grades_[i - 1].order == g.order) {
            throw InputError("period " + period_ + ": duplicate grade order " +
                             std::to_string(g.order));
        }
        if (!labels.insert(g.label).second) {
            throw InputError("period " + period_ + ": duplicate grade '" + g.label + "'");
        }
    }
}

long long CohortSnapshot::total_performing() const noexcept {
    long long total = 0;
    for (const auto& g : grades_) total += g.performing;
    return total;
}

long long CohortSnapshot::total_defaults() const noexcept {
    long long total = 0;
    for (const auto& g : grades_) total += g.defaults;
    return total;
}

RatingScale CohortSnapshot::scale(std::string default_bucket_label) const {
    std::vector<std::string> labels;
    labels.reserve(grades_.size());
    for (const auto& g : grades_) labels.push_back(g.label);
    return RatingScale(std::move(labels), std::move(default_bucket_label));
}

BinningMap::BinningMap(std::vector<std::pair<std::string, std::string>> raw_to_merged)
    : entries_(std::move(raw_to_merged)) {
    std::set<std::string> raw_seen;
    std::set<std::string> closed_groups;
    const std::string* open_group = nullptr;
    for (const auto& [raw, merged] : entries_) {
        if (!raw_seen.insert(raw).second) {
            throw InputError("binning map: raw grade '" + raw + "' mapped twice");
        }
        if (open_group == nullptr || *open_group != merged) {
            if (open_group != nullptr) closed_groups.insert(*open_group);
            if (closed_groups.count(merged)) {
                throw InputError("binning map: merged grade '" + merged +
                                 "' is not contiguous in rating order");
            }
            open_group = &merged;
        }
    }
}

BinningMap BinningMap::identity(const CohortSnapshot& snapshot) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& g : snapshot.grades()) entries.emplace_back(g.label, g.label);
    return BinningMap(std::move(entries));
}

const std::string* BinningMap::merged(const std::string& raw) const {
    for (const auto& [r, m] : entries_) {
        if (r == raw) return &m;
    }
    return nullptr;
}

namespace {

const std::vector<std::string> kHeader{"period", "grade_order", "grade_label", "performing_start",
                                       "defaults_end"};

std::vector<CohortSnapshot> parse_table(const csv::Table& table, const ParseOptions& options) {
    if (table.header.fields != kHeader) {
        throw InputError(
            "unexpected header (want period,grade_order,grade_label,performing_start,defaults_end)",
            table.header.line);
    }
    std::vector<std::string> period_order;
    std::map<std::string, std::vector<GradeCounts>> by_period;
    std::map<std::pair<std::string, int>, std::size_t> seen_order;
    std::map<std::pair<std::string, std::string>, std::size_t> seen_label;
    std::map<int, std::string> label_of_order;

    for (const auto& row : table.rows) {
        if (row.fields.size() != kHeader.size()) {
            throw InputError("malformed row: expected 5 fields, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        }
        const auto& period = row.fields[0];
        const auto& label = row.fields[2];
        if (period.empty()) throw InputError("malformed row: empty period", row.line);
        if (label.empty()) throw InputError("malformed row: empty grade label", row.line);
        const bool empty_counts = row.fields[3].empty() && row.fields[4].empty();
        if (empty_counts || label == options.default_bucket_label) continue;

        const long long order_value = csv::parse_count(row.fields[1], row.line, "grade_order");
        if (order_value < 1 || order_value > 100000) {
            throw InputError("grade_order out of range", row.line);
        }
        const int order = static_cast<int>(order_value);
        const long long n = csv::parse_count(row.fields[3], row.line, "performing_start");
        const long long d = csv::parse_count(row.fields[4], row.line, "defaults_end");
        if (d > n) throw InputError("defaults exceed performing for grade " + label, row.line);

        if (options.scale && !options.scale->index_of(label)) {
            throw InputError("unknown grade '" + label + "'", row.line);
        }
        if (auto [it, fresh] = label_of_order.emplace(order, label); !fresh && it->second != label) {
            throw InputError("grade order " + std::to_string(order) + " labelled both '" +
                                 it->second + "' and '" + label + "'",
                             row.line);
        }
        if (!seen_order.emplace(std::pair{period, order}, row.line).second ||
            !seen_label.emplace(std::pair{period, label}, row.line).second) {
            throw InputError("duplicate (period, grade) pair (" + period + ", " + label + ")",
                             row.line);
        }
        if (!by_period.count(period)) period_order.push_back(period);
        by_period[period].push_back({order, label, n, d});
    }

    std::vector<CohortSnapshot> snapshots;
    for (const auto& period : period_order) {
        auto grades = std::move(by_period[period]);
        if (options.scale) {
            for (const auto& expected : options.scale->grades()) {
                const bool present = std::any_of(grades.begin(), grades.end(),
                                                 [&](const GradeCounts& g) { return g.label == expected; });
                if (!present) {
                    throw InputError("period " + period + ": missing grade '" + expected + "'");
                }
            }
        }
        snapshots.emplace_back(period, std::move(grades));
    }
    // All periods must cover the same grades.
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (snapshots[i].size() != snapshots[0].size()) {
            throw InputError("period " + snapshots[i].period() + " covers " +
                             std::to_string(snapshots[i].size()) + " grades, period " +
                             snapshots[0].period() + " covers " +
                             std::to_string(snapshots[0].size()));
        }
        for (std::size_t g = 0; g < snapshots[i].size(); ++g) {
            if (snapshots[i][g].label != snapshots[0][g].label) {
                throw InputError("period " + snapshots[i].period() + ": grade '" +
                                 snapshots[i][g].label + "' not present in period " +
                                 snapshots[0].period());
            }
        }
    }
    return snapshots;
}

}  // namespace

std::vector<CohortSnapshot> parse_cohort_csv(std::istream& in, const ParseOptions& options) {
    return parse_table(csv::read_table(in), options);
}

std::vector<CohortSnapshot> parse_cohort_csv(const std::filesystem::path& path,
                                             const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open cohort file '" + path.string() + "'");
    try {
        return parse_cohort_csv(in, options);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_cohort_csv(std::ostream& out, const std::vector<CohortSnapshot>& snapshots) {
    out << "period,grade_order,grade_label,performing_start,defaults_end\n";
    for (const auto& s : snapshots) {
        for (const auto& g : s.grades()) {
            out << s.period() << ',' << g.order << ',' << g.label << ',' << g.performing << ','
                << g.defaults << '\n';
        }
    }
}

CohortSnapshot apply_binning(const CohortSnapshot& snapshot, const BinningMap& map) {
    std::vector<GradeCounts> merged;
    for (const auto& g : snapshot.grades()) {
        const std::string* target = map.merged(g.label);
        if (target == nullptr) {
            throw InputError("binning map does not cover grade '" + g.label + "'");
        }
        if (merged.empty() || merged.back().label != *target) {
            const bool reopened = std::any_of(merged.begin(), merged.end(),
                                              [&](const GradeCounts& m) { return m.label == *target; });
            if (reopened) {
                throw InputError("binning of grade '" + g.label + "' into '" + *target +
                                 "' breaks rating order");
            }
            merged.push_back({static_cast<int>(merged.size()) + 1, *target, 0, 0});
        }
        merged.back().performing += g.performing;
        merged.back().defaults += g.defaults;
    }
    return CohortSnapshot(snapshot.period(), std::move(merged));
}

std::vector<ObservedRate> observed_default_rates(const CohortSnapshot& snapshot) {
    std::vector<ObservedRate> rates;
    rates.reserve(snapshot.size());
    for (const auto& g : snapshot.grades()) {
        if (g.performing == 0) {
            rates.push_back({0.0, true});
        } else {
            rates.push_back({static_cast<double>(g.defaults) / static_cast<double>(g.performing),
                             false});
        }
    }
    return rates;
}

const CohortSnapshot& find_period(const std::vector<CohortSnapshot>& snapshots,
                                  const std::string& period) {
    for (const auto& s : snapshots) {
        if (s.period() == period) return s;
    }
    throw InputError("period '" + period + "' not found in input");
}

}  // namespace pdcal
