#include "pdcal/benchmarks.hpp"

#include <algorithm>
#include <set>

#include "pdcal/csv.hpp"
#include "pdcal/error.hpp"
#include "pdcal/statdist.hpp"

namespace pdcal {

double central_tendency(const CohortSnapshot& snapshot) {
    const long long n = snapshot.total_performing();
    if (n <= 0) throw InputError("central tendency of an empty portfolio");
    return static_cast<double>(snapshot.total_defaults()) / static_cast<double>(n);
}

std::vector<double> pluto_tasche(const CohortSnapshot& snapshot, const PTConfig& cfg) {
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw InputError("Pluto-Tasche confidence must lie in (0,1)");
    }
    const std::size_t m = snapshot.size();
    std::vector<double> pds(m);
    long long pooled_n = 0;
    long long pooled_d = 0;
    for (std::size_t k = m; k-- > 0;) {
        pooled_n += snapshot[k].performing;
        pooled_d += snapshot[k].defaults;
        if (pooled_n == 0 || pooled_d == pooled_n) {
            pds[k] = 1.0;
            continue;
        }
        const auto tail = [n = pooled_n, d = pooled_d](double theta) {
            if (theta <= 0.0) return 1.0;
            if (theta >= 1.0) return 0.0;
            return binomial_tail_le(n, d, theta);
        };
        pds[k] = solve_monotone(tail, 1.0 - cfg.confidence, 0.0, 1.0);
    }
    if (cfg.enforce_monotone) {
        for (std::size_t i = 1; i < m; ++i) pds[i] = std::max(pds[i], pds[i - 1]);
    }
    return pds;
}

std::vector<double> scale_to_ct(const std::vector<double>& pds, const CohortSnapshot& snapshot) {
    if (pds.size() != snapshot.size()) {
        throw InputError("scale_to_ct: " + std::to_string(pds.size()) + " PDs for " +
                         std::to_string(snapshot.size()) + " grades");
    }
    const double ct = central_tendency(snapshot);
    double weighted = 0.0;
    for (std::size_t i = 0; i < pds.size(); ++i) {
        weighted += static_cast<double>(snapshot[i].performing) * pds[i];
    }
    if (!(weighted > 0.0)) throw InputError("scale_to_ct: PD vector has zero weighted mean");
    const double factor = ct * static_cast<double>(snapshot.total_performing()) / weighted;
    std::vector<double> scaled(pds.size());
    std::transform(pds.begin(), pds.end(), scaled.begin(), [factor](double p) { return p * factor; });
    return scaled;
}

ScaledComparison build_comparison(const CohortSnapshot& snapshot, const std::vector<double>& simulated,
                                  const std::vector<double>& pt,
                                  const std::vector<MethodColumn>& external) {
    ScaledComparison table;
    table.period = snapshot.period();
    for (const auto& g : snapshot.grades()) {
        table.labels.push_back(g.label);
        table.performing.push_back(g.performing);
    }
    table.central_tendency = central_tendency(snapshot);
    table.total_performing = snapshot.total_performing();
    table.total_defaults = snapshot.total_defaults();

    std::vector<MethodColumn> raw{{"simulated", simulated}, {"pluto_tasche", pt}};
    raw.insert(raw.end(), external.begin(), external.end());
    std::set<std::string> names;
    for (const auto& column : raw) {
        if (!names.insert(column.name).second) {
            throw InputError("duplicate comparison column '" + column.name + "'");
        }
        if (column.pds.size() != snapshot.size()) {
            throw InputError("column '" + column.name + "' has " + std::to_string(column.pds.size()) +
                             " values for " + std::to_string(snapshot.size()) + " grades");
        }
        table.columns.push_back({column.name, scale_to_ct(column.pds, snapshot)});
    }
    return table;
}

ScaledComparison build_comparison(const CohortSnapshot& snapshot, const CalibrationResult& calib,
                                  const std::vector<double>& pt,
                                  const std::vector<MethodColumn>& external) {
    std::vector<double> simulated;
    for (const auto& g : calib.grades) simulated.push_back(g.mean);
    return build_comparison(snapshot, simulated, pt, external);
}

std::vector<MethodColumn> parse_external_methods(std::istream& in, std::size_t grade_count) {
    const auto table = csv::read_table(in);
    if (table.header.fields != std::vector<std::string>{"grade_order", "method_name", "pd"}) {
        throw InputError("external methods: expected header grade_order,method_name,pd",
                         table.header.line);
    }
    std::vector<MethodColumn> columns;
    std::vector<std::vector<bool>> filled;
    for (const auto& row : table.rows) {
        if (row.fields.size() != 3) throw InputError("external methods: expected 3 fields", row.line);
        const long long order = csv::parse_count(row.fields[0], row.line, "grade_order");
        const auto& name = row.fields[1];
        const double pd = csv::parse_real(row.fields[2], row.line, "pd");
        if (name.empty()) throw InputError("external methods: empty method name", row.line);
        if (order < 1 || static_cast<std::size_t>(order) > grade_count) {
            throw InputError("external methods: grade_order " + std::to_string(order) +
                                 " outside 1.." + std::to_string(grade_count),
                             row.line);
        }
        if (pd < 0.0 || pd > 1.0) throw InputError("external methods: pd outside [0,1]", row.line);
        auto it = std::find_if(columns.begin(), columns.end(),
                               [&](const MethodColumn& c) { return c.name == name; });
        if (it == columns.end()) {
            columns.push_back({name, std::vector<double>(grade_count, 0.0)});
            filled.emplace_back(grade_count, false);
            it = columns.end() - 1;
        }
        const auto col = static_cast<std::size_t>(it - columns.begin());
        const auto g = static_cast<std::size_t>(order - 1);
        if (filled[col][g]) {
            throw InputError("external methods: duplicate value for method '" + name + "', grade " +
                                 std::to_string(order),
                             row.line);
        }
        filled[col][g] = true;
        it->pds[g] = pd;
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (std::size_t g = 0; g < grade_count; ++g) {
            if (!filled[c][g]) {
                throw InputError("external method '" + columns[c].name + "' is missing grade " +
                                 std::to_string(g + 1));
            }
        }
    }
    return columns;
}

}  // namespace pdcal
