#include "pdcal/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pdcal/benchmarks.hpp"
#include "pdcal/betareg.hpp"
#include "pdcal/cohorts.hpp"
#include "pdcal/csv.hpp"
#include "pdcal/error.hpp"
#include "pdcal/posterior.hpp"

namespace pdcal::cli {
namespace {

namespace fs = std::filesystem;
using Manifest = nlohmann::ordered_json;
using csv::format_real;

struct CalibrateOptions {
    std::string input;
    std::string period;
    CalibrationConfig config;
    double prior_alpha = 1.0;
    double prior_beta = 1.0;
    std::string direction = "ascending";
    std::string out = ".";
    bool histograms = false;
    std::size_t hist_bins = 30;
    bool pretty = false;
};

struct CompareOptions {
    std::string input;
    std::string period;
    std::string calibration;
    double pt_confidence = 0.75;
    bool pt_no_monotone = false;
    std::string external;
    std::string out = ".";
    bool pretty = false;
};

struct PredictOptions {
    std::string history;
    std::string newdata;
    std::string out = ".";
};

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError("cannot create output directory '" + dir.string() + "'");
    }
}

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
    return in;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
    auto out = open_output(path);
    out << manifest.dump(2) << '\n';
}

std::string percent(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f%%", 100.0 * value);
    return buffer;
}

int cmd_calibrate(const CalibrateOptions& opt) {
    const auto started = std::chrono::steady_clock::now();
    if (opt.direction != "ascending" && opt.direction != "descending") {
        throw InputError("--direction must be ascending or descending");
    }
    CalibrationConfig cfg = opt.config;
    cfg.direction = opt.direction == "ascending" ? SweepDirection::ascending : SweepDirection::descending;
    cfg.validate();

    const auto snapshots = parse_cohort_csv(fs::path(opt.input));
    const auto& snapshot = find_period(snapshots, opt.period);
    const auto posterior = compute_posterior(snapshot, {opt.prior_alpha, opt.prior_beta});
    const auto result = calibrate(posterior, cfg);
    const auto rates = observed_default_rates(snapshot);

    const fs::path out_dir(opt.out);
    ensure_directory(out_dir);
    {
        auto out = open_output(out_dir / "calibration.csv");
        out << "# manifest: manifest.json\n";
        out << "grade_order,label,n,d,observed_rate,alpha_hat,beta_hat,mean,median,ci_lo,ci_hi\n";
        for (std::size_t g = 0; g < result.grades.size(); ++g) {
            const auto& r = result.grades[g];
            out << snapshot[g].order << ',' << r.label << ',' << r.performing << ',' << r.defaults
                << ',' << format_real(rates[g].rate) << ',' << format_real(r.alpha_hat) << ','
                << format_real(r.beta_hat) << ',' << format_real(r.mean) << ','
                << format_real(r.median) << ',' << format_real(r.ci_lower) << ','
                << format_real(r.ci_upper) << '\n';
        }
    }
    if (opt.histograms) {
        const auto hists = export_histograms(result, opt.hist_bins);
        for (std::size_t g = 0; g < hists.size(); ++g) {
            auto out = open_output(out_dir / ("hist_" + std::to_string(snapshot[g].order) + ".csv"));
            out << "# manifest: manifest.json\n";
            out << "bin_lower,bin_upper,count\n";
            for (std::size_t b = 0; b < hists[g].counts.size(); ++b) {
                out << format_real(hists[g].bin_lower(b)) << ',' << format_real(hists[g].bin_upper(b))
                    << ',' << hists[g].counts[b] << '\n';
            }
        }
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Manifest manifest;
    manifest["tool"] = "pdcal";
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = "calibrate";
    manifest["input"] = opt.input;
    manifest["input_digest_fnv1a64"] = file_digest(opt.input);
    manifest["period"] = opt.period;
    manifest["n_sim"] = cfg.n_sim;
    manifest["k_reps"] = cfg.k_reps;
    manifest["seed"] = cfg.seed;
    manifest["ci_level"] = cfg.ci_level;
    manifest["min_accepted"] = cfg.min_accepted;
    manifest["max_resample_rounds"] = cfg.max_resample_rounds;
    manifest["max_passes"] = cfg.max_passes;
    manifest["direction"] = opt.direction;
    manifest["threads"] = cfg.threads;
    manifest["prior_alpha"] = opt.prior_alpha;
    manifest["prior_beta"] = opt.prior_beta;
    manifest["reported_params"] = "alpha_hat and beta_hat averaged over repetitions";
    manifest["ci_method"] = "empirical quantiles of repetition means, linear interpolation";
    manifest["mean_passes"] = result.mean_passes;
    for (std::size_t i = 0; i < result.pair_acceptance.size(); ++i) {
        manifest["acceptance_rate_pair_" + std::to_string(snapshot[i].order) + "_" +
                 std::to_string(snapshot[i + 1].order)] = result.pair_acceptance[i];
    }
    std::string warnings;
    for (const auto& w : result.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    manifest["warnings"] = warnings;
    manifest["histograms"] = opt.histograms;
    manifest["wall_clock_seconds"] = seconds;
    manifest["created_at"] = utc_timestamp();
    write_manifest(out_dir / "manifest.json", manifest);

    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    if (opt.pretty) {
        std::printf("%-6s %-8s %10s %10s %10s %10s %10s\n", "order", "grade", "observed", "mean",
                    "median", "ci_lo", "ci_hi");
        for (std::size_t g = 0; g < result.grades.size(); ++g) {
            const auto& r = result.grades[g];
            std::printf("%-6d %-8s %10s %10s %10s %10s %10s\n", snapshot[g].order, r.label.c_str(),
                        percent(rates[g].rate).c_str(), percent(r.mean).c_str(),
                        percent(r.median).c_str(), percent(r.ci_lower).c_str(),
                        percent(r.ci_upper).c_str());
        }
    }
    return kExitOk;
}

int cmd_compare(const CompareOptions& opt) {
    const auto snapshots = parse_cohort_csv(fs::path(opt.input));
    const auto& snapshot = find_period(snapshots, opt.period);

    auto calib_in = open_input(opt.calibration, "calibration file");
    const auto rows = read_calibration_csv(calib_in);
    if (rows.size() != snapshot.size()) {
        throw InputError("calibration file has " + std::to_string(rows.size()) + " grades, period " +
                         opt.period + " has " + std::to_string(snapshot.size()));
    }
    std::vector<double> simulated;
    for (std::size_t g = 0; g < rows.size(); ++g) {
        if (rows[g].label != snapshot[g].label) {
            throw InputError("calibration grade '" + rows[g].label + "' does not match input grade '" +
                             snapshot[g].label + "'");
        }
        simulated.push_back(rows[g].mean);
    }

    std::vector<MethodColumn> external;
    if (!opt.external.empty()) {
        auto ext_in = open_input(opt.external, "external methods file");
        external = parse_external_methods(ext_in, snapshot.size());
    }
    const PTConfig pt_cfg{opt.pt_confidence, !opt.pt_no_monotone};
    const auto pt = pluto_tasche(snapshot, pt_cfg);
    const auto table = build_comparison(snapshot, simulated, pt, external);

    const fs::path out_dir(opt.out);
    ensure_directory(out_dir);
    {
        auto out = open_output(out_dir / "comparison.csv");
        out << "# manifest: comparison_manifest.json\n";
        out << "grade_order,label,n";
        for (const auto& c : table.columns) out << ',' << c.name;
        out << '\n';
        for (std::size_t g = 0; g < snapshot.size(); ++g) {
            out << snapshot[g].order << ',' << table.labels[g] << ',' << table.performing[g];
            for (const auto& c : table.columns) out << ',' << format_real(c.pds[g]);
            out << '\n';
        }
    }
    Manifest manifest;
    manifest["tool"] = "pdcal";
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = "compare";
    manifest["input"] = opt.input;
    manifest["input_digest_fnv1a64"] = file_digest(opt.input);
    manifest["calibration"] = opt.calibration;
    manifest["calibration_digest_fnv1a64"] = file_digest(opt.calibration);
    manifest["external"] = opt.external;
    manifest["period"] = opt.period;
    manifest["pt_confidence"] = pt_cfg.confidence;
    manifest["pt_enforce_monotone"] = pt_cfg.enforce_monotone;
    manifest["central_tendency"] = table.central_tendency;
    manifest["total_performing"] = table.total_performing;
    manifest["total_defaults"] = table.total_defaults;
    for (std::size_t g = 0; g < pt.size(); ++g) {
        manifest["pluto_tasche_unscaled_" + std::to_string(snapshot[g].order)] = pt[g];
    }
    manifest["created_at"] = utc_timestamp();
    write_manifest(out_dir / "comparison_manifest.json", manifest);

    if (opt.pretty) {
        std::printf("central tendency %s\n%-6s %-8s", percent(table.central_tendency).c_str(), "order",
                    "grade");
        for (const auto& c : table.columns) std::printf(" %14s", c.name.c_str());
        std::printf("\n");
        for (std::size_t g = 0; g < snapshot.size(); ++g) {
            std::printf("%-6d %-8s", snapshot[g].order, table.labels[g].c_str());
            for (const auto& c : table.columns) std::printf(" %14s", percent(c.pds[g]).c_str());
            std::printf("\n");
        }
    }
    return kExitOk;
}

int cmd_predict(const PredictOptions& opt) {
    auto history_in = open_input(opt.history, "history file");
    const auto history = parse_history_csv(history_in);
    const auto model = fit(history.rows);

    LabelledRows newdata;
    if (!opt.newdata.empty()) {
        auto new_in = open_input(opt.newdata, "new data file");
        newdata = parse_newdata_csv(new_in);
        if (newdata.regressor_names != history.regressor_names) {
            throw InputError("new data regressor columns do not match history columns");
        }
    }

    const fs::path out_dir(opt.out);
    ensure_directory(out_dir);
    {
        auto out = open_output(out_dir / "coefficients.csv");
        out << "# manifest: prediction_manifest.json\n";
        out << "term,value\n";
        out << "intercept," << format_real(model.intercept) << '\n';
        for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
            out << history.regressor_names[j] << ',' << format_real(model.coefficients[j]) << '\n';
        }
        out << "precision," << format_real(model.precision) << '\n';
    }
    {
        auto out = open_output(out_dir / "predictions.csv");
        out << "# manifest: prediction_manifest.json\n";
        out << "period,mu,alpha,beta\n";
        for (std::size_t t = 0; t < newdata.rows.size(); ++t) {
            const auto p = predict_mean(model, newdata.rows[t].regressors);
            out << newdata.labels[t] << ',' << format_real(p.mean) << ','
                << format_real(p.implied.alpha()) << ',' << format_real(p.implied.beta()) << '\n';
        }
    }
    Manifest manifest;
    manifest["tool"] = "pdcal";
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = "predict";
    manifest["history"] = opt.history;
    manifest["history_digest_fnv1a64"] = file_digest(opt.history);
    manifest["newdata"] = opt.newdata;
    manifest["link"] = "logit";
    manifest["estimator"] = "least squares on the logit scale";
    manifest["observations"] = history.rows.size();
    manifest["precision_identified"] = model.precision_identified;
    manifest["created_at"] = utc_timestamp();
    write_manifest(out_dir / "prediction_manifest.json", manifest);
    return kExitOk;
}

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buffer[65536];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::vector<CalibrationRow> read_calibration_csv(std::istream& in) {
    const auto table = csv::read_table(in);
    const std::vector<std::string> header{"grade_order", "label",  "n",    "d",
                                          "observed_rate", "alpha_hat", "beta_hat", "mean",
                                          "median",      "ci_lo",  "ci_hi"};
    if (table.header.fields != header) {
        throw InputError("calibration file: unexpected header", table.header.line);
    }
    std::vector<CalibrationRow> rows;
    for (const auto& row : table.rows) {
        if (row.fields.size() != header.size()) {
            throw InputError("calibration file: expected 11 fields", row.line);
        }
        const auto& f = row.fields;
        rows.push_back({static_cast<int>(csv::parse_count(f[0], row.line, "grade_order")), f[1],
                        csv::parse_count(f[2], row.line, "n"), csv::parse_count(f[3], row.line, "d"),
                        csv::parse_real(f[4], row.line, "observed_rate"),
                        csv::parse_real(f[5], row.line, "alpha_hat"),
                        csv::parse_real(f[6], row.line, "beta_hat"),
                        csv::parse_real(f[7], row.line, "mean"),
                        csv::parse_real(f[8], row.line, "median"),
                        csv::parse_real(f[9], row.line, "ci_lo"),
                        csv::parse_real(f[10], row.line, "ci_hi")});
    }
    return rows;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Probability-of-default calibration for rating grades"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CalibrateOptions cal;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate monotone PDs by constrained simulation");
    calibrate_cmd->add_option("--input", cal.input, "Cohort CSV")->required();
    calibrate_cmd->add_option("--period", cal.period, "Period label to calibrate")->required();
    calibrate_cmd->add_option("--n-sim", cal.config.n_sim, "Simulated values per pair step")
        ->default_val(100000);
    calibrate_cmd->add_option("--k-reps", cal.config.k_reps, "Independent repetitions")->default_val(300);
    calibrate_cmd->add_option("--seed", cal.config.seed, "Random seed")->default_val(42);
    calibrate_cmd->add_option("--ci", cal.config.ci_level, "Confidence level")->default_val(0.90);
    calibrate_cmd->add_option("--min-accepted", cal.config.min_accepted)->default_val(100);
    calibrate_cmd->add_option("--max-resample-rounds", cal.config.max_resample_rounds)->default_val(10);
    calibrate_cmd->add_option("--max-passes", cal.config.max_passes)->default_val(20);
    calibrate_cmd->add_option("--direction", cal.direction, "ascending or descending")
        ->default_val("ascending");
    calibrate_cmd->add_option("--prior-alpha", cal.prior_alpha)->default_val(1.0);
    calibrate_cmd->add_option("--prior-beta", cal.prior_beta)->default_val(1.0);
    calibrate_cmd->add_option("--threads", cal.config.threads, "Worker threads (0 = all cores)")
        ->default_val(0);
    calibrate_cmd->add_option("--out", cal.out, "Output directory")->default_val(".");
    calibrate_cmd->add_flag("--emit-histograms", cal.histograms, "Write hist_<grade>.csv files");
    calibrate_cmd->add_option("--hist-bins", cal.hist_bins)->default_val(30);
    calibrate_cmd->add_flag("--pretty", cal.pretty, "Print a percentage table to stdout");

    CompareOptions cmp;
    auto* compare_cmd = app.add_subcommand("compare", "Scale and compare against Pluto-Tasche");
    compare_cmd->add_option("--input", cmp.input, "Cohort CSV")->required();
    compare_cmd->add_option("--period", cmp.period)->required();
    compare_cmd->add_option("--calibration", cmp.calibration, "calibration.csv")->required();
    compare_cmd->add_option("--pt-confidence", cmp.pt_confidence)->default_val(0.75);
    compare_cmd->add_flag("--pt-no-monotone", cmp.pt_no_monotone, "Skip the running maximum");
    compare_cmd->add_option("--external", cmp.external, "CSV grade_order,method_name,pd");
    compare_cmd->add_option("--out", cmp.out)->default_val(".");
    compare_cmd->add_flag("--pretty", cmp.pretty);

    PredictOptions pred;
    auto* predict_cmd = app.add_subcommand("predict", "Fit a beta regression and predict PDs");
    predict_cmd->add_option("--history", pred.history, "CSV period,mu,y1,...,yk")->required();
    predict_cmd->add_option("--newdata", pred.newdata, "CSV period,y1,...,yk");
    predict_cmd->add_option("--out", pred.out)->default_val(".");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*calibrate_cmd) return cmd_calibrate(cal);
        if (*compare_cmd) return cmd_compare(cmp);
        if (*predict_cmd) return cmd_predict(pred);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericError& e) {
        std::cerr << "calibration failed: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitInput;
}

}  // namespace pdcal::cli
