#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pdcal/cli.hpp"
#include "pdcal/csv.hpp"

namespace fs = std::filesystem;
using namespace pdcal;

namespace {

const fs::path kFixture = fs::path(PDCAL_DATA_DIR) / "sp_2016_2017.csv";

struct Run {
    int code;
    std::string err;
    std::string out;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("pdcal_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run tool(const std::string& args) {
    const auto err = scratch() / "stderr.txt";
    const auto out = scratch() / "stdout.txt";
    const std::string cmd = std::string("'") + PDCAL_TOOL_PATH + "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), slurp(err), slurp(out)};
}

fs::path write_file(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

std::string quick_calibrate(const std::string& period, const fs::path& out, const std::string& extra = "") {
    return "calibrate --input '" + kFixture.string() + "' --period " + period +
           " --n-sim 20000 --k-reps 4 --out '" + out.string() + "' " + extra;
}

std::vector<cli::CalibrationRow> read_rows(const fs::path& p) {
    std::ifstream in(p);
    return cli::read_calibration_csv(in);
}

csv::Table read_csv(const fs::path& p) {
    std::ifstream in(p);
    return csv::read_table(in);
}

}  // namespace

TEST_CASE("calibrate writes results and manifest") {
    const auto out = scratch() / "cal2016";
    const auto r = tool(quick_calibrate("2016", out, "--emit-histograms --hist-bins 12"));
    REQUIRE(r.code == 0);
    const auto text = slurp(out / "calibration.csv");
    CHECK(text.rfind("# manifest: manifest.json\n", 0) == 0);
    const auto rows = read_rows(out / "calibration.csv");
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].label == "AAA");
    CHECK(rows[4].performing == 1470);
    CHECK(rows[4].defaults == 60);
    for (std::size_t g = 0; g < rows.size(); ++g) {
        CHECK(rows[g].grade_order == int(g + 1));
        CHECK(rows[g].ci_lo <= rows[g].median);
        CHECK(rows[g].median <= rows[g].ci_hi);
        if (g > 0) CHECK(rows[g - 1].mean <= rows[g].mean);
    }
    CHECK(std::fabs(rows[4].mean - 0.030) < 0.003);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["n_sim"] == 20000);
    CHECK(manifest["k_reps"] == 4);
    CHECK(manifest["seed"] == 42);
    CHECK(manifest["tool_version"] == cli::kToolVersion);
    CHECK(manifest["input_digest_fnv1a64"] == cli::file_digest(kFixture));
    CHECK(manifest.contains("acceptance_rate_pair_5_6"));
    CHECK(manifest["acceptance_rate_pair_5_6"].get<double>() > 0.0);
    CHECK(manifest.contains("wall_clock_seconds"));

    for (int g = 1; g <= 8; ++g) {
        const auto hist = read_csv(out / ("hist_" + std::to_string(g) + ".csv"));
        CHECK(hist.header.fields == std::vector<std::string>{"bin_lower", "bin_upper", "count"});
        REQUIRE(hist.rows.size() == 12);
        long long total = 0;
        for (const auto& row : hist.rows) total += std::stoll(row.fields[2]);
        CHECK(total == 4);
    }
}

TEST_CASE("single repetition gives a degenerate interval") {
    const auto out = scratch() / "k1";
    REQUIRE(tool("calibrate --input '" + kFixture.string() + "' --period 2017 --n-sim 20000 --k-reps 1 --out '" +
                 out.string() + "'")
                .code == 0);
    for (const auto& row : read_rows(out / "calibration.csv")) {
        CHECK(row.ci_lo == row.mean);
        CHECK(row.ci_hi == row.mean);
    }
}

TEST_CASE("thread count never changes results") {
    const auto a = scratch() / "t1";
    const auto b = scratch() / "t8";
    REQUIRE(tool(quick_calibrate("2016", a, "--threads 1 --emit-histograms")).code == 0);
    REQUIRE(tool(quick_calibrate("2016", b, "--threads 8 --emit-histograms")).code == 0);
    CHECK(slurp(a / "calibration.csv") == slurp(b / "calibration.csv"));
    CHECK(slurp(a / "hist_8.csv") == slurp(b / "hist_8.csv"));
    const auto c = scratch() / "seed";
    REQUIRE(tool(quick_calibrate("2016", c, "--seed 43")).code == 0);
    CHECK(slurp(a / "calibration.csv") != slurp(c / "calibration.csv"));
}

TEST_CASE("input errors exit 2") {
    auto r = tool("calibrate --input /nonexistent/cohorts.csv --period 2016 --out '" + scratch().string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("/nonexistent/cohorts.csv") != std::string::npos);

    r = tool(quick_calibrate("1999", scratch() / "x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("1999") != std::string::npos);

    const auto bad = write_file("bad.csv", "period,grade_order,grade_label,performing_start,defaults_end\n"
                                           "2016,1,AAA,10,11\n2016,2,AA,10,0\n");
    r = tool("calibrate --input '" + bad.string() + "' --period 2016 --out '" + scratch().string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);

    CHECK(tool(quick_calibrate("2016", scratch() / "x", "--n-sim 10")).code == 2);
    CHECK(tool(quick_calibrate("2016", scratch() / "x", "--direction sideways")).code == 2);
    CHECK(tool("calibrate --period 2016").code == 2);
    CHECK(tool("frobnicate").code == 2);
    CHECK(tool("").code == 2);
    CHECK(tool("--help").code == 0);
    CHECK(tool("--version").code == 0);
}

TEST_CASE("algorithmic failures exit 3") {
    auto r = tool(quick_calibrate("2016", scratch() / "x", "--max-passes 1"));
    CHECK(r.code == 3);
    CHECK(r.err.find("pass") != std::string::npos);

    const auto inverted = write_file("inverted.csv", "period,grade_order,grade_label,performing_start,defaults_end\n"
                                                     "p,1,A,5000,4900\np,2,B,5000,10\n");
    r = tool("calibrate --input '" + inverted.string() + "' --period p --n-sim 1000 --k-reps 2 --out '" +
             scratch().string() + "/x'");
    CHECK(r.code == 3);
    CHECK(r.err.find("(A, B)") != std::string::npos);
}

TEST_CASE("compare consumes calibrate output") {
    const auto cal = scratch() / "cmp_cal";
    REQUIRE(tool(quick_calibrate("2016", cal)).code == 0);
    const auto out = scratch() / "cmp";
    const auto r = tool("compare --input '" + kFixture.string() + "' --period 2016 --calibration '" +
                        (cal / "calibration.csv").string() + "' --out '" + out.string() + "' --pretty");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("pluto_tasche") != std::string::npos);
    const auto table = read_csv(out / "comparison.csv");
    CHECK(table.header.fields == std::vector<std::string>{"grade_order", "label", "n", "simulated", "pluto_tasche"});
    REQUIRE(table.rows.size() == 8);
    const double pt1 = csv::parse_real(table.rows[0].fields[4], 0, "pt");
    CHECK(std::fabs(pt1 - 0.0117) < 0.0005);
    const auto manifest = nlohmann::json::parse(slurp(out / "comparison_manifest.json"));
    CHECK(manifest["central_tendency"].get<double>() == 124.0 / 5968.0);
    CHECK(manifest["pt_enforce_monotone"] == true);

    // weighted mean of every scaled column is the central tendency
    for (std::size_t c : {3, 4}) {
        double w = 0.0;
        for (const auto& row : table.rows) {
            w += std::stod(row.fields[2]) * csv::parse_real(row.fields[c], 0, "pd");
        }
        CHECK(w / 5968.0 == doctest::Approx(124.0 / 5968.0).epsilon(1e-12));
    }
}

TEST_CASE("compare passes external columns through") {
    const auto cal = scratch() / "ext_cal";
    REQUIRE(tool(quick_calibrate("2016", cal)).code == 0);
    // QMM column of the 2016 comparison, as printed
    const double qmm[] = {0.0003, 0.0009, 0.0027, 0.0071, 0.0163, 0.0368, 0.0982, 0.2489};
    std::string ext = "grade_order,method_name,pd\n";
    for (int g = 0; g < 8; ++g) ext += std::to_string(g + 1) + ",qmm," + csv::format_real(qmm[g]) + "\n";
    const auto ext_path = write_file("external.csv", ext);
    const auto out = scratch() / "ext";
    const std::string base = "compare --input '" + kFixture.string() + "' --period 2016 --calibration '" +
                             (cal / "calibration.csv").string() + "' --out '" + out.string() + "'";
    REQUIRE(tool(base + " --external '" + ext_path.string() + "'").code == 0);
    const auto table = read_csv(out / "comparison.csv");
    REQUIRE(table.header.fields.size() == 6);
    CHECK(table.header.fields[5] == "qmm");
    double ratio = 0.0;
    for (int g = 0; g < 8; ++g) {
        const double scaled = csv::parse_real(table.rows[g].fields[5], 0, "qmm");
        if (g == 0) ratio = scaled / qmm[0];
        CHECK(scaled / qmm[g] == doctest::Approx(ratio).epsilon(1e-12));
    }

    const auto short_ext = write_file("short.csv", "grade_order,method_name,pd\n1,cap,0.1\n");
    const auto r = tool(base + " --external '" + short_ext.string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("cap") != std::string::npos);

    CHECK(tool("compare --input '" + kFixture.string() + "' --period 2017 --calibration '" +
               (cal / "calibration.csv").string() + "' --out '" + out.string() + "'")
              .code == 0);
    const auto wrong = write_file("wrong_cal.csv", "grade_order,label\n1,AAA\n");
    CHECK(tool("compare --input '" + kFixture.string() + "' --period 2016 --calibration '" + wrong.string() +
               "' --out '" + out.string() + "'")
              .code == 2);
}

TEST_CASE("predict fits and forecasts") {
    std::string hist = "period,mu,y\n";
    for (int i = 0; i < 20; ++i) {
        const double y = -3.0 + 0.4 * i;
        hist += "t" + std::to_string(i) + "," + csv::format_real(1 / (1 + std::exp(-(-4 + 0.8 * y)))) + "," +
                csv::format_real(y) + "\n";
    }
    const auto h = write_file("hist.csv", hist);
    const auto nd = write_file("new.csv", "period,y\nnext,1.5\n");
    const auto out = scratch() / "pred";
    REQUIRE(tool("predict --history '" + h.string() + "' --newdata '" + nd.string() + "' --out '" + out.string() +
                 "'")
                .code == 0);
    const auto coef = read_csv(out / "coefficients.csv");
    REQUIRE(coef.rows.size() == 3);
    CHECK(coef.rows[0].fields[0] == "intercept");
    CHECK(std::fabs(std::stod(coef.rows[0].fields[1]) + 4) < 1e-8);
    CHECK(coef.rows[1].fields[0] == "y");
    CHECK(std::fabs(std::stod(coef.rows[1].fields[1]) - 0.8) < 1e-8);
    CHECK(coef.rows[2].fields[0] == "precision");
    const auto pred = read_csv(out / "predictions.csv");
    REQUIRE(pred.rows.size() == 1);
    CHECK(pred.rows[0].fields[0] == "next");
    CHECK(std::stod(pred.rows[0].fields[1]) == doctest::Approx(1 / (1 + std::exp(2.8))).epsilon(1e-8));

    const auto empty = write_file("empty_new.csv", "period,y\n");
    REQUIRE(tool("predict --history '" + h.string() + "' --newdata '" + empty.string() + "' --out '" +
                 out.string() + "'")
                .code == 0);
    CHECK(read_csv(out / "predictions.csv").rows.empty());
    CHECK(read_csv(out / "coefficients.csv").rows.size() == 3);
}

TEST_CASE("predict two-point grade-7 history") {
    const auto h = write_file("g7.csv", "period,mu,y\n2016,0.1077,0\n2017,0.0847,1\n");
    const auto out = scratch() / "g7";
    REQUIRE(tool("predict --history '" + h.string() + "' --out '" + out.string() + "'").code == 0);
    const auto coef = read_csv(out / "coefficients.csv");
    const auto logit = [](double p) { return std::log(p / (1 - p)); };
    CHECK(std::stod(coef.rows[0].fields[1]) == doctest::Approx(logit(0.1077)).epsilon(1e-12));
    CHECK(std::stod(coef.rows[1].fields[1]) == doctest::Approx(logit(0.0847) - logit(0.1077)).epsilon(1e-12));
    const auto manifest = nlohmann::json::parse(slurp(out / "prediction_manifest.json"));
    CHECK(manifest["precision_identified"] == false);

    const auto bad = write_file("bad_hist.csv", "period,mu,y\n2016,1.5,0\n2017,0.1,1\n");
    CHECK(tool("predict --history '" + bad.string() + "' --out '" + out.string() + "'").code == 2);
    CHECK(tool("predict --history /nonexistent.csv --out '" + out.string() + "'").code == 2);
}

TEST_CASE("file digest") {
    const auto p = write_file("digest.txt", "a");
    CHECK(cli::file_digest(p) == "af63dc4c8601ec8c");
    const auto e = write_file("empty.txt", "");
    CHECK(cli::file_digest(e) == "cbf29ce484222325");
}
