#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spef/cli.hpp"
#include "spef/profile.hpp"
#include "spef/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "spef");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = spef::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "spef_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(spef::report::format_number(2.10814) == "2.10814");
    CHECK(spef::report::format_number(211.78054) == "211.781");
    CHECK(spef::report::format_number(1e-7) == "1e-07");
    CHECK(spef::report::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("dataset CSV parsing") {
    std::istringstream good("x1,x2,y,delta\n1,2,3,1\n0.5,-1,2,0\n4,4,4,1\n");
    const auto data = spef::report::read_dataset_csv(good);
    CHECK(data.size() == 3);
    CHECK(data.dim() == 2);
    CHECK_FALSE(data[1].observed);
    std::istringstream no_delta("x1,y\n1,2\n3,4\n");
    CHECK(spef::report::read_dataset_csv(no_delta)[0].observed);

    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            spef::report::read_dataset_csv(in);
        } catch (const spef::report::ParseError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("x1,y\n1,2\n3,abc\n").find("line 3, field 2") != std::string::npos);
    CHECK(message("x1,y,delta\n1,2,1\n3,4,2\n").find("line 3") != std::string::npos);
    CHECK(message("x1,y\n1,2\n3\n").find("line 3") != std::string::npos);
    CHECK(message("a,y\n1,2\n3,4\n").find("line 1") != std::string::npos);
    CHECK_FALSE(message("").empty());
}

TEST_CASE("config files") {
    std::istringstream text("# comment\nexperiment = exp1\nn = 50\nsigma2 = 1.15\nprofile_box = 0, 5\n");
    const auto kv = spef::report::read_key_values(text);
    const auto config = spef::report::apply_config(kv, {});
    CHECK(config.n == 50);
    CHECK(config.sigma2 == 1.15);
    CHECK(config.profile_search.box.hi[0] == 5.0);
    std::istringstream dup("n = 1\nn = 2\n");
    CHECK_THROWS_AS(spef::report::read_key_values(dup), spef::report::ParseError);
    std::istringstream junk("n 1\n");
    CHECK_THROWS_AS(spef::report::read_key_values(junk), spef::report::ParseError);
    CHECK_THROWS_AS(spef::report::apply_config({{"colour", "red"}}, {}), spef::report::ParseError);
    CHECK_THROWS_AS(spef::report::apply_config({{"n", "ten"}}, {}), spef::report::ParseError);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run({}).code == spef::cli::kExitUsage);
    CHECK(run({"table9"}).code == spef::cli::kExitUsage);
    CHECK(run({"table1", "--reps", "0"}).code == spef::cli::kExitUsage);
    CHECK(run({"table1", "--partition", "simpson", "--reps", "1"}).code == spef::cli::kExitUsage);
    const auto bad = scratch("bad.csv");
    write(bad, "x1,y\n1,2\n3,oops\n");
    const auto outcome = run({"fit", "--data", bad.string(), "--out", scratch("bad_fit.csv").string()});
    CHECK(outcome.code == spef::cli::kExitUsage);
    CHECK(outcome.err.find("line 3") != std::string::npos);
    const auto cfg = scratch("bad.cfg");
    write(cfg, "experiment = exp1\nwidth = 3\n");
    CHECK(run({"custom", "--config", cfg.string(), "--out", scratch("bad_custom.csv").string()}).code ==
          spef::cli::kExitUsage);
    CHECK(run({"fit", "--data", scratch("missing.csv").string()}).code == spef::cli::kExitUsage);
}

TEST_CASE("table CSV is byte-identical across worker counts") {
    const auto one = scratch("t1_threads1.csv");
    const auto three = scratch("t1_threads3.csv");
    const std::vector<std::string> common{"table1", "--n", "100", "--mu", "1", "--sigma2", "1", "--reps", "3"};
    auto a = common;
    a.insert(a.end(), {"--threads", "1", "--out", one.string()});
    auto b = common;
    b.insert(b.end(), {"--threads", "3", "--out", three.string()});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    const std::string csv = slurp(one);
    CHECK(csv == slurp(three));
    CHECK(csv.rfind("config,estimator,parameter,mean,median,MSE,bias,sd,failures\n", 0) == 0);
    CHECK(fs::exists(spef::report::manifest_path(one)));
    const std::string manifest = slurp(spef::report::manifest_path(one));
    for (const char* key : {"partition", "f_star", "loo_weights", "profile_box", "rank_box", "master_seed",
                            "version", "wall_time_seconds", "failures"}) {
        CHECK(manifest.find(key) != std::string::npos);
    }
}

TEST_CASE("fit on a three-row CSV matches a grid-scan oracle") {
    const auto data_path = scratch("three.csv");
    write(data_path, "x1,y\n0.1,0.4\n0.9,1.5\n-0.6,-1.1\n");
    const auto out = scratch("three_fit.csv");
    REQUIRE(run({"fit", "--data", data_path.string(), "--profile-box", "-5", "5", "--out", out.string()}).code == 0);
    std::ifstream in(data_path);
    const auto data = spef::report::read_dataset_csv(in);
    const spef::ProfileObjective objective(data);
    double best = -std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (int j = 0; j <= 1000; ++j) {
        const std::vector<double> b{-5.0 + 0.01 * j};
        const double v = objective(b);
        if (v > best) {
            best = v;
            arg = b[0];
        }
    }
    std::istringstream csv(slurp(out));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "quantity,value");
    std::getline(csv, line);
    REQUIRE(line.rfind("beta,", 0) == 0);
    const double beta = std::stod(line.substr(5));
    CHECK(std::abs(beta - arg) < 0.02);
    CHECK(fs::exists(scratch("three_fit_curve.csv")));
}

TEST_CASE("the installed tool runs") {
    const std::string command = std::string(SPEF_TOOL_PATH) + " --version > /dev/null";
    CHECK(std::system(command.c_str()) == 0);
}
