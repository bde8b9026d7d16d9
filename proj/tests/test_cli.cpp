#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "qsir/forecaster.hpp"
#include "qsir/io.hpp"
#include "qsir/sir.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

fs::path workdir() {
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("qsir_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run(const std::string& args) {
    const auto out = workdir() / "stdout.txt";
    const auto err = workdir() / "stderr.txt";
    const std::string cmd = std::string(QSIR_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write_text(const std::string& name, const std::string& text) {
    std::ofstream(path(name)) << text;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n' ? 1 : 0;
    return n;
}

} // namespace

TEST_CASE("simulate then estimate") {
    REQUIRE(run("simulate --model M1 --n 1000 --d 4 --seed 3 --output " + path("m1.csv")).code == 0);
    const auto r = run("estimate --input " + path("m1.csv") + " --N 200 --m 5 --B 5 --classical 5 --output " +
                       path("est.csv"));
    REQUIRE(r.code == 0);
    const auto kv = key_values(r.out);
    const std::vector<double> beta{1, -1, 0, 0};
    CHECK(qsir::cos_squared(qsir::io::parse_vector(kv.at("direction")), beta) >= 0.9);
    REQUIRE(kv.count("classical_direction") == 1);
    CHECK(qsir::cos_squared(qsir::io::parse_vector(kv.at("classical_direction")), beta) >= 0.9);
    std::ifstream est(path("est.csv"));
    CHECK(qsir::io::read_estimate_direction(est) == qsir::io::parse_vector(kv.at("direction")));

    const auto again = run("estimate --input " + path("m1.csv") + " --N 200 --m 5 --B 5 --classical 5");
    CHECK(again.out == r.out);
}

TEST_CASE("estimate in one dimension") {
    std::string csv = "x1,y\n";
    for (int i = 0; i < 60; ++i) csv += std::to_string(i * 0.1 - 3) + "," + std::to_string(-(i % 7) - i) + "\n";
    write_text("d1.csv", csv);
    const auto r = run("estimate --input " + path("d1.csv") + " --N 10 --m 3 --B 2");
    REQUIRE(r.code == 0);
    CHECK(key_values(r.out).at("direction") == "1");
}

TEST_CASE("quantize") {
    write_text("two.csv", "a,b\n0,0\n1,2\n");
    const auto r = run("quantize --input " + path("two.csv") + " --N 2 --output " + path("cb.csv"));
    REQUIRE(r.code == 0);
    CHECK(key_values(r.out).at("error") == "0");
    std::ifstream cb(path("cb.csv"));
    CHECK(qsir::io::read_codebook(cb).size() == 2);

    CHECK(run("quantize --input " + path("two.csv") + " --N 3 --output " + path("cb.csv")).code == 1);
    CHECK(run("quantize --input " + path("missing.csv") + " --N 2 --output " + path("cb.csv")).code == 2);
    CHECK(run("quantize --input " + path("two.csv") + " --N 0 --output " + path("cb.csv")).code == 1);
    CHECK(run("quantize --input " + path("two.csv") + " --N 1 --output /nonexistent/dir/cb.csv").code == 2);
}

TEST_CASE("forecast") {
    REQUIRE(run("simulate --model M1 --n 10000 --d 4 --seed 8 --output " + path("m1big.csv")).code == 0);
    const std::string base = "forecast --data " + path("m1big.csv") + " --m 100 --x 0.5,-0.5,1,0 ";
    const auto r = run(base + "--beta 1,-1,0,0 --mean --var --quantile 0.5 --interval 0.9 --save-model " +
                       path("model.csv"));
    REQUIRE(r.code == 0);
    const auto kv = key_values(r.out);
    CHECK(std::abs(std::stod(kv.at("mean")) - 1.0) <= 0.25);
    CHECK(kv.count("var") == 1);
    CHECK(kv.count("quantile_0.5") == 1);
    CHECK(std::stod(kv.at("low")) <= std::stod(kv.at("high")));

    std::ifstream model_file(path("model.csv"));
    const auto model = qsir::io::read_transition(model_file);
    CHECK(qsir::io::format_double(qsir::conditional_expectation(model, 1.0)) == kv.at("mean"));

    CHECK(run(base + "--beta 1,-1,0").code == 1);
    CHECK(run("forecast --data " + path("m1big.csv") + " --m 100 --x 0.5,-0.5,1 --beta 1,-1,0,0").code == 1);
    CHECK(run(base + "--beta 0,0,0,0").code == 3);
    CHECK(run(base).code == 1);
    CHECK(run(base + "--beta 1,-1,0,0 --quantile 1.5").code == 1);
    CHECK(run(base + "--estimate " + path("none.csv")).code == 2);
}

TEST_CASE("forecast from an estimate file") {
    REQUIRE(run("simulate --model M2 --n 3000 --d 4 --seed 5 --output " + path("m2.csv")).code == 0);
    REQUIRE(run("estimate --input " + path("m2.csv") + " --N 100 --output " + path("m2est.csv")).code == 0);
    const auto r = run("forecast --data " + path("m2.csv") + " --estimate " + path("m2est.csv") +
                       " --align 1,-1,0,0 --m 30 --x 0.5,-0.5,1,0 --mean");
    REQUIRE(r.code == 0);
    CHECK(std::abs(std::stod(key_values(r.out).at("index")) - 1.0) < 0.2);
    write_text("ortho.csv", "method,d,beta1,beta2,beta3,beta4,principal_value\npooled,4,0,0,1,0,0.5\n");
    CHECK(run("forecast --data " + path("m2.csv") + " --estimate " + path("ortho.csv") +
              " --align 1,-1,0,0 --m 30 --x 0.5,-0.5,1,0")
              .code == 3);
}

TEST_CASE("simulate") {
    REQUIRE(run("simulate --model M1 --n 10 --d 3 --seed 42 --output " + path("a.csv")).code == 0);
    REQUIRE(run("simulate --model M1 --n 10 --d 3 --seed 42 --output " + path("b.csv")).code == 0);
    CHECK(slurp(path("a.csv")) == slurp(path("b.csv")));
    CHECK(slurp(path("a.csv")).rfind("x1,x2,x3,y\n", 0) == 0);
    CHECK(line_count(slurp(path("a.csv"))) == 11);

    CHECK(run("simulate --model M3 --n 10 --output " + path("c.csv")).code == 1);
    CHECK(run("simulate --model M3 --theta 5 --n 10 --output " + path("c.csv")).code == 0);
    CHECK(run("simulate --model M1 --n 0 --output " + path("c.csv")).code == 1);
    CHECK(run("simulate --model M9 --n 10 --output " + path("c.csv")).code == 1);
    CHECK(run("simulate --model M1 --n 10 --output /nonexistent/dir/c.csv").code == 2);
    CHECK(run("bogus").code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("experiment") {
    write_text("est.ini", "[experiment]\nkind = estimation\nseed = 1\nd = 4\nmodels = M1, M3:10\n"
                          "[estimation]\nn_values = 300\nN_values = 20\nreplications = 2\nB = 2\n");
    const auto r = run("experiment --config " + path("est.ini") + " --output " + path("report.csv"));
    REQUIRE(r.code == 0);
    const std::string report = slurp(path("report.csv"));
    CHECK(line_count(report) == 1 + 2 * 2 * 2);
    CHECK(line_count(slurp(path("report_summary.csv"))) == 1 + 2 * 2);

    REQUIRE(run("experiment --config " + path("est.ini") + " --output " + path("report2.csv") + " --summary " +
                path("s2.csv"))
                .code == 0);
    CHECK(slurp(path("report2.csv")) == report);

    write_text("fc.ini", "[experiment]\nkind = forecast\nseed = 3\nd = 4\nmodels = M1, M2, M3:1, M3:5, M3:10\n"
                         "[forecast]\nn = 2000\nN = 50\nm_forecast = 20\nqueries = 0.5,-0.5,1,0\n");
    REQUIRE(run("experiment --config " + path("fc.ini") + " --output " + path("fc.csv")).code == 0);
    const std::string fc = slurp(path("fc.csv"));
    CHECK(line_count(fc) == 1 + 5 * 2);
    for (const char* id : {"M1,", "M2,", "M3,1,", "M3,5,", "M3,10,"}) CHECK(fc.find(std::string("\n") + id) != std::string::npos);

    write_text("bad.ini", "[experiment]\nkind = estimation\nd = 4\nmodels = M7\ncolour = red\n"
                          "[estimation]\nn_values = 300\nN_values = 20\n");
    const auto bad = run("experiment --config " + path("bad.ini") + " --output " + path("x.csv"));
    CHECK(bad.code == 1);
    CHECK(bad.err.find("experiment.models") != std::string::npos);
    CHECK(bad.err.find("experiment.colour") != std::string::npos);
    CHECK(run("experiment --config " + path("none.ini") + " --output " + path("x.csv")).code == 2);
}
