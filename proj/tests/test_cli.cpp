#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdspectral/cli.hpp"
#include "fixtures.hpp"

using json = nlohmann::json;
using Catch::Approx;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("bdspectral");
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code =
        bdspectral::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("classify emits the pinned document") {
    const CliRun r = run_cli({"classify", "--p", "0.2", "--p0", "0.2", "--r0", "0.5"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["p"].get<double>() == 0.2);
    CHECK(doc["q"].get<double>() == 0.8);
    CHECK(doc["q0"].get<double>() == Approx(0.3).margin(1e-15));
    CHECK(doc["mass_count"].get<int>() == 1);
    CHECK(doc["masses"][0]["x"].get<double>() == Approx(0.82).epsilon(1e-13));
    CHECK(doc["masses"][0]["w"].get<double>() == Approx(0.36).epsilon(1e-13));
    CHECK(doc["eta"].get<double>() == Approx(0.82).epsilon(1e-13));
    CHECK_FALSE(doc["recurrent"].get<bool>());
    CHECK_FALSE(doc["positive_recurrent"].get<bool>());
    CHECK_FALSE(doc["boundary"].get<bool>());

    // serialized numbers round-trip to the identical 64-bit values
    const auto masses = bdspectral::point_masses(fixtures::fix_a());
    CHECK(doc["masses"][0]["x"].get<double>() == masses[0].x);
    CHECK(doc["masses"][0]["w"].get<double>() == masses[0].w);

    // key order is pinned
    CHECK(r.out.find("\"p\":") < r.out.find("\"q\":"));
    CHECK(r.out.find("\"mass_count\":") < r.out.find("\"masses\":"));
    CHECK(r.out.find("\"eta\":") < r.out.find("\"recurrent\":"));
}

TEST_CASE("classify covers the region examples") {
    const CliRun none = run_cli({"classify", "--p", "0.5", "--p0", "0.3", "--r0", "0.1"});
    CHECK(json::parse(none.out)["mass_count"].get<int>() == 0);

    const CliRun two = run_cli({"classify", "--p", "0.2", "--p0", "0.6", "--r0", "0.1"});
    const json doc = json::parse(two.out);
    CHECK(doc["mass_count"].get<int>() == 2);
    CHECK(doc["masses"][0]["x"].get<double>() == Approx(-0.826836).margin(1e-6));
    CHECK(doc["masses"][0]["w"].get<double>() == Approx(0.183966).margin(1e-6));
    CHECK(doc["masses"][1]["x"].get<double>() == Approx(0.876836).margin(1e-6));
    CHECK(doc["masses"][1]["w"].get<double>() == Approx(0.316032).margin(1e-6));
}

TEST_CASE("repeated runs are byte identical") {
    const std::vector<std::string> args = {"classify", "--p", "0.3", "--p0",
                                           "0.6",      "--r0", "0.4"};
    const CliRun r1 = run_cli(args);
    const CliRun r2 = run_cli(args);
    CHECK(r1.out == r2.out);

    const std::vector<std::string> atlas_args = {"atlas", "--p", "0.2", "--grid", "40"};
    CHECK(run_cli(atlas_args).out == run_cli(atlas_args).out);
}

TEST_CASE("invalid parameters exit with code 2 and a diagnostic") {
    const CliRun bad = run_cli({"classify", "--p", "0.2", "--p0", "0.9", "--r0", "0.2"});
    CHECK(bad.code == 2);
    CHECK(bad.out.empty());
    CHECK(bad.err.find("exceed 1") != std::string::npos);

    CHECK(run_cli({"classify", "--p", "1.5", "--p0", "0.2", "--r0", "0.1"}).code == 2);
    CHECK(run_cli({"classify", "--p", "0.2"}).code == 2);      // missing required
    CHECK(run_cli({"no-such-command"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("atlas grid follows the lattice contract") {
    const CliRun r = run_cli({"atlas", "--p", "0.2", "--grid", "60"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "r0,p0,mass_count,boundary");

    double prev_r0 = -1.0, prev_p0 = -1.0;
    int rows = 0, two_mass_rows = 0;
    while (std::getline(lines, line)) {
        double r0, p0;
        int count, boundary;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%d,%d", &r0, &p0, &count, &boundary) == 4);
        CHECK(p0 > 0.0);
        CHECK(r0 + p0 <= 1.0);
        // row-major: r0 ascending, p0 ascending within a block
        if (r0 == prev_r0) CHECK(p0 > prev_p0);
        else CHECK(r0 > prev_r0);
        prev_r0 = r0;
        prev_p0 = p0;
        if (count == 2) {
            ++two_mass_rows;
            CHECK(p0 > 0.4 + 0.5 * r0 - 1e-9);
        }
        ++rows;
    }
    CHECK(rows > 1500);
    CHECK(two_mass_rows > 0);
}

TEST_CASE("atlas at p = 1/2 has no atoms anywhere") {
    const CliRun r = run_cli({"atlas", "--p", "0.5", "--grid", "40"});
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        double r0, p0;
        int count, boundary;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%d,%d", &r0, &p0, &count, &boundary) == 4);
        CHECK(count == 0);
    }
}

TEST_CASE("atlas above p = 1/2 has at most one atom, only below p0 = p") {
    const CliRun r = run_cli({"atlas", "--p", "0.85", "--grid", "50"});
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    int ones = 0;
    while (std::getline(lines, line)) {
        double r0, p0;
        int count, boundary;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%d,%d", &r0, &p0, &count, &boundary) == 4);
        CHECK((count == 0 || count == 1));
        if (count == 1) {
            ++ones;
            CHECK(p0 < 0.85);
        }
    }
    CHECK(ones > 0);
}

TEST_CASE("atlas validates inputs") {
    CHECK(run_cli({"atlas", "--p", "0.2", "--grid", "1"}).code == 2);
    CHECK(run_cli({"atlas", "--p", "0.0"}).code == 2);
}

TEST_CASE("transition document") {
    const CliRun r = run_cli({"transition", "--p", "0.2", "--p0", "0.2", "--r0", "0.5",
                              "-i", "0", "-j", "0", "-n", "2", "--method", "both"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["spectral"].get<double>() == Approx(0.41).margin(1e-8));
    CHECK(doc["oracle"].get<double>() == Approx(0.41).epsilon(1e-14));
    CHECK(doc["abs_diff"].get<double>() <= 1e-8);

    const CliRun spectral_only =
        run_cli({"transition", "--p", "0.2", "--p0", "0.2", "--r0", "0.5", "-i", "0",
                 "-j", "0", "-n", "2", "--method", "spectral"});
    const json sdoc = json::parse(spectral_only.out);
    CHECK(sdoc.contains("spectral"));
    CHECK_FALSE(sdoc.contains("oracle"));

    const CliRun oracle_only =
        run_cli({"transition", "--p", "0.2", "--p0", "0.2", "--r0", "0.5", "-i", "0",
                 "-j", "0", "-n", "2", "--method", "oracle"});
    const json odoc = json::parse(oracle_only.out);
    CHECK(odoc.contains("oracle"));
    CHECK_FALSE(odoc.contains("spectral"));
}

TEST_CASE("qsd document") {
    const CliRun r = run_cli(
        {"qsd", "--p", "0.2", "--p0", "0.2", "--r0", "0.5", "--x", "0.9"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["x"].get<double>() == 0.9);
    CHECK(doc["alpha"][0].get<double>() == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(doc["jcut"].get<int>() >= 8);
    CHECK(doc["tail_bound"].get<double>() < 1e-10);

    CHECK(run_cli({"qsd", "--p", "0.2", "--p0", "0.2", "--r0", "0.5", "--x", "0.5"}).code ==
          2);
    CHECK(run_cli({"qsd", "--p", "0.5", "--p0", "1.0", "--r0", "0.0", "--x", "0.9"}).code ==
          2);
}

TEST_CASE("ratio limit documents") {
    const CliRun r = run_cli({"ratio-limit", "--p", "0.2", "--p0", "0.6", "--r0", "0.1",
                              "-i", "0", "-j", "0", "-k", "1", "-l", "1"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["limit"].get<double>() == Approx(0.795393).margin(1e-6));
    CHECK(doc["mode"].get<std::string>() == "full");
    CHECK(doc["eta"].get<double>() == Approx(0.876836).margin(1e-6));
    CHECK_FALSE(doc.contains("no_mass_caveat"));

    const CliRun parity =
        run_cli({"ratio-limit", "--p", "0.5", "--p0", "1.0", "--r0", "0.0", "-i", "0",
                 "-j", "0", "-k", "1", "-l", "1", "--parity", "even"});
    REQUIRE(parity.code == 0);
    const json pdoc = json::parse(parity.out);
    CHECK(pdoc["mode"].get<std::string>() == "even-subsequence");
    CHECK(pdoc["limit"].get<double>() == Approx(0.5).epsilon(1e-12));
    CHECK(pdoc["no_mass_caveat"].get<bool>());

    CHECK(run_cli({"ratio-limit", "--p", "0.5", "--p0", "0.3", "--r0", "0.1", "-i", "0",
                   "-j", "0", "-k", "1", "-l", "1"})
              .code == 2);
}

TEST_CASE("measure documents") {
    const CliRun r = run_cli({"measure", "--p", "0.2", "--p0", "0.2", "--r0", "0.5",
                              "--nodes", "32"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["eta"].get<double>() == Approx(0.82).epsilon(1e-13));
    REQUIRE(doc["nodes"].size() == 32);
    REQUIRE(doc["density"].size() == 32);
    for (std::size_t k = 0; k < 32; ++k) {
        const double x = doc["nodes"][k].get<double>();
        CHECK(doc["density"][k].get<double>() ==
              bdspectral::density_at(fixtures::fix_a(), x));
    }

    const CliRun csv = run_cli({"measure", "--p", "0.2", "--p0", "0.2", "--r0", "0.5",
                                "--nodes", "8", "--format", "csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("x,density\n", 0) == 0);
    CHECK(run_cli({"measure", "--p", "0.2", "--p0", "0.2", "--r0", "0.5", "--format",
                   "tsv"})
              .code == 2);
}

TEST_CASE("verify passes on a recurrent fixture and names the atom check") {
    const CliRun r = run_cli(
        {"verify", "--p", "0.3", "--p0", "0.6", "--r0", "0.4", "--nodes", "1024"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["all_pass"].get<bool>());
    bool found = false;
    for (const auto& c : doc["checks"]) {
        CHECK(c["pass"].get<bool>());
        if (c["name"].get<std::string>() == "mass_at_one_equals_inverse_pi_sum")
            found = true;
    }
    CHECK(found);
}

TEST_CASE("unwritable output path exits with code 3") {
    const CliRun r = run_cli({"classify", "--p", "0.2", "--p0", "0.2", "--r0", "0.5",
                              "--output", "/nonexistent-dir/out.json"});
    CHECK(r.code == 3);
    CHECK(r.err.find("cannot open") != std::string::npos);
}
