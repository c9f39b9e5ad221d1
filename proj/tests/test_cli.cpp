#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KNINST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "kninst_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("roots subcommand: slow dS example structure") {
    const fs::path dir = fresh_dir("roots");
    REQUIRE(run_cli("roots -M 1 -a 0.1 -e 0.1 --Lambda 0.03 --out " + dir.string()) == 0);
    const json out = json::parse(slurp(dir / "roots.json"));
    CHECK(out["schema_version"] == "1");
    CHECK(out["config"]["M"] == 1.0);
    REQUIRE(out["structure"]["roots"].size() == 4);
    const std::vector<std::string> want = {"dS+", "I", "II", "III", "dS-"};
    REQUIRE(out["block_labels"].size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(out["block_labels"][i] == want[i]);
    CHECK(out["discriminants"]["predicted_real_count"] == 4);
}

TEST_CASE("theta-horizons subcommand: critical spin example") {
    const fs::path dir = fresh_dir("thor");
    REQUIRE(run_cli("theta-horizons -M 1 -a 2 --Lambda 3 --out " + dir.string()) == 0);
    const json out = json::parse(slurp(dir / "theta_horizons.json"));
    CHECK(out["a_crit"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out["theta_minus"].get<double>() == doctest::Approx(M_PI / 3.0).epsilon(1e-13));
    CHECK(out["theta_plus"].get<double>() == doctest::Approx(2.0 * M_PI / 3.0).epsilon(1e-13));
    // No horizons below critical spin.
    REQUIRE(run_cli("theta-horizons -M 1 -a 0.5 --Lambda 3 --out " + dir.string()) == 0);
    const json none = json::parse(slurp(dir / "theta_horizons.json"));
    CHECK(none["theta_minus"].is_null());
}

TEST_CASE("exit codes: invalid config is 2, numeric failure is 3") {
    const fs::path dir = fresh_dir("codes");
    {
        std::ofstream cfg(dir / "bad.json");
        cfg << R"({"M": 1.0, "bogus": 2})";
    }
    CHECK(run_cli("roots --config " + (dir / "bad.json").string() + " --out " + dir.string()) ==
          2);
    CHECK(run_cli("signature-map -M 1 --r-min 5 --r-max 1 --out " + dir.string()) == 2);
    // Seeding a trace exactly on a pole is a chart failure.
    CHECK(run_cli("trace -M 1 -a 0.5 --Lambda -0.3 --r0 3 --theta0 0 --vr 1 --out " +
                  dir.string()) == 3);
}

TEST_CASE("config file provides defaults and flags override") {
    const fs::path dir = fresh_dir("config");
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"M": 1.0, "a": 0.1, "e": 0.1, "Lambda": 0.03})";
    }
    REQUIRE(run_cli("roots --config " + (dir / "cfg.json").string() + " --out " + dir.string()) ==
            0);
    json out = json::parse(slurp(dir / "roots.json"));
    CHECK(out["config"]["a"] == 0.1);
    REQUIRE(run_cli("roots --config " + (dir / "cfg.json").string() + " -a 0.2 --out " +
                    dir.string()) == 0);
    out = json::parse(slurp(dir / "roots.json"));
    CHECK(out["config"]["a"] == 0.2);
}

TEST_CASE("signature-map CSV: schema preamble, header, LF endings") {
    const fs::path dir = fresh_dir("sigmap");
    REQUIRE(run_cli("signature-map -M 1 -a 0.3 -e 0.2 --Lambda -0.3 --r-count 8 "
                    "--theta-count 5 --out " +
                    dir.string()) == 0);
    const std::string body = slurp(dir / "signature_map.csv");
    CHECK(body.rfind("# schema_version=1\n", 0) == 0);
    CHECK(body.find("# config=") != std::string::npos);
    CHECK(body.find("r,theta,lambda1,lambda2,lambda3,lambda4,class,inside_omega,inside_cone\n") !=
          std::string::npos);
    CHECK(body.find("\r\n") == std::string::npos);
    CHECK(std::count(body.begin(), body.end(), '\n') == 2 + 1 + 40);
}

TEST_CASE("trace subcommand writes samples and a drift summary") {
    const fs::path dir = fresh_dir("trace");
    REQUIRE(run_cli("trace -M 1 -a 0.1 -e 0.1 --Lambda 0.03 --q-charge -0.04493 --r0 4 "
                    "--theta0 1.2 --vr -0.031975 --vtheta -0.016896 --vphi -0.009259 "
                    "--vt -0.067132 --span 100 --out " +
                    dir.string()) == 0);
    const json out = json::parse(slurp(dir / "trace_summary.json"));
    CHECK(out["status"] == "Completed");
    CHECK(out["max_drift"]["K"].get<double>() <= 1e-8);
    const std::string csv = slurp(dir / "trace.csv");
    CHECK(csv.find("param,s,r,theta,phi,t,") != std::string::npos);
}

TEST_CASE("sweep: one file per lattice point plus an index") {
    const fs::path dir = fresh_dir("sweep");
    REQUIRE(run_cli("sweep --sub roots --vary a=0:0.4:3 -M 1 -e 0.1 --Lambda 0.03 --jobs 2 "
                    "--out " +
                    dir.string()) == 0);
    const json index = json::parse(slurp(dir / "index.json"));
    REQUIRE(index["points"].size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(index["points"][i]["exit_code"] == 0);
        const std::string prefix = index["points"][i]["prefix"].get<std::string>();
        CHECK(fs::exists(dir / (prefix + "roots.json")));
    }
    CHECK(index["points"][0]["varied"]["a"].get<double>() == doctest::Approx(0.0));
    CHECK(index["points"][2]["varied"]["a"].get<double>() == doctest::Approx(0.4));
}

TEST_CASE("determinism: repeated runs produce byte-identical outputs") {
    const fs::path d1 = fresh_dir("det1");
    const fs::path d2 = fresh_dir("det2");
    REQUIRE(run_cli("roots -M 1 -a 0.1 -e 0.1 --Lambda 0.03 --seed 7 --out " + d1.string()) == 0);
    REQUIRE(run_cli("roots -M 1 -a 0.1 -e 0.1 --Lambda 0.03 --seed 7 --out " + d2.string()) == 0);
    CHECK(slurp(d1 / "roots.json") == slurp(d2 / "roots.json"));

    REQUIRE(run_cli("sweep --sub blocks --vary Lambda=-0.3:0.03:2 -M 1 -a 0.2 -e 0.1 "
                    "--jobs 3 --out " +
                    (d1 / "sw").string()) == 0);
    REQUIRE(run_cli("sweep --sub blocks --vary Lambda=-0.3:0.03:2 -M 1 -a 0.2 -e 0.1 "
                    "--jobs 3 --out " +
                    (d2 / "sw").string()) == 0);
    CHECK(slurp(d1 / "sw" / "index.json") == slurp(d2 / "sw" / "index.json"));
    CHECK(slurp(d1 / "sw" / "point_00000_blocks.json") ==
          slurp(d2 / "sw" / "point_00000_blocks.json"));
    CHECK(slurp(d1 / "sw" / "point_00001_blocks.json") ==
          slurp(d2 / "sw" / "point_00001_blocks.json"));
}
