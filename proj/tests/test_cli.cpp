#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "mbasis/analysis.hpp"
#include "mbasis/serialize.hpp"
#include "mbasis/system.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string output;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string("\"") + MBASIS_CLI_PATH + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.output.append(buf.data(), got);
    const int status = pclose(pipe);
    REQUIRE(status != -1);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::filesystem::path scratch() {
    const auto dir = std::filesystem::temp_directory_path() / "mbasis_cli_scratch";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

json load_json(const std::filesystem::path& path) { return json::parse(slurp(path)); }

void dump_json(const json& j, const std::filesystem::path& path) {
    std::ofstream(path) << j.dump(1) << "\n";
}

}  // namespace

TEST_CASE("version flag prints the tool version") {
    const auto res = run("--version");
    CHECK(res.code == 0);
    CHECK(res.output.find("0.1.0") != std::string::npos);
}

TEST_CASE("construct t1 writes a loadable system and a summary line") {
    const auto out = scratch() / "t1_n6.json";
    const auto res = run("construct t1 --eps const:1 --n 6 -o " + out.string());
    CHECK(res.code == 0);
    CHECK(res.output.find("constructed truncated") != std::string::npos);
    CHECK(res.output.find("n_vectors=6") != std::string::npos);
    CHECK(res.output.find("ambient_dim=7") != std::string::npos);
    CHECK(res.output.find("residual=") != std::string::npos);

    const json j = load_json(out);
    CHECK(j["schema"] == "mbasis/1");
    CHECK(j["ambient_dim"] == 7);
    CHECK(j["n_vectors"] == 6);
    CHECK(j["meta"]["params"]["eps"] == "const:1");
    CHECK(j["meta"]["params"]["duals"] == "projected");
    CHECK(j["meta"]["params"].contains("eps_count"));

    // the library reads what the tool wrote
    const auto sys = mbasis::load_system(out.string());
    CHECK(mbasis::biorthogonality_residual(sys) <= 1e-8);
}

TEST_CASE("construct t2 records the full parameter bundle") {
    const auto out = scratch() / "t2_c005.json";
    const auto res = run("construct t2 --eps const:1 --c 0.05 -o " + out.string());
    CHECK(res.code == 0);
    CHECK(res.output.find("constructed theorem2") != std::string::npos);
    CHECK(res.output.find("n_vectors=46") != std::string::npos);
    CHECK(res.output.find("ambient_dim=47") != std::string::npos);

    const json j = load_json(out);
    const json& t2 = j["meta"]["theorem2"];
    CHECK(t2["L"] == 1);
    CHECK(t2["M"] == 23);
    CHECK(t2["N"] == 46);
    CHECK(t2["B"].get<double>() > 1.0);
    CHECK(t2["gamma"].size() == 46);
    CHECK(j["meta"]["params"]["eps_count"] == 4096);
}

TEST_CASE("construct t2 reports unreachable selections as a scan failure") {
    const auto out = scratch() / "t2_unreachable.json";
    const auto res = run("construct t2 --eps geometric:0.5 --c 1 -o " + out.string());
    CHECK(res.code == 3);
    CHECK(res.output.find("error:") != std::string::npos);
    CHECK(res.output.find("sum_{l<=L} beta_{2l-1}^2 >= 64*C^2") != std::string::npos);
    CHECK(res.output.find("offered 1074 usable entries") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("construct blocks chains segments of one bound sequence") {
    const auto out = scratch() / "blocks.json";
    const auto res = run("construct blocks --eps const:1 --c 0.05,0.1 -o " + out.string());
    CHECK(res.code == 0);
    CHECK(res.output.find("constructed block_sum") != std::string::npos);

    const json j = load_json(out);
    CHECK(j["n_vectors"] == 92);
    CHECK(j["ambient_dim"] == 94);
    REQUIRE(j["meta"]["params"]["blocks"].size() == 2);
    CHECK(j["meta"]["params"]["blocks"][0]["builder"] == "theorem2");
    CHECK(j["meta"]["params"]["blocks"][1]["coord_offset"] == 47);
    CHECK(j["meta"]["params"]["C_list"] == json::array({0.05, 0.1}));

    const auto sys = mbasis::load_system(out.string());
    CHECK(mbasis::biorthogonality_residual(sys) <= 1e-8);
}

TEST_CASE("analyze verifies a sound system and rejects a tampered one") {
    const auto sys_path = scratch() / "an_t1.json";
    REQUIRE(run("construct t1 --eps const:1 --n 8 -o " + sys_path.string()).code == 0);

    SUBCASE("sound system passes with a report and a csv") {
        const auto report_path = scratch() / "an_report.json";
        const auto csv_path = scratch() / "an_profile.csv";
        const auto res = run("analyze " + sys_path.string() + " -o " +
                             report_path.string() + " --csv " + csv_path.string());
        CHECK(res.code == 0);
        CHECK(res.output.find("analyzed truncated") != std::string::npos);
        CHECK(res.output.find("min_margin=") != std::string::npos);

        const json report = load_json(report_path);
        CHECK(report["kind"] == "analysis");
        CHECK(report["profile"].size() == 8);
        CHECK(report["biorthogonality_residual"].get<double>() <= 1e-8);

        const std::string csv = slurp(csv_path);
        CHECK(csv.rfind("n,norm_x,norm_dual,product,bound,margin\n", 0) == 0);
    }

    SUBCASE("a bound pushed below the product fails the margin check") {
        json j = load_json(sys_path);
        j["eps_bounds"][1] = 1.0;
        const auto bad_path = scratch() / "an_bad_bound.json";
        dump_json(j, bad_path);
        const auto res = run("analyze " + bad_path.string());
        CHECK(res.code == 1);
    }

    SUBCASE("a corrupted dual fails the residual check") {
        json j = load_json(sys_path);
        json& dual0 = j["dual"][0];
        if (dual0.is_array()) {
            for (auto& v : dual0) v = v.get<double>() * 3.0;
        } else {
            for (auto& e : dual0["nnz"]) e[1] = e[1].get<double>() * 3.0;
        }
        const auto bad_path = scratch() / "an_bad_dual.json";
        dump_json(j, bad_path);
        const auto res = run("analyze " + bad_path.string());
        CHECK(res.code == 1);
    }

    SUBCASE("the reported basis constant matches the library computation") {
        const auto report_path = scratch() / "an_bc_report.json";
        const auto res = run("analyze " + sys_path.string() +
                             " --basis-constant natural -o " + report_path.string());
        CHECK(res.code == 0);

        const auto sys = mbasis::load_system(sys_path.string());
        const double expected =
            mbasis::basis_constant(sys, mbasis::Permutation::natural(8));
        const json report = load_json(report_path);
        CHECK(report["basis_constant"]["order"] == "1-2-3-4-5-6-7-8");
        CHECK(report["basis_constant"]["value"].get<double>() ==
              doctest::Approx(expected).epsilon(1e-15));
    }

    SUBCASE("an order of the wrong length is a usage error") {
        CHECK(run("analyze " + sys_path.string() + " --basis-constant 1,2,3").code == 2);
    }

    CHECK(run("analyze " + (scratch() / "does_not_exist.json").string()).code == 2);
}

TEST_CASE("witness passes on honest bundles and is bytewise reproducible") {
    const auto sys_path = scratch() / "wi_t2.json";
    REQUIRE(run("construct t2 --eps const:1 --c 0.05 -o " + sys_path.string()).code == 0);

    const auto report_path = scratch() / "wi_report.json";
    const std::string command =
        "witness " + sys_path.string() + " --samples 20 --seed 7 -o " + report_path.string();

    const auto res_a = run(command);
    CHECK(res_a.code == 0);
    CHECK(res_a.output.find("orders=25") != std::string::npos);
    CHECK(res_a.output.find("all_passed=true") != std::string::npos);
    const std::string first = slurp(report_path);

    const auto res_b = run(command);
    CHECK(res_b.code == 0);
    CHECK(res_b.output == res_a.output);
    CHECK(slurp(report_path) == first);

    const json report = load_json(report_path);
    CHECK(report["kind"] == "witness_batch");
    REQUIRE(report["rows"].size() == 25);
    CHECK(report["rows"][0]["seed_or_name"] == "natural");
    CHECK(report["summary"]["all_passed"] == true);
    CHECK(report["summary"]["min_lower_bound"].get<double>() >= 0.05);
}

TEST_CASE("witness flags tampered gamma data through the identity check") {
    const auto sys_path = scratch() / "wi_tampered.json";
    REQUIRE(run("construct t2 --eps const:1 --c 0.05 -o " + sys_path.string()).code == 0);

    json j = load_json(sys_path);
    j["meta"]["theorem2"]["gamma"][1] =
        j["meta"]["theorem2"]["gamma"][1].get<double>() * 1.5;
    dump_json(j, sys_path);

    const auto res = run("witness " + sys_path.string() + " --samples 5 --seed 1");
    CHECK(res.code == 1);
    CHECK(res.output.find("all_passed=false") != std::string::npos);
}

TEST_CASE("witness demands a parameter bundle") {
    const auto sys_path = scratch() / "wi_t1.json";
    REQUIRE(run("construct t1 --eps const:1 --n 6 -o " + sys_path.string()).code == 0);
    const auto res = run("witness " + sys_path.string());
    CHECK(res.code == 2);
    CHECK(res.output.find("lacks theorem2 metadata") != std::string::npos);
}

TEST_CASE("search enumerates small systems and refuses large ones") {
    SUBCASE("all orders of a four-vector truncation") {
        const auto sys_path = scratch() / "se_t1.json";
        REQUIRE(run("construct t1 --eps const:1 --n 4 -o " + sys_path.string()).code == 0);
        const auto csv_path = scratch() / "se_orders.csv";
        const auto res = run("search " + sys_path.string() + " -o " + csv_path.string());
        CHECK(res.code == 0);
        CHECK(res.output.find("orders=24") != std::string::npos);
        CHECK(res.output.find("min=1.2074534878") != std::string::npos);

        const std::string csv = slurp(csv_path);
        CHECK(csv.rfind("order_id,order,basis_constant\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);
    }

    SUBCASE("an orthonormal fixture written by the library") {
        const auto sys_path = scratch() / "se_ortho.json";
        mbasis::save_system(mbasis::make_orthonormal(3), sys_path.string());
        const auto res = run("search " + sys_path.string());
        CHECK(res.code == 0);
        CHECK(res.output.find("orders=6") != std::string::npos);
        CHECK(res.output.find("min=1") != std::string::npos);
    }

    SUBCASE("twelve vectors name the factorial they would cost") {
        const auto sys_path = scratch() / "se_t1_12.json";
        REQUIRE(run("construct t1 --eps const:1 --n 12 -o " + sys_path.string()).code == 0);
        const auto res = run("search " + sys_path.string());
        CHECK(res.code == 2);
        CHECK(res.output.find("479001600") != std::string::npos);
    }
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("construct t1 --eps wedge:1 --n 4 -o /tmp/never.json").code == 2);
    CHECK(run("construct t1 --eps const:1 -o /tmp/never.json").code == 2);
    CHECK(run("construct t2 --eps const:1 --c -0.5 -o /tmp/never.json").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("").code == 2);
}

TEST_CASE("strict policy surfaces normalization problems directly") {
    const auto out = scratch() / "strict.json";
    // geometric tails underflow to zero, which strict input validation rejects
    const auto res = run("construct t2 --eps geometric:0.5 --eps-policy strict --c 1 -o " +
                         out.string());
    CHECK(res.code == 2);
    CHECK(res.output.find("not strictly positive") != std::string::npos);
}
