#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

using Catch::Approx;
using json = nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const char* bin = std::getenv("OSCI_BIN");
    REQUIRE(bin != nullptr);
    const std::string out_path = "/tmp/osci_test_out." + std::to_string(getpid());
    const std::string err_path = "/tmp/osci_test_err." + std::to_string(getpid());
    const std::string cmd =
        env_prefix + " \"" + bin + "\" " + args + " >" + out_path + " 2>" + err_path;
    const int rc = std::system(cmd.c_str());
    CmdResult res;
    res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out_path);
    res.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return res;
}

json payload_of(const CmdResult& res) {
    REQUIRE(res.exit_code == 0);
    const json env = json::parse(res.out);
    REQUIRE(env.contains("tool"));
    REQUIRE(env.contains("version"));
    REQUIRE(env.contains("command"));
    REQUIRE(env.contains("timestamp"));
    REQUIRE(env.contains("payload"));
    return env["payload"];
}

double num(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    return v.get<double>();
}

std::string write_strategy(const std::string& body) {
    const std::string path = "/tmp/osci_strategy." + std::to_string(getpid()) + ".json";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("cli: location interval example", "[cli]") {
    const auto p = payload_of(
        run_cli("interval location --x 1 --center 0 --t 5 --method parametric "
                "--dist normal --out json"));
    CHECK(p["type"] == "location_interval");
    CHECK(num(p["lo"]) == Approx(-4.0));
    CHECK(num(p["hi"]) == Approx(6.0));
    CHECK(num(p["confidence_bound"]) >= 0.90);
}

TEST_CASE("cli: scale interval example", "[cli]") {
    const auto p = payload_of(
        run_cli("interval scale --x 1 --center 0 --t1 0.058824 --t2 inf --m inf "
                "--dist normal --out json"));
    CHECK(p["type"] == "scale_interval");
    CHECK(num(p["lo"]) == 0.0);
    CHECK(num(p["hi"]) == Approx(17.0).margin(0.01));
    CHECK(num(p["confidence_bound"]) >= 0.95);
    CHECK(std::isinf(num(p["t2"])));
    CHECK(std::isinf(num(p["log_length"])));
}

TEST_CASE("cli: exit code contract", "[cli]") {
    // domain error -> 2
    const auto domain = run_cli(
        "interval location --x 1 --center 0 --t 0.5 --method nonparametric --out json");
    CHECK(domain.exit_code == 2);
    CHECK(domain.err.find("t must exceed 1") != std::string::npos);

    // usage errors -> 1
    CHECK(run_cli("interval location --x 1 --bogus 3").exit_code == 1);
    CHECK(run_cli("interval").exit_code == 1);
    CHECK(run_cli("nonsense-command").exit_code == 1);
    CHECK(run_cli("interval location --center 0 --t 5").exit_code == 1);  // missing --x

    // more domain errors -> 2
    CHECK(run_cli("compute m-star --t1 4 --t2 2").exit_code == 2);
    CHECK(run_cli("simulate coverage --kind location_parametric --t 0.5 --reps 10 --seed 1")
              .exit_code == 2);
    CHECK(run_cli("compute fisher-k --dist uniform").exit_code == 2);
    CHECK(run_cli("interval scale --x 1 --center 0 --t1 0.125 --t2 4 --m not_a_number")
              .exit_code == 2);

    // success -> 0, help -> 0
    CHECK(run_cli("compute robbins --t 9 --out json").exit_code == 0);
    CHECK(run_cli("--help").exit_code == 0);

    // x == center is valid but warns
    const auto degen = run_cli(
        "interval location --x 2 --center 2 --t 5 --method nonparametric --out json");
    CHECK(degen.exit_code == 0);
    CHECK(degen.err.find("degenerate") != std::string::npos);
}

TEST_CASE("cli: compute beta-star / alpha-star corrected worst case", "[cli]") {
    const auto p = payload_of(run_cli("compute beta-star --t 5 --dist normal --out json"));
    CHECK(num(p["beta_star"]) == Approx(0.096790046321509492).margin(1e-9));
    CHECK(num(p["alpha_star"]) == Approx(0.96653588090727944).margin(1e-9));
    const auto a = payload_of(run_cli("compute alpha-star --t 5 --out json"));
    CHECK(num(a["alpha_star"]) == Approx(0.96653588090727944).margin(1e-12));
}

TEST_CASE("cli: solve commands", "[cli]") {
    const auto np = payload_of(
        run_cli("solve location-t --confidence 0.9 --nonparametric --out json"));
    CHECK(num(np["t"]) == Approx(9.0).margin(1e-9));

    const auto par = payload_of(
        run_cli("solve location-t --confidence 0.9 --dist normal --out json"));
    CHECK(num(par["t"]) == Approx(4.8395146995038809).margin(1e-4));

    const auto des = payload_of(
        run_cli("solve scale-design --confidence 0.9 --m inf --out json"));
    CHECK(num(des["design"]["t1"]) == Approx(0.12566134685507403).margin(1e-6));
    CHECK(std::isinf(num(des["design"]["t2"])));
}

TEST_CASE("cli: m-star exact and approx", "[cli]") {
    const auto approx = payload_of(
        run_cli("compute m-star --t1 0.125 --t2 4 --approx --out json"));
    CHECK(num(approx["m_star"]) == Approx(2.7154594915968).margin(1e-6));
    const auto exact = payload_of(run_cli("compute m-star --t1 0.125 --t2 4 --out json"));
    CHECK(num(exact["m_star"]) == Approx(2.70055582194378).margin(1e-6));
}

TEST_CASE("cli: paper-examples table confirms all nine rows", "[cli]") {
    const auto p = payload_of(run_cli("table paper-examples --out json"));
    REQUIRE(p["rows"].size() == 9);
    CHECK(p["all_confirmed"].get<bool>());
    CHECK(p["rows"][0]["paper_interval"] == "(0, 8|x|)");
    CHECK(num(p["rows"][1]["paper_validity"]) == Approx(2.7));
    CHECK(num(p["rows"][0]["recomputed_confidence"]) == Approx(0.90052355033977421).margin(1e-9));
    CHECK(num(p["rows"][4]["recomputed_m_star"]) == Approx(48.3243902904732).margin(1e-6));
    CHECK(num(p["rows"][7]["recomputed_m_star"]) == Approx(997.723162418029).margin(1e-6));
    for (const auto& row : p["rows"]) {
        CHECK(row["confidence_ok"].get<bool>());
        CHECK(row["validity_ok"].get<bool>());
    }
    // the 99% rows rely on rounding: recomputed < nominal before rounding
    CHECK(num(p["rows"][6]["recomputed_confidence"]) == Approx(0.98860146351538497).margin(1e-9));
    CHECK(p["rows"][6].contains("note"));
}

TEST_CASE("cli: desk scenario", "[cli]") {
    const auto p = payload_of(
        run_cli("scenario desk --prior-center 2 --prior-halfwidth 1 --resolution 0.0025 "
                "--confidence 0.99 --x 2.1 --out json"));
    CHECK(num(p["m"]) == Approx(1200.0).margin(1e-9));
    CHECK(num(p["sigma_min"]) == Approx(1.0 / 1200.0).margin(1e-12));
    CHECK(num(p["design"]["confidence"]) >= 0.99 - 1e-9);
    CHECK(num(p["design"]["m_star"]) >= 1200.0);
    REQUIRE(p.contains("reference_design"));
    CHECK(num(p["reference_design"]["t1"]) == Approx(1.0 / 70.0).margin(1e-12));
    CHECK(num(p["reference_design"]["t2"]) == Approx(1500.0).margin(1e-12));
    CHECK(num(p["reference_design"]["m_star"]) == Approx(1497.72316241803).margin(1e-5));
    CHECK(num(p["reference_design"]["confidence"]) == Approx(0.98860203681852873).margin(1e-9));
    CHECK(p["reference_design"]["meets_prior"].get<bool>());
    CHECK_FALSE(p["reference_design"]["note"].get<std::string>().empty());
    REQUIRE(p.contains("interval"));
    CHECK(num(p["interval"]["lo"]) > 0.0);

    CHECK(run_cli("scenario desk --prior-center 2 --prior-halfwidth 1 --resolution 0 "
                  "--confidence 0.99").exit_code == 2);
}

TEST_CASE("cli: simulate coverage report schema", "[cli]") {
    const auto p = payload_of(
        run_cli("simulate coverage --kind location_parametric --dist normal --mu -0.9665 "
                "--sigma 1 --center 0 --t 5 --reps 20000 --seed 42 --out json"));
    CHECK(p["type"] == "coverage_report");
    CHECK(p["reps"].get<std::uint64_t>() == 20000);
    CHECK(p["seed"].get<std::uint64_t>() == 42);
    CHECK(num(p["empirical_coverage"]) == Approx(0.9032).margin(0.01));
    CHECK(num(p["theoretical_bound"]) == Approx(0.90320995367849051).margin(1e-9));
    CHECK(p.contains("mc_stderr"));
    CHECK(p.contains("slack"));
    CHECK_FALSE(p["hypothesis_violated"].get<bool>());
}

TEST_CASE("cli: determinism across OSCI_THREADS", "[cli]") {
    const std::string args =
        "simulate coverage --kind scale --dist normal --mu 0 --sigma 1 --center 0 "
        "--t1 0.125 --t2 4 --m 2.7 --reps 150000 --seed 7 --out json";
    const auto r1 = run_cli(args, "OSCI_THREADS=1 SOURCE_DATE_EPOCH=0");
    const auto r4 = run_cli(args, "OSCI_THREADS=4 SOURCE_DATE_EPOCH=0");
    const auto r3 = run_cli(args, "OSCI_THREADS=3 SOURCE_DATE_EPOCH=0");
    REQUIRE(r1.exit_code == 0);
    CHECK(r1.out == r4.out);  // bit-identical report
    CHECK(r1.out == r3.out);
}

TEST_CASE("cli: game with a strategy file", "[cli]") {
    const auto path = write_strategy(R"({
        "mode": "cycle",
        "densities": ["normal", "laplace", "uniform"],
        "mu_rule": {"kind": "sequence", "values": [0.0, 1.0, -0.5]},
        "seed": 11
    })");
    const auto p = payload_of(run_cli("game --t 9 --rounds 2000 --adversary " + path +
                                      " --seed 5 --out json"));
    CHECK(p["type"] == "game_record");
    CHECK(p["rounds"].get<std::uint64_t>() == 2000);
    const double coverage = num(p["coverage"]);
    CHECK(coverage >= 0.9 - 3.0 * std::sqrt(0.9 * 0.1 / 2000.0));
    const double payoff = num(p["player_payoff"]);
    const double covers = static_cast<double>(p["covers"].get<std::uint64_t>());
    const double misses = static_cast<double>(p["misses"].get<std::uint64_t>());
    CHECK(payoff == Approx(covers - 5.0 * misses).margin(1e-12));

    // determinism with the log included
    const auto g1 = run_cli("game --t 9 --rounds 500 --adversary " + path +
                            " --seed 5 --full-log --out json",
                            "SOURCE_DATE_EPOCH=0");
    const auto g2 = run_cli("game --t 9 --rounds 500 --adversary " + path +
                            " --seed 5 --full-log --out json",
                            "SOURCE_DATE_EPOCH=0");
    CHECK(g1.out == g2.out);

    const auto bad = run_cli("game --t 9 --rounds 10 --adversary /nonexistent.json");
    CHECK(bad.exit_code == 2);
    std::remove(path.c_str());
}

TEST_CASE("cli: every command emits schema-valid JSON", "[cli]") {
    const auto strategy = write_strategy(
        R"({"mode":"fixed","densities":["normal"],"mu_rule":{"kind":"constant","value":0},"seed":1})");
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"interval location --x 1 --center 0 --t 5 --method nonparametric", "location_interval"},
        {"interval scale --x 1 --center 0 --t1 0.125 --t2 4 --m 2.7", "scale_interval"},
        {"compute beta --alpha 1 --t 5 --dist laplace", "beta"},
        {"compute alpha-star --t 5", "alpha_star_normal"},
        {"compute beta-star --t 9 --dist uniform", "beta_star"},
        {"compute robbins --t 9", "robbins_bound"},
        {"compute mean-value-l --x 0.2 --b 3 --dist normal", "mean_value_l"},
        {"compute expected-length --t 5 --center 0 --mu 0 --sigma 1 --dist normal",
         "expected_length"},
        {"compute g --alpha 1 --t1 0.125 --t2 4", "coverage_G"},
        {"compute curvature --t1 0.125 --t2 4", "g_curvature_at_zero"},
        {"compute m-star --t1 0.125 --t2 4", "m_star"},
        {"compute scale-bound --t1 0.125 --t2 4 --m 2.7", "scale_coverage_bound"},
        {"compute fisher-k --dist normal", "fisher_k"},
        {"compute verify-class --dist triangular --grid 200", "class_membership"},
        {"compute standardize --x 7 --center 3 --mu 3 --sigma 2", "standardize"},
        {"solve location-t --confidence 0.9 --nonparametric", "location_t"},
        {"solve scale-design --confidence 0.9 --m 5", "scale_design"},
        {"simulate coverage --kind location_nonparametric --dist laplace --mu 0 --t 9 "
         "--reps 2000 --seed 1",
         "coverage_report"},
        {"simulate worst-alpha --kind location_parametric --t 5 --alpha-min 0 --alpha-max 1 "
         "--alpha-step 0.5 --reps 2000 --seed 1",
         "worst_alpha"},
        {"game --t 9 --rounds 100 --adversary " + strategy + " --seed 1", "game_record"},
        {"table paper-examples", "paper_examples"},
        {"table g-profile --t1 0.125 --t2 4 --alpha-max 3 --steps 7", "g_profile"},
        {"scenario desk --prior-center 2 --prior-halfwidth 1 --resolution 0.0025 "
         "--confidence 0.95",
         "desk_scenario"},
    };
    for (const auto& [args, type] : cases) {
        INFO(args);
        const auto p = payload_of(run_cli(args + " --out json"));
        CHECK(p["type"] == type);
    }
    std::remove(strategy.c_str());
}

TEST_CASE("cli: config file sets global options", "[cli]") {
    const std::string cfg = "/tmp/osci_cfg." + std::to_string(getpid()) + ".ini";
    {
        std::ofstream out(cfg);
        out << "out=json\nabs-tol=1e-9\n";
    }
    const auto res = run_cli("--config " + cfg + " compute robbins --t 9");
    CHECK(res.exit_code == 0);
    CHECK_NOTHROW(json::parse(res.out));  // json mode came from the config file
    std::remove(cfg.c_str());
}

TEST_CASE("cli: csv and text output modes", "[cli]") {
    const auto csv = run_cli("compute robbins --t 9 --out csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.out.find("bound,0.1") != std::string::npos);

    const auto txt = run_cli("compute robbins --t 9 --out text");
    CHECK(txt.exit_code == 0);
    CHECK(txt.out.find("bound = 0.1") != std::string::npos);

    const auto curve = run_cli(
        "simulate worst-alpha --kind location_parametric --t 5 --alpha-min 0 --alpha-max 1 "
        "--alpha-step 0.5 --reps 1000 --seed 2 --out csv");
    CHECK(curve.exit_code == 0);
    CHECK(curve.out.find("alpha,miscoverage,mc_stderr") != std::string::npos);
}
