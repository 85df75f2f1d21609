// End-to-end checks of the vhc command line: spawns the real binary,
// captures stdout, and verifies reports, CSVs, exit codes, SVG output and
// golden verdicts for every bundled fixture.

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

int g_failures = 0;

#define REQUIRE(cond, msg)                                                       \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg  \
                      << "\n";                                                   \
            ++g_failures;                                                        \
        }                                                                        \
    } while (0)

std::string g_vhc, g_models;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = g_vhc + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json classify_json(const std::string& model) {
    RunResult r = run("classify " + g_models + "/" + model);
    REQUIRE(r.exit_code == 0, "classify " << "exit code for " + model);
    return nlohmann::json::parse(r.out, nullptr, false);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

void check_report_schema(const nlohmann::json& j, const std::string& label) {
    REQUIRE(!j.is_discarded(), label + ": report is not valid JSON");
    if (j.is_discarded()) return;
    REQUIRE(j.value("schema", "") == "vhc-report/1", label + ": schema tag");
    REQUIRE(j.contains("model") && j["model"].is_object(), label + ": model echo");
    REQUIRE(j.contains("options") && j["options"].is_object(), label + ": options");
    REQUIRE(j.contains("classification") && j["classification"].is_object(),
            label + ": classification block");
    const auto& c = j["classification"];
    REQUIRE(c.contains("kind") && c["kind"].is_string(), label + ": kind");
    REQUIRE(c.contains("MT") && c["MT"].is_number(), label + ": MT");
    REQUIRE(c.contains("VT") && c["VT"].is_number(), label + ": VT");
    REQUIRE(c.contains("limit_cycle_hypotheses"), label + ": hypotheses flag");
}

void golden_verdicts() {
    struct Row {
        const char* model;
        const char* kind;
        bool hypotheses;
    };
    const Row rows[] = {
        {"ex1_el.model", "el_mechanical", false},
        {"ex2_sel.model", "sel", false},
        {"ex3_constant.model", "sel", false},
        {"ex4_limit_cycle.model", "non_lagrangian", true},
        {"line_pendulum.model", "mechanical_line", false},
        {"particle_case1.model", "el_mechanical", false},
        {"particle_case2.model", "el_mechanical", false},
        {"particle_case3.model", "sel", false},
        {"particle_case4.model", "non_lagrangian", true},
        {"particle_general.model", "sel", false},
    };
    for (const Row& row : rows) {
        nlohmann::json j = classify_json(row.model);
        check_report_schema(j, row.model);
        if (j.is_discarded()) continue;
        REQUIRE(j["classification"]["kind"] == row.kind,
                std::string(row.model) + ": kind " + j["classification"]["kind"].dump() +
                    " != " + row.kind);
        if (j["topology"] == "circle")
            REQUIRE(j["classification"]["limit_cycle_hypotheses"] == row.hypotheses,
                    std::string(row.model) + ": hypotheses");
    }
    // f0 is reported for SEL fixtures
    nlohmann::json j2 = classify_json("ex2_sel.model");
    REQUIRE(j2["lagrangian"]["variant"] == "singular_fresnel", "ex2 lagrangian variant");
    REQUIRE(std::fabs(j2["lagrangian"]["f0"].get<double>() + 0.13963) < 1e-4, "ex2 f0 value");
    // limit-cycle block for ex4
    nlohmann::json j4 = classify_json("ex4_limit_cycle.model");
    REQUIRE(j4["lagrangian"].is_null(), "ex4 has no Lagrangian");
    REQUIRE(j4["limit_cycle"]["hypotheses"] == true, "ex4 hypotheses");
    REQUIRE(j4["limit_cycle"]["residual_sup"].get<double>() <= 1e-6, "ex4 nu residual");
}

void reruns_are_bit_identical() {
    RunResult a = run("classify " + g_models + "/ex2_sel.model");
    RunResult b = run("classify " + g_models + "/ex2_sel.model");
    REQUIRE(a.out == b.out, "classify reruns differ");
    RunResult c = run("reduce " + g_models + "/particle_case3.model");
    RunResult d = run("reduce " + g_models + "/particle_case3.model");
    REQUIRE(c.out == d.out, "reduce reruns differ");
}

void reduce_csvs() {
    // case 1: both columns vanish
    RunResult r = run("reduce " + g_models + "/particle_case1.model --grid 50");
    REQUIRE(r.exit_code == 0, "reduce case1 exit");
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 51, "reduce case1 row count");
    REQUIRE(rows[0] == std::vector<std::string>({"s", "psi1", "psi2"}), "reduce header");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(std::fabs(std::stod(rows[i][1])) <= 1e-12, "case1 psi1 ~ 0");
        REQUIRE(std::fabs(std::stod(rows[i][2])) <= 1e-12, "case1 psi2 ~ 0");
    }
    // case 4 at theta = pi/4: constant psi1 column = tan(theta)/5
    RunResult r4 = run("reduce " + g_models + "/particle_case4.model --grid 50");
    auto rows4 = csv_rows(r4.out);
    for (std::size_t i = 1; i < rows4.size(); ++i) {
        REQUIRE(std::fabs(std::stod(rows4[i][1]) - 0.2) <= 1e-9, "case4 psi1 = tan(pi/4)/5");
        REQUIRE(std::fabs(std::stod(rows4[i][2]) + 1.0) <= 1e-9, "case4 psi2 = -tan(pi/4)");
    }
    // [reduced] input echoes the expressions unchanged
    RunResult re = run("reduce " + g_models + "/ex1_el.model --grid 10");
    auto rowse = csv_rows(re.out);
    for (std::size_t i = 1; i < rowse.size(); ++i) {
        double s = std::stod(rowse[i][0]);
        double p1 = std::sin(2 * s) / (2 + std::cos(s));
        REQUIRE(std::fabs(std::stod(rowse[i][1]) - p1) <= 1e-12, "ex1 psi1 echo");
    }
}

void simulate_csv() {
    RunResult r = run("simulate " + g_models + "/ex1_el.model --x0 0 --v0 3.2 --horizon 40");
    REQUIRE(r.exit_code == 0, "simulate exit");
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() >= 2049, "simulate row count");
    REQUIRE(rows[0] == std::vector<std::string>({"t", "s", "sdot", "x", "xdot", "E0"}),
            "simulate header");
    // E0 is conserved along the run
    double e0 = std::stod(rows[1][5]);
    for (std::size_t i = 2; i < rows.size(); i += 128)
        REQUIRE(std::fabs(std::stod(rows[i][5]) - e0) <= 1e-5, "simulate energy column");
    // s stays in [0, T)
    for (std::size_t i = 1; i < rows.size(); i += 64) {
        double s = std::stod(rows[i][1]);
        REQUIRE(s >= 0.0 && s < 6.2832, "simulate s within the chart");
    }
}

void portrait_and_svg() {
    std::string svg_path = "/tmp/vhc_test_portrait.svg";
    std::remove(svg_path.c_str());
    RunResult r = run("portrait " + g_models + "/ex4_limit_cycle.model --grid 4 --grid-sdot 4 "
                      "--horizon 60 --sdotrange -2 0 --svg " +
                      svg_path);
    REQUIRE(r.exit_code == 0, "portrait exit");
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 17, "portrait verdict rows");
    std::ifstream svg(svg_path);
    REQUIRE(svg.good(), "SVG file written");
    std::stringstream ss;
    ss << svg.rdbuf();
    std::string body = ss.str();
    REQUIRE(body.find("<svg") != std::string::npos, "SVG root element");
    REQUIRE(body.find("<polyline") != std::string::npos, "SVG has curves");
    // the computed limit cycle is overlaid dashed
    REQUIRE(body.find("stroke-dasharray") != std::string::npos, "SVG nu overlay");

    // a 1x1 grid reduces to a single trajectory
    RunResult one = run("portrait " + g_models + "/ex1_el.model --grid 1 --grid-sdot 1 "
                        "--horizon 30 --sdotrange 1 1");
    REQUIRE(one.exit_code == 0, "1x1 portrait exit");
    REQUIRE(csv_rows(one.out).size() == 2, "1x1 portrait has one verdict row");
}

void limit_cycle_cmd() {
    RunResult r = run("limit-cycle " + g_models + "/ex4_limit_cycle.model");
    REQUIRE(r.exit_code == 0, "limit-cycle exit");
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() >= 2049, "nu rows");
    REQUIRE(rows[0] == std::vector<std::string>({"s", "nu"}), "nu header");
    double first = std::stod(rows[1][1]);
    double last = std::stod(rows.back()[1]);
    REQUIRE(std::fabs(first - last) <= 1e-9, "nu seam");
    // hypotheses unmet -> numerical failure exit code 3
    RunResult bad = run("limit-cycle " + g_models + "/ex1_el.model");
    REQUIRE(bad.exit_code == 3, "limit-cycle on EL fixture exits 3");
}

void transform_cmd() {
    std::string phi_path = "/tmp/vhc_test_phi.csv";
    std::remove(phi_path.c_str());
    RunResult r = run("transform " + g_models +
                      "/ex1_el.model --to-conservative --period 6.283185307179586 --phi-out " +
                      phi_path);
    REQUIRE(r.exit_code == 0, "transform exit");
    auto rows = csv_rows(r.out);
    REQUIRE(rows[0] == std::vector<std::string>({"theta", "psi1", "psi2"}), "transform header");
    for (std::size_t i = 1; i < rows.size(); i += 32)
        REQUIRE(std::fabs(std::stod(rows[i][2])) <= 1e-6, "transformed psi2 ~ 0");
    std::ifstream phi(phi_path);
    REQUIRE(phi.good(), "phi grid written");
    std::stringstream ps;
    ps << phi.rdbuf();
    auto prows = csv_rows(ps.str());
    REQUIRE(prows[0] == std::vector<std::string>({"x", "phi", "dphi"}), "phi header");
    REQUIRE(std::fabs(std::stod(prows[1][1])) <= 1e-12, "phi(0) = 0");
    REQUIRE(std::fabs(std::stod(prows.back()[1]) - 6.283185307179586) <= 1e-9, "phi(T1) = T2");
}

void flag_overrides() {
    RunResult r = run("classify " + g_models + "/ex1_el.model --N 512 --quad-tol 1e-8 --eps-M 1e-5");
    REQUIRE(r.exit_code == 0, "classify with flags exit");
    nlohmann::json j = nlohmann::json::parse(r.out, nullptr, false);
    REQUIRE(!j.is_discarded(), "flags report parses");
    REQUIRE(j["options"]["N"] == 512, "N override");
    REQUIRE(j["options"]["quad_tol"] == 1e-8, "quad_tol override");
    REQUIRE(j["classification"]["eps_M"] == 1e-5, "eps_M override");
    REQUIRE(j["classification"]["kind"] == "el_mechanical", "verdict stable under coarser grid");
}

void error_exit_codes() {
    RunResult r = run("classify /nonexistent.model");
    REQUIRE(r.exit_code == 2, "missing file exits 2, got " << r.exit_code);
    // malformed model
    std::string bad = "/tmp/vhc_bad.model";
    std::ofstream(bad) << "[reduced]\npsi1 = \"sin(\"\npsi2 = \"0\"\ntopology = line\n";
    RunResult r2 = run("classify " + bad);
    REQUIRE(r2.exit_code == 2, "parse error exits 2, got " << r2.exit_code);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: vhc_cli_tests <vhc-binary> <models-dir>\n";
        return 2;
    }
    g_vhc = argv[1];
    g_models = argv[2];

    golden_verdicts();
    reruns_are_bit_identical();
    reduce_csvs();
    simulate_csv();
    portrait_and_svg();
    limit_cycle_cmd();
    transform_cmd();
    flag_overrides();
    error_exit_codes();

    if (g_failures == 0) {
        std::cout << "cli: all checks passed\n";
        return 0;
    }
    std::cerr << "cli: " << g_failures << " failure(s)\n";
    return 1;
}
