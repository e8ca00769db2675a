#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "slfib/slfib.hpp"

namespace fs = std::filesystem;
using slfib::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(SLFIB_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("slfib_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

} // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("nosuchcommand").code, 2);
    EXPECT_EQ(run("solve --kind torus").code, 2);
    EXPECT_EQ(run("sweep --family section7 --n 32 --t \"\"").code, 2);
    EXPECT_EQ(run("solve --config " + path("missing.json")).code, 2);
}

TEST_F(Cli, ErrorTokensExitOne) {
    EXPECT_EQ(run("solve --kind strip --a 0.5 --top const=1 --bottom const=2 --n 32").code, 1);
    EXPECT_EQ(run("project --family section7 --t 0 --n 32 --z 1,0,0,2,0,0").code, 1);
    EXPECT_EQ(run("oracle --a 1 --x 0,1 --y 0").code, 2);
}

TEST_F(Cli, SolveThenClassifyRoundTrip) {
    const auto f = path("f.txt");
    ASSERT_EQ(run("solve --kind disc --a 0.5 --cos 1=1.3 --cos 3=-1 --n 16 --out " + f).code, 0);
    ASSERT_TRUE(fs::exists(f + ".diag.json"));
    const json d = json::parse(slurp(f + ".diag.json"));
    EXPECT_TRUE(d.at("converged").get<bool>());
    EXPECT_LT(d.at("residual_norm").get<double>(), 1e-10);
    std::ifstream in(f);
    const auto field = slfib::read_field_dump(in);
    EXPECT_EQ(field.domain.n_x, 16);
    EXPECT_EQ(field.a, 0.5);
    const CliRun c = run("classify --field " + f);
    ASSERT_EQ(c.code, 0);
    const json rep = json::parse(c.out);
    EXPECT_EQ(rep.at("l").get<int>(), 3);
    EXPECT_EQ(rep.at("records").size(), 2u);
    EXPECT_TRUE(rep.at("bound_check").get<bool>());
}

TEST_F(Cli, ClassifyOracleAndNonisolated) {
    const CliRun c = run("classify --oracle --a 0");
    ASSERT_EQ(c.code, 0);
    const json rep = json::parse(c.out);
    ASSERT_EQ(rep.at("records").size(), 1u);
    EXPECT_EQ(rep["records"][0]["type"], "increasing");
    EXPECT_EQ(rep["records"][0]["multiplicity"], 1);
    const auto f = path("odd.txt");
    ASSERT_EQ(run("solve --kind disc --a 0.5 --sin 1=1 --n 16 --out " + f).code, 0);
    EXPECT_EQ(run("classify --field " + f).code, 3);
}

TEST_F(Cli, SolveIsDeterministic) {
    const auto f1 = path("a.txt"), f2 = path("b.txt");
    const std::string args = "solve --kind strip --a 0.3 --top \"const=0.2,cos 1=0.5\" --bottom \"const=0.2,cos 1=0.5\" --n 32 --out ";
    ASSERT_EQ(run(args + f1).code, 0);
    ASSERT_EQ(run(args + f2).code, 0);
    EXPECT_EQ(slurp(f1), slurp(f2));
}

TEST_F(Cli, ConfigPrecedence) {
    const auto cfg = path("cfg.json");
    std::ofstream(cfg) << R"({"kind":"disc","a":0.5,"cos":{"1":2.0},"n":16})";
    const auto f1 = path("c1.txt"), f2 = path("c2.txt");
    ASSERT_EQ(run("solve --config " + cfg + " --out " + f1).code, 0);
    ASSERT_EQ(run("solve --config " + cfg + " --a 0.25 --out " + f2).code, 0);
    std::ifstream i1(f1), i2(f2);
    const auto g1 = slfib::read_field_dump(i1), g2 = slfib::read_field_dump(i2);
    EXPECT_EQ(g1.a, 0.5);
    EXPECT_EQ(g2.a, 0.25);
    EXPECT_EQ(g1.domain.n_x, 16);
    EXPECT_NEAR(g1.v(3, 5), 2.0, 1e-10);
    std::ofstream(cfg) << "not json";
    EXPECT_EQ(run("solve --config " + cfg).code, 2);
}

TEST_F(Cli, SweepStripFamily) {
    const auto out = path("s.ndjson"), csv = path("s.csv");
    const CliRun r = run("sweep --family section7 --n 32 --t 0,0.5 --jobs 2 --out " + out + " --csv " + csv);
    ASSERT_EQ(r.code, 0);
    std::ifstream in(out);
    std::string line;
    std::vector<json> recs;
    while (std::getline(in, line))
        if (!line.empty()) recs.push_back(json::parse(line));
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_NEAR(recs[0]["alpha"].get<double>(), 0.0, 1e-7);
    EXPECT_LT(recs[1]["alpha"].get<double>(), 0.0);
    EXPECT_NEAR(recs[1]["beta"].get<double>(), -recs[1]["alpha"].get<double>(), 1e-5);
    std::ifstream c(csv);
    std::getline(c, line);
    EXPECT_EQ(line, "t,alpha_t,beta_t");
}

TEST_F(Cli, ProjectAndOracle) {
    const CliRun p = run("project --family section7 --t 0 --n 32 --z 1,0,1,0,0,1");
    ASSERT_EQ(p.code, 0);
    const json j = json::parse(p.out);
    EXPECT_NEAR(j["a"].get<double>(), 0.0, 1e-14);
    EXPECT_NEAR(j["b"].get<double>(), 1.0, 1e-8);
    EXPECT_NEAR(j["c"].get<double>(), 1.0, 1e-8);
    const CliRun o = run("oracle --a 0 --x 0.5 --y 0");
    ASSERT_EQ(o.code, 0);
    const json w = json::parse(o.out);
    const auto ref = slfib::na_oracle(0.0, 0.5, 0.0);
    EXPECT_EQ(w["u"].get<double>(), ref.u);
    EXPECT_EQ(w["v"].get<double>(), ref.v);
}

TEST_F(Cli, FiberSampleLiesOnFibre) {
    const auto out = path("pts.csv");
    ASSERT_EQ(run("fiber-sample --family section7 --t 0 --n 32 --a 0.3 --b 0.5 --c -0.2 --count 20 --seed 5 --out " + out).code, 0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(slfib::parse_double(cell));
        ASSERT_GE(v.size(), 6u);
        const slfib::cplx z1(v[v.size() - 6], v[v.size() - 5]), z2(v[v.size() - 4], v[v.size() - 3]),
            z3(v[v.size() - 2], v[v.size() - 1]);
        EXPECT_NEAR(0.5 * (std::norm(z1) - std::norm(z2)), 0.3, 1e-10);
        EXPECT_NEAR((z1 * z2).real(), 0.5, 1e-10);  // v constant for the t = 0 family
        EXPECT_NEAR(z3.imag(), -0.2, 1e-10);
        ++rows;
    }
    EXPECT_EQ(rows, 20);
}

TEST_F(Cli, SlCheckExplicit) {
    const CliRun r = run("sl-check --source F --c-re 0.3 --c-im -0.1 --frames 200 --seed 3");
    EXPECT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_LT(j["max_omega"].get<double>(), 1e-6);
    EXPECT_LT(j["max_imomega"].get<double>(), 1e-6);
}

TEST_F(Cli, MonodromyWritesFigures) {
    const CliRun r = run("monodromy --vertex both --show-fixed --duality --out-dir " + dir_.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir_ / "ribbons_positive.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "ribbons_negative.csv"));
    const CliRun n = run("monodromy --vertex positive --no-figures --out-dir " + path("none"));
    EXPECT_EQ(n.code, 0);
    EXPECT_FALSE(fs::exists(path("none") + "/ribbons_positive.csv"));
}
