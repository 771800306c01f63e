#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Invocation {
    int status = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("harnack_lab_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    Invocation invoke(const std::string& args) {
        const std::string cmd = std::string(HARNACK_LAB_BIN) + " " + args + " > " + (dir / "stdout").string() +
                                " 2> " + (dir / "stderr").string();
        const int raw = std::system(cmd.c_str());
        Invocation r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(dir / "stdout");
        r.err = slurp(dir / "stderr");
        return r;
    }
    json report(const fs::path& out, const std::string& check) { return json::parse(slurp(out / (check + ".report.json"))); }
    std::string sub(const std::string& name) {
        fs::create_directories(dir / name);
        return (dir / name).string();
    }
};

}  // namespace

TEST_F(Cli, ConstantsFromManualInputs) {
    const auto out = sub("o");
    const Invocation r = invoke("constants --theta1 0.25 --theta2 0.25 --a1 0.25 --eta 0.25 --c 1 --c0 1 --cJ 1 --out " + out);
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("j0 = 712"), std::string::npos);
    EXPECT_NE(r.out.find("k0 = 4"), std::string::npos);
    EXPECT_NE(r.out.find("K = 34493956096"), std::string::npos);
    const json j = report(out, "constants");
    EXPECT_EQ(j["exact"]["K"], "34493956096");
    EXPECT_EQ(j["exact"]["beta"], "1/256");
    EXPECT_EQ(j["values"]["j0"], 712.0);
    EXPECT_EQ(j["tool"], "harnack-lab");
    EXPECT_TRUE(j.contains("version"));
    EXPECT_EQ(j["seed"], 1u);
    EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(Cli, VerifyIwOnTheCauchyLine) {
    const auto out = sub("o");
    const Invocation r = invoke("verify-iw --d 1 --alpha 1 --tol 1e-6 --seed 7 --out " + out);
    EXPECT_EQ(r.status, 0) << r.err;
    const json j = report(out, "iw");
    EXPECT_LE(j["values"]["max_rel_err"].get<double>(), 0.02);
    EXPECT_TRUE(j["pass"].get<bool>());
    // 10 x 10 grid in the table.
    EXPECT_EQ(j["table"]["rows"], 100u);
    const std::string csv = slurp(fs::path(out) / "iw.data.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "x_index,z_index,iw_density,poisson_kernel,rel_err");
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
    const std::string args = "check ks --paths 20000 --seed 11 --plain --out ";
    const auto a = sub("a"), b = sub("b"), c = sub("c");
    ASSERT_EQ(invoke(args + a).status, 0);
    ASSERT_EQ(invoke(args + b + " --jobs 3").status, 0);
    EXPECT_EQ(slurp(fs::path(a) / "ks.report.json"), slurp(fs::path(b) / "ks.report.json"));
    EXPECT_EQ(slurp(fs::path(a) / "ks.data.csv"), slurp(fs::path(b) / "ks.data.csv"));
    ASSERT_EQ(invoke("check ks --paths 20000 --seed 12 --plain --out " + c).status, 0);
    EXPECT_NE(report(a, "ks")["values"]["hits"], report(c, "ks")["values"]["hits"]);
    EXPECT_NE(report(a, "ks")["config_hash"], report(c, "ks")["config_hash"]);
}

TEST_F(Cli, PipelineWritesReportsAndSummary) {
    const auto a = sub("a"), b = sub("b");
    const Invocation r = invoke("pipeline --d 1 --alpha 0.5 --seed 5 --plain --out " + a);
    EXPECT_EQ(r.status, 0) << r.out << r.err;
    const json s = json::parse(slurp(fs::path(a) / "pipeline.summary.json"));
    EXPECT_TRUE(s["pass"].get<bool>());
    EXPECT_EQ(s["checks"].size(), 15u);
    for (const auto& c : s["checks"]) {
        const std::string name = c["check"];
        EXPECT_TRUE(fs::exists(fs::path(a) / (name + ".report.json"))) << name;
        EXPECT_TRUE(fs::exists(fs::path(a) / (name + ".data.csv"))) << name;
        EXPECT_EQ(report(a, name)["config_hash"], c["config_hash"]);
    }
    ASSERT_EQ(invoke("pipeline --d 1 --alpha 0.5 --seed 5 --plain --jobs 2 --out " + b).status, 0);
    for (const auto& e : fs::directory_iterator(a)) EXPECT_EQ(slurp(e.path()), slurp(fs::path(b) / e.path().filename()));
}

TEST_F(Cli, RecurrentPipelineSkipsWholeSpaceChecks) {
    const auto a = sub("a");
    const Invocation r = invoke("pipeline --d 1 --alpha 1 --plain --out " + a + " --config /dev/null");
    // /dev/null is not a JSON object.
    EXPECT_EQ(r.status, 2);
    const Invocation ok = invoke("pipeline --d 1 --alpha 1 --plain --out " + a);
    EXPECT_EQ(ok.status, 0) << ok.out << ok.err;
    EXPECT_FALSE(fs::exists(fs::path(a) / "ks.report.json"));
    EXPECT_EQ(report(a, "constants")["mode"], "manual");
    EXPECT_EQ(report(a, "constants")["values"]["K"], 34493956096.0);
}

TEST_F(Cli, InvalidConfigNamesTheField) {
    Invocation r = invoke("check kkz --alpha 2.5");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("process.alpha"), std::string::npos);
    r = invoke("constants --theta1 0.5");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("constants.theta1"), std::string::npos);
    r = invoke("check hj --center 0,0,0");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("geometry.center"), std::string::npos);
    r = invoke("check ks --d 1 --alpha 1");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("process.alpha"), std::string::npos);
    r = invoke("pipeline --checks '[\"nope\"]'");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("pipeline.checks"), std::string::npos);
    r = invoke("check hj --no-such-flag 1");
    EXPECT_EQ(r.status, 2);

    std::ofstream(dir / "typo.json") << R"({"process": {"d": 2, "alpah": 1.0}})";
    r = invoke("check hj --config " + (dir / "typo.json").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("process.alpah"), std::string::npos);
    std::ofstream(dir / "type.json") << R"({"tolerances": {"paths": "many"}})";
    r = invoke("check ks --config " + (dir / "type.json").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("tolerances.paths"), std::string::npos);
}

TEST_F(Cli, FailingCheckExitsWithOne) {
    const auto out = sub("o");
    // A profile vanishing beyond its cutoff has no comparability constant.
    const Invocation r = invoke("check profile --kind truncated_power --cutoff 1 --plain --out " + out);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("FAIL profile"), std::string::npos);
    EXPECT_FALSE(report(out, "profile")["pass"].get<bool>());
}

TEST_F(Cli, FlagsWinOverTheConfigFile) {
    const auto a = sub("a"), b = sub("b");
    std::ofstream(dir / "c.json") << R"({"process": {"d": 1, "alpha": 0.5}, "geometry": {"theta": 0.2}, "seed": 9})";
    ASSERT_EQ(invoke("check j0 --config " + (dir / "c.json").string() + " --alpha 1.5 --out " + a).status, 0);
    const json j = report(a, "j0");
    EXPECT_EQ(j["config"]["process"]["alpha"], 1.5);
    EXPECT_EQ(j["config"]["process"]["d"], 1);
    EXPECT_EQ(j["config"]["geometry"]["theta"], 0.2);
    EXPECT_EQ(j["seed"], 9u);
    // The same configuration given by flags alone hashes the same.
    ASSERT_EQ(invoke("check j0 --d 1 --alpha 1.5 --theta 0.2 --seed 9 --out " + b).status, 0);
    EXPECT_EQ(report(b, "j0")["config_hash"], j["config_hash"]);
    EXPECT_EQ(slurp(fs::path(a) / "j0.report.json"), slurp(fs::path(b) / "j0.report.json"));
}

TEST_F(Cli, FormatSelectsTheFiles) {
    const auto a = sub("a"), b = sub("b");
    ASSERT_EQ(invoke("constants --format csv --out " + a).status, 0);
    EXPECT_FALSE(fs::exists(fs::path(a) / "constants.report.json"));
    // Checks without a table write their named values.
    const std::string csv = slurp(fs::path(a) / "constants.data.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,value");
    EXPECT_NE(csv.find("\nj0,712\n"), std::string::npos);
    ASSERT_EQ(invoke("check kkz --trials 1000 --format json --out " + b).status, 0);
    EXPECT_TRUE(fs::exists(fs::path(b) / "kkz.report.json"));
    EXPECT_FALSE(fs::exists(fs::path(b) / "kkz.data.csv"));
    EXPECT_EQ(invoke("check kkz --format xml --out " + b).status, 2);
}

TEST_F(Cli, PlainOutputHasNoEscapes) {
    const auto a = sub("a");
    const Invocation r = invoke("check j0 --plain --out " + a);
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out.find('\033'), std::string::npos);
    EXPECT_NE(r.out.find("PASS j0"), std::string::npos);
}
