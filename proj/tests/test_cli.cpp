#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <qstieltjes/cli.hpp>

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    Result r;
    r.code = qstieltjes::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

nlohmann::ordered_json parse(const Result& r) { return nlohmann::ordered_json::parse(r.out); }

int shell(const std::string& cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string hahn = "hahn:q=1/2,alpha=1,beta=2,N=4";
const std::string kravchuk = "kravchuk:q=1/2,p=1/3,N=6";

} // namespace

TEST(Cli, MomentsExactPasses)
{
    const auto r = run({"moments", "--family", kravchuk, "--mode", "exact"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = parse(r);
    EXPECT_EQ(j["version"], "0.1.0");
    EXPECT_EQ(j["command"], "moments");
    EXPECT_EQ(j["family"], kravchuk);
    EXPECT_EQ(j["mode"], "exact");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_TRUE(j["elapsed_ms"].is_null());
    for (const auto& c : j["checks"]) {
        EXPECT_EQ(c["residual"], "0");
        EXPECT_NE(c["anchor"].get<std::string>().find('/'), std::string::npos);
    }
}

TEST(Cli, ReportKeyOrderIsFixed)
{
    const auto j = parse(run({"moments", "--family", kravchuk}));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> want = {"version", "command", "family", "mode",  "precision", "tol",
                                           "sweep",   "checks",  "pass",   "data", "elapsed_ms"};
    EXPECT_EQ(keys, want);
}

TEST(Cli, OutputIsByteStable)
{
    const std::vector<std::string> args = {"verify-theorem", "--family", "meixner:q=1/2,mu=1/3,gamma=5/2", "--points", "6"};
    const auto a = run(args);
    const auto b = run(args);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, JobsDoNotChangeOutput)
{
    const std::vector<std::string> base = {"verify-all", "--family", hahn, "--rep", "4", "--points", "8"};
    auto one = base;
    one.insert(one.end(), {"--jobs", "1"});
    auto four = base;
    four.insert(four.end(), {"--jobs", "4"});
    const auto a = run(one);
    const auto b = run(four);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, VerifyAllCoversEveryModule)
{
    const auto r = run({"verify-all", "--family", "charlier:q=1/2,mu=3/4", "--rep", "3", "--points", "6"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::set<std::string> modules;
    const auto j = parse(r);
    for (const auto& c : j["checks"]) {
        const std::string a = c["anchor"];
        modules.insert(a.substr(0, a.find('/')));
    }
    for (const char* m : {"qcore", "qhyper", "families", "functionals", "stieltjes", "orthopoly"})
        EXPECT_TRUE(modules.count(m)) << m;
}

TEST(Cli, PerturbedTauFailsPearson)
{
    const auto r = run({"verify-all", "--family", "hahn:q=1/2,alpha=1,beta=1,N=3", "--perturb", "tau", "--rep", "2"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("functionals/pearson-equation"), std::string::npos) << r.err;
    const auto j = parse(r);
    EXPECT_FALSE(j["pass"].get<bool>());
    // Fail-fast: the failing check is the last one reported.
    EXPECT_EQ(j["checks"].back()["anchor"], "functionals/pearson-equation");
}

TEST(Cli, KeepGoingRunsEverything)
{
    const auto fast = parse(run({"verify-all", "--family", hahn, "--perturb", "c", "--rep", "2", "--points", "5"}));
    const auto all =
        parse(run({"verify-all", "--family", hahn, "--perturb", "c", "--rep", "2", "--points", "5", "--keep-going"}));
    EXPECT_GT(all["checks"].size(), fast["checks"].size());
    bool theorem_failed = false;
    for (const auto& c : all["checks"])
        if (c["anchor"] == "stieltjes/difference-equation") theorem_failed = !c["pass"].get<bool>();
    EXPECT_TRUE(theorem_failed);
}

TEST(Cli, MomentPerturbationFailsRecurrence)
{
    const auto r = run({"verify-all", "--family", "meixner:q=1/2,mu=1/3,gamma=2", "--perturb", "moment", "--rep", "2",
                        "--keep-going", "--points", "5"});
    EXPECT_EQ(r.code, 1);
    const auto j = parse(r);
    for (const auto& c : j["checks"])
        if (c["anchor"] == "functionals/moment-recurrence" || c["anchor"] == "families/closed-moments") {
            EXPECT_FALSE(c["pass"].get<bool>()) << c["anchor"];
        }
}

TEST(Cli, CsvHasOneRowPerSample)
{
    const auto r = run({"moments", "--family", kravchuk, "--format", "csv", "--k", "0..4"});
    EXPECT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "check,anchor,sample,residual,tol,pass");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find("families/closed-moments"), std::string::npos);
    }
    EXPECT_EQ(rows, 5);
}

TEST(Cli, OutWritesFile)
{
    const auto path = std::filesystem::temp_directory_path() / "qstieltjes_cli_out.json";
    std::filesystem::remove(path);
    const auto r = run({"pade", "--family", kravchuk, "--out", path.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    const auto j = nlohmann::ordered_json::parse(f);
    EXPECT_EQ(j["command"], "pade");
    std::filesystem::remove(path);
}

TEST(Cli, TimingIsOptIn)
{
    const auto j = parse(run({"moments", "--family", kravchuk, "--timing"}));
    EXPECT_TRUE(j["elapsed_ms"].is_number());
}

TEST(Cli, ExplicitTPointsAndTolerance)
{
    const auto r = run({"stieltjes", "--family", hahn, "--t", "3/7,-2,5", "--tol", "1e-40"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = parse(r);
    EXPECT_EQ(j["tol"], "1.000000e-40");
    EXPECT_EQ(j["checks"][0]["rows"].size(), 3u);
    EXPECT_EQ(j["checks"][0]["rows"][0]["sample"], "t=3/7");
}

TEST(Cli, BareFamilyDrawsFromSeed)
{
    const auto a = parse(run({"moments", "--family", "meixner", "--seed", "4"}));
    const auto b = parse(run({"moments", "--family", "meixner", "--seed", "4"}));
    const auto c = parse(run({"moments", "--family", "meixner", "--seed", "5"}));
    EXPECT_EQ(a["family"], b["family"]);
    EXPECT_NE(a["family"], c["family"]);
    EXPECT_NE(a["family"].get<std::string>().find("meixner:q="), std::string::npos);
    EXPECT_TRUE(a["pass"].get<bool>());
}

TEST(Cli, IdentitiesNeedNoFamily)
{
    const auto r = run({"verify-identities", "--rep", "5", "--mode", "exact"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = parse(r);
    EXPECT_TRUE(j["family"].is_null());
    for (const auto& c : j["checks"]) EXPECT_EQ(c["residual"], "0");
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"moments"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", "laguerre:q=1/2"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", kravchuk, "--mode", "fuzzy"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", kravchuk, "--format", "xml"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", kravchuk, "--k", "5..2"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", kravchuk, "--precision", "10"}).code, 2);
    EXPECT_EQ(run({"moments", "--family", "kravchuk:q=1/2,p=2,N=3"}).code, 2);
    const auto r = run({"moments", "--family", kravchuk, "--perturb", "sigma"});
    EXPECT_EQ(r.code, 2);
    // One-line diagnostic.
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ExactModeRejectsInfiniteFamilies)
{
    const auto r = run({"moments", "--family", "charlier:q=1/2,mu=1/2", "--mode", "exact"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("unsupported"), std::string::npos) << r.err;
}

TEST(Cli, PoleIsNumericalFailure)
{
    EXPECT_EQ(run({"stieltjes", "--family", kravchuk, "--t", "1"}).code, 3);
}

TEST(Cli, HelpExitsCleanly)
{
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("verify-all"), std::string::npos);
}

#ifdef QSTIELTJES_CLI
TEST(CliBinary, ExitCodesThroughMain)
{
    const std::string bin = QSTIELTJES_CLI;
    EXPECT_EQ(shell(bin + " moments --family " + kravchuk + " > /dev/null"), 0);
    EXPECT_EQ(shell(bin + " moments --family " + hahn + " --perturb moment 2> /dev/null > /dev/null"), 1);
    EXPECT_EQ(shell(bin + " moments 2> /dev/null"), 2);
    EXPECT_EQ(shell(bin + " stieltjes --family " + kravchuk + " --t 1 2> /dev/null"), 3);
}
#endif
