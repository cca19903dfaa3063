#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path scratch()
{
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("fracalc_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args)
{
    const auto out = scratch() / "stdout", err = scratch() / "stderr";
    const std::string cmd = std::string(FRACALC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const fs::path& p, const std::string& s)
{
    std::ofstream(p, std::ios::binary) << s;
}

} // namespace

TEST(Cli, PowerRuleExample)
{
    const auto r = run("fracop --kind power --beta 1 --alpha 0.5 --t 1");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["value"].get<double>(), 1.1283791671, 1e-9);
    EXPECT_LT(j["est_error"].get<double>(), 1e-8);
}

TEST(Cli, MittagLefflerIsExp)
{
    const auto r = run("ml --alpha 1 --beta 1 --t 1");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 2.718281828459045, 1e-13);
}

TEST(Cli, CtrwRunsAreByteIdentical)
{
    const auto a = scratch() / "ctrw_a", b = scratch() / "ctrw_b";
    for (const auto& d : {a, b}) {
        const auto r = run("ctrw --alpha 0.5 --walkers 10 --seed 7 --format csv --out-dir " + d.string());
        ASSERT_EQ(r.code, 0) << r.err;
    }
    for (const char* f : {"msd.csv", "hist.csv"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty());
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
    const auto other = run("ctrw --alpha 0.5 --walkers 10 --seed 8 --format csv --out-dir " + (scratch() / "ctrw_c").string());
    ASSERT_EQ(other.code, 0);
    EXPECT_NE(slurp(a / "msd.csv"), slurp(scratch() / "ctrw_c" / "msd.csv"));
}

TEST(Cli, CsvLayout)
{
    const auto d = scratch() / "relax";
    ASSERT_EQ(run("relax --alpha 0.5 --lambda -1 --dt 0.01 --format csv --out-dir " + d.string()).code, 0);
    const auto text = slurp(d / "relax.csv");
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,u,closed_form");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    // 0.01 printed with 17 significant digits.
    EXPECT_EQ(line.substr(0, line.find(',')), "0.01");
    EXPECT_EQ(text.back(), '\n');
    int rows = 0;
    for (char c : text) rows += c == '\n';
    EXPECT_EQ(rows, 102);
}

TEST(Cli, JsonKeysSorted)
{
    const auto r = run("diffusion --alpha 0.5 --n-x 11 --out-dir " + (scratch() / "diff").string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(r.out.find("\"msd\""), r.out.find("\"msd_exact\""));
    EXPECT_LT(r.out.find("\"msd_exact\""), r.out.find("\"normalization\""));
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["msd"].get<double>(), j["msd_exact"].get<double>(), 1e-6);
}

TEST(Cli, ValidationErrorsExitTwo)
{
    for (const char* args : {"ml --alpha -1", "fracop --alpha 1.5", "bogus", "fracop --kind nope", "visco --program /nonexistent",
                             "extension --alpha 0.5 --t0 2 --t1 1", "ml --alpha"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << args;
        const auto j = json::parse(r.err);
        EXPECT_TRUE(j.contains("error") && j.contains("message")) << args;
    }
}

TEST(Cli, NumericFailureExitsOne)
{
    const auto r = run("relax --alpha 0.5 --lambda 1000 --dt 0.1 --out-dir " + (scratch() / "bad").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"], "StabilityError");
}

TEST(Cli, ConfigOverridesFlags)
{
    write(scratch() / "cfg.json", R"({"alpha": 0.25, "t": 2.0})");
    const auto a = run("ml --alpha 0.9 --t 0.5 --config " + (scratch() / "cfg.json").string());
    const auto b = run("ml --alpha 0.25 --t 2");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    write(scratch() / "bad.json", R"({"nope": 1})");
    EXPECT_EQ(run("ml --config " + (scratch() / "bad.json").string()).code, 2);
}

TEST(Cli, FitAndViscoSubcommands)
{
    write(scratch() / "series.csv", "t,value\n0,1\n1,2\n2,4\n3,8\n4,16\n");
    const auto f = run("fit --model both --input " + (scratch() / "series.csv").string());
    ASSERT_EQ(f.code, 0) << f.err;
    const auto j = json::parse(f.out);
    EXPECT_NEAR(j["exponential"]["lambda"].get<double>(), std::log(2.0), 1e-9);
    EXPECT_LE(j["fractional"]["rmse"].get<double>(), j["exponential"]["rmse"].get<double>());

    write(scratch() / "ramp.json", R"({"breakpoints": [[0, 0], [1, 1]], "past": "constant"})");
    const auto v = run("visco --alpha 0.5 --t 2 --program " + (scratch() / "ramp.json").string());
    ASSERT_EQ(v.code, 0) << v.err;
    const auto k = json::parse(v.out);
    // Ramp-and-hold closed form for k = 1, alpha = 1/2: 2 (sqrt(2) - 1).
    EXPECT_NEAR(k["integral"].get<double>(), 2.0 * (std::sqrt(2.0) - 1.0), 1e-12);
    EXPECT_NEAR(k["fractional_form"].get<double>(), k["integral"].get<double>(), 1e-8);
}

TEST(Cli, ExtensionTable)
{
    const auto d = scratch() / "ext";
    const auto r = run("extension --alpha 0.5 --kind exp --n-t 200 --m 200 --format csv --out-dir " + d.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(d / "trace.csv").substr(0, 22), "t,trace,oracle,ratio\n1");
}

TEST(Cli, HelpDocumentsDefaults)
{
    for (const char* sub : {"ml", "fracop", "relax", "fit", "visco", "ctrw", "diffusion", "extension"}) {
        const auto r = run(std::string(sub) + " --help");
        EXPECT_EQ(r.code, 0) << sub;
        EXPECT_NE(r.out.find("Options:"), std::string::npos) << sub;
    }
    const auto r = run("ctrw --help");
    EXPECT_NE(r.out.find("[1000]"), std::string::npos);
    EXPECT_NE(r.out.find("time^alpha"), std::string::npos);
}
