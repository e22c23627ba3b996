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

const fs::path kDir = fs::temp_directory_path() / "psm_test_cli";

fs::path at(const std::string& name) { return kDir / name; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const std::string& name, const std::string& text) { std::ofstream(at(name)) << text; }

/** Run the CLI; stdout goes to out.txt, stderr to err.txt. Returns the exit code. */
int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " \"" PSM_CLI_PATH "\" " + args + " >\"" + at("out.txt").string() + "\" 2>\"" +
                            at("err.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test
{
protected:
    void SetUp() override
    {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
        put("I.csv", "1,0\n0,1\n");
        put("y.csv", "3\n0\n");
    }
};

json summary() { return json::parse(slurp(at("s.json"))); }

const std::string kSummary = " --summary " + at("s.json").string();

long count_lines(const std::string& text)
{
    return static_cast<long>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_F(Cli, DantzigIdentityPath)
{
    ASSERT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y.csv").string() + " --stop-rule value:0 --out " +
                  at("theta.csv").string() + " --summary " + at("s.json").string()),
              0);
    const std::string csv = slurp(at("theta.csv"));
    EXPECT_EQ(csv, "segment_id,lambda_lo,lambda_hi,var_index,base,slope\n1,0,3,0,3,-1\n");
    const json j = json::parse(slurp(at("s.json")));
    EXPECT_EQ(j.at("segments"), 2);
    EXPECT_EQ(j.at("pivots"), 1);
    EXPECT_EQ(j.at("termination"), "LambdaNonpositive");
    EXPECT_EQ(j.at("support"), json::array({0}));
}

TEST_F(Cli, SolveProgramFile)
{
    put("p.json", R"({"m": 2, "n": 2, "kind": "le", "A": [[1, 0], [0, 1]], "b": [1, 1], "b_bar": [0, 0],
                      "c": [1, -1], "c_bar": [-1, 0]})");
    ASSERT_EQ(run("solve " + at("p.json").string() + " --out " + at("path.csv").string() + kSummary), 0);
    const json j = summary();
    EXPECT_EQ(j.at("pivots"), 1);
    EXPECT_GT(count_lines(slurp(at("path.csv"))), 1);
}

TEST_F(Cli, InfeasibleExitsTwo)
{
    put("inf.coo", "1 1 le\n0 0 1\nb 0 -1\nc 0 -1\n");
    EXPECT_EQ(run("solve " + at("inf.coo").string() + kSummary), 2);
    EXPECT_EQ(summary().at("termination"), "Infeasible");
}

TEST_F(Cli, PivotCapExitsFour)
{
    put("y2.csv", "3\n2\n");
    put("cap.coo", "2 4 le\n0 0 1\n0 1 -1\n1 0 -1\n1 1 1\nb 0 3\nb 1 -3\nb_bar 0 1\nb_bar 1 1\n"
                   "c 0 -1\nc 1 -1\n");
    EXPECT_EQ(run("solve " + at("cap.coo").string() + " --max-pivots 1 --lambda-target 0"), 0);
    EXPECT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y2.csv").string() +
                  " --stop-rule value:0 --out " + at("t.csv").string()),
              0);
    // two pivots are needed for y = (3, 2); a cap of one stops early
    put("dz.coo", "4 4 le\n"
                  "0 0 1\n0 2 -1\n1 1 1\n1 3 -1\n2 0 -1\n2 2 1\n3 1 -1\n3 3 1\n"
                  "b 0 3\nb 1 2\nb 2 -3\nb 3 -2\n"
                  "b_bar 0 1\nb_bar 1 1\nb_bar 2 1\nb_bar 3 1\n"
                  "c 0 -1\nc 1 -1\nc 2 -1\nc 3 -1\n");
    EXPECT_EQ(run("solve " + at("dz.coo").string() + " --max-pivots 1" + kSummary), 4);
    EXPECT_EQ(summary().at("termination"), "IterationCap");
    EXPECT_EQ(run("solve " + at("dz.coo").string() + kSummary), 0);
    EXPECT_EQ(summary().at("pivots"), 2);
}

TEST_F(Cli, UsageErrorsExitSixtyFour)
{
    EXPECT_EQ(run("dantzig --no-such-flag"), 64);
    EXPECT_EQ(run(""), 64);
    EXPECT_EQ(run("solve " + at("missing.json").string()), 64);
    put("bad.coo", "2 2 eq\n0 9 1\n");
    EXPECT_EQ(run("solve " + at("bad.coo").string()), 64);
    EXPECT_NE(slurp(at("err.txt")).find("line 2"), std::string::npos);
    EXPECT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y.csv").string() + " --stop-rule fast"), 64);
    put("y3.csv", "1\n2\n3\n");
    EXPECT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y3.csv").string()), 64);
    EXPECT_EQ(run("gen dantzig --s 500 --d 10 --out-dir " + kDir.string()), 64);
    EXPECT_EQ(run("gen dantzig --amplitude laplace --out-dir " + kDir.string()), 64);
    EXPECT_EQ(run("bench diffnet --stop-rule value:1 --reps 1"), 64);
}

TEST_F(Cli, GenThenSolveMatchesBench)
{
    const std::string cfg = " --n 40 --d 80 --s 3 --seed 9";
    ASSERT_EQ(run("gen dantzig" + cfg + " --out-dir " + kDir.string()), 0);
    ASSERT_TRUE(fs::exists(at("X.csv")));
    ASSERT_EQ(run("dantzig " + at("X.csv").string() + " " + at("y.csv").string() + " --theta0 " +
                  at("theta0.csv").string() + " --stop-rule benchmark --breakpoints " + at("bp.csv").string() + kSummary),
              0);
    const json j = summary();
    ASSERT_EQ(run("bench dantzig" + cfg + " --reps 1 --stop-rule benchmark --out " + at("bench.csv").string()), 0);
    std::istringstream bench(slurp(at("bench.csv")));
    std::string header, row;
    std::getline(bench, header);
    std::getline(bench, row);
    EXPECT_EQ(header, "id,d,n,pivots,seconds,max_violation,support_ok,terminal_lambda");
    std::vector<std::string> fields;
    std::istringstream rs(row);
    for (std::string f; std::getline(rs, f, ',');)
        fields.push_back(f);
    ASSERT_EQ(fields.size(), 8u);
    EXPECT_EQ(std::stol(fields[3]), j.at("pivots").get<long>());
    EXPECT_EQ(fields[6] == "1", j.at("support_ok").get<bool>());
    EXPECT_LE(j.at("max_violation").get<double>(), 1e-8);
    EXPECT_EQ(count_lines(slurp(at("bp.csv"))), 1 + 2 * j.at("segments").get<long>() - 1);
}

TEST_F(Cli, DiffnetAndSvm)
{
    ASSERT_EQ(run("gen diffnet --d 5 --sparsity 0.1 --seed 3 --out-dir " + kDir.string()), 0);
    ASSERT_EQ(run("diffnet " + at("SX.csv").string() + " " + at("SY.csv").string() + " --stop-rule sparsity:3" + kSummary), 0);
    EXPECT_GE(summary().at("nonzeros").get<long>(), 3);

    put("fx.csv", "1\n-1\n");
    put("lab.csv", "1\n-1\n");
    ASSERT_EQ(run("svm " + at("fx.csv").string() + " " + at("lab.csv").string() + " --stop-rule value:2 --out " + at("svm.csv").string() + kSummary),
              0);
    const json s = summary();
    EXPECT_EQ(s.at("training_errors"), 0);
    EXPECT_NE(slurp(at("svm.csv")).find(",-1,"), std::string::npos);
}

TEST_F(Cli, TraceAndLogging)
{
    ASSERT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y.csv").string() + " --stop-rule value:0 --trace " +
                  at("trace.txt").string()),
              0);
    EXPECT_EQ(count_lines(slurp(at("trace.txt"))), 1);
    ASSERT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y.csv").string() + " --stop-rule value:0",
                  "PSM_LOG=info"),
              0);
    EXPECT_NE(slurp(at("err.txt")).find("LambdaNonpositive"), std::string::npos);
    ASSERT_EQ(run("dantzig " + at("I.csv").string() + " " + at("y.csv").string() + " --stop-rule value:0"), 0);
    EXPECT_TRUE(slurp(at("err.txt")).empty());
}
