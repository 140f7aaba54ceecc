#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "tigernet/cli.hpp"

namespace fs = std::filesystem;

namespace tigernet {
namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fixture(const std::string& name) { return (test::fixture_dir() / name).string(); }

// Stdout followed by every file under `dir`, in path order.
std::string transcript(const CliRun& r, const fs::path& dir = {}) {
  std::string s = r.out;
  if (dir.empty() || !fs::exists(dir)) return s;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    s += "== " + fs::relative(f, dir).generic_string() + " ==\n" + test::read_file(f);
  return s;
}

// Set TIGERNET_UPDATE_GOLDEN=1 to rewrite the expected files.
void expect_golden(const std::string& name, const std::string& actual) {
  const fs::path path = test::fixture_dir() / "golden" / (name + ".txt");
  if (std::getenv("TIGERNET_UPDATE_GOLDEN")) {
    fs::create_directories(path.parent_path());
    test::write_file(path, actual);
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << "missing golden file " << path;
  EXPECT_EQ(actual, test::read_file(path)) << "golden mismatch for " << name;
}

struct GoldenCase {
  std::string name;
  std::vector<std::string> args;  // "@OUT" is replaced by a scratch path
};

std::vector<GoldenCase> golden_cases() {
  const auto labeled = fixture("labeled");
  const auto teacher = fixture("teacher.jsonl");
  const auto student = fixture("student_dets.jsonl");
  const auto sizes = fixture("sizes.csv");
  return {
      {"arch_table", {"arch", "--input", "256"}},
      {"arch_sweep_csv", {"--format", "csv", "arch", "--sweep"}},
      {"arch_mac1_json", {"arch", "--input", "224", "--mac", "1", "--format", "json"}},
      {"anchors_json", {"--format", "json", "anchors", "--input", "128"}},
      {"match_table", {"match", "--gt", labeled}},
      {"loss_check", {"--seed", "11", "loss-check", "--trials", "4"}},
      {"nms_blend", {"nms", "--dets", teacher, "--mode", "blend"}},
      {"nms_greedy_file", {"nms", "--dets", teacher, "--mode", "greedy", "--out", "@OUT/nms.jsonl"}},
      {"eval_eleven", {"eval", "--gt", labeled, "--dets", student, "--interp", "11", "--pr-csv",
                       "@OUT/pr.csv"}},
      {"eval_json", {"--format", "json", "eval", "--gt", labeled, "--dets", student}},
      {"pseudo", {"pseudo", "--dets", teacher, "--sizes", sizes, "--out", "@OUT/pseudo"}},
      {"merge", {"merge", "--labeled", labeled, "--pseudo", fixture("pseudo_voc"), "--out",
                 "@OUT/merged"}},
      {"split", {"--seed", "7", "split", "--voc", labeled, "--train", "@OUT/train", "--val",
                 "@OUT/val", "--fraction", "0.6"}},
      {"augment_plan", {"--seed", "5", "augment-plan", "--voc", labeled, "--flip", "h", "--rotate",
                        "5", "--out", "@OUT/plan.jsonl", "--out-voc", "@OUT/aug"}},
      {"stats_json", {"--format", "json", "stats", "--voc", labeled}},
      {"stats_table", {"stats", "--voc", fixture("pseudo_voc")}},
  };
}

std::string run_case(const GoldenCase& c, const std::string& tag) {
  test::TempDir tmp(tag);
  auto args = c.args;
  for (auto& a : args)
    if (a.rfind("@OUT", 0) == 0) a = tmp.path().string() + a.substr(4);
  const CliRun r = run(args);
  EXPECT_EQ(r.code, 0) << c.name << ": " << r.err;
  return transcript(r, tmp.path());
}

TEST(CliGolden, EverySubcommandMatchesShippedOutput) {
  std::set<std::string> covered;
  for (const auto& c : golden_cases()) {
    SCOPED_TRACE(c.name);
    expect_golden(c.name, run_case(c, "golden"));
    for (const auto& a : c.args)
      if (!a.empty() && a[0] != '-' && a.find('/') == std::string::npos) covered.insert(a);
  }
  for (const char* sub : {"arch", "anchors", "match", "loss-check", "nms", "eval", "pseudo", "merge",
                          "split", "augment-plan", "stats"})
    EXPECT_TRUE(covered.count(sub)) << sub;
}

TEST(CliGolden, RerunsAreByteIdentical) {
  for (const auto& c : golden_cases()) {
    SCOPED_TRACE(c.name);
    EXPECT_EQ(run_case(c, "rerun_a"), run_case(c, "rerun_b"));
  }
}

TEST(CliGolden, SeedChangesRandomizedCommands) {
  const auto labeled = fixture("labeled");
  test::TempDir a("seed_a"), b("seed_b");
  run({"--seed", "1", "split", "--voc", labeled, "--train", a / "t", "--val",
       a / "v"});
  run({"--seed", "2", "split", "--voc", labeled, "--train", b / "t", "--val",
       b / "v"});
  EXPECT_NE(transcript({}, a.path()), transcript({}, b.path()));
}

TEST(CliErrors, UsageErrorsExitTwo) {
  const auto labeled = fixture("labeled");
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"bogus"},
           {"eval", "--dets", fixture("student_dets.jsonl")},
           {"arch", "--frobnicate"},
           {"--format", "xml", "arch"},
           {"arch", "--input", "abc"}}) {
    const CliRun r = run(args);
    EXPECT_EQ(r.code, 2) << (args.empty() ? std::string("<none>") : args[0]);
    EXPECT_FALSE(r.err.empty());
  }
  EXPECT_NE(run({"eval", "--dets", "x"}).err.find("--gt"), std::string::npos);
}

TEST(CliErrors, DomainErrorsExitOneAndNameTheInput) {
  test::TempDir tmp("domain");
  const CliRun missing = run({"eval", "--gt", fixture("labeled"), "--dets", tmp / "none.jsonl"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("none.jsonl"), std::string::npos) << missing.err;

  test::write_file(tmp / "bad.jsonl", "{\"image_id\":\"a\"}\n");
  const CliRun bad = run({"nms", "--dets", tmp / "bad.jsonl"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;

  EXPECT_EQ(run({"arch", "--input", "100"}).code, 1);
  EXPECT_EQ(run({"arch", "--mac", "3"}).code, 1);
  EXPECT_EQ(run({"pseudo", "--dets", fixture("teacher.jsonl"), "--sizes", fixture("labeled"),
                 "--out", tmp / "p"})
                .code,
            1);
  EXPECT_EQ(run({"merge", "--labeled", fixture("labeled"), "--pseudo", fixture("labeled"), "--out",
                 tmp / "m", "--policy", "error"})
                .code,
            1);
}

TEST(CliHelp, VersionAndHelp) {
  const CliRun v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string("tigernet ") + kLibraryVersion + " (format schema " +
                       kFormatSchemaVersion + ")\n");
  const CliRun h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  for (const char* sub : {"arch", "anchors", "match", "loss-check", "nms", "eval", "pseudo", "merge",
                          "split", "augment-plan", "stats", "--seed", "--format"})
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
  const CliRun sub = run({"nms", "--help"});
  EXPECT_EQ(sub.code, 0);
  EXPECT_NE(sub.out.find("--iou"), std::string::npos);
  EXPECT_NE(sub.out.find("[0.5]"), std::string::npos);
}

#ifdef TIGERNET_CLI_PATH
int spawn(const std::string& args) {
  const int status = std::system((std::string("\"") + TIGERNET_CLI_PATH + "\" " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ProcessExitCodes) {
  EXPECT_EQ(spawn("--version"), 0);
  EXPECT_EQ(spawn("arch --input 256"), 0);
  EXPECT_EQ(spawn("eval --dets x"), 2);
  EXPECT_EQ(spawn("nosuch"), 2);
  EXPECT_EQ(spawn("arch --input 100"), 1);
}
#endif

}  // namespace
}  // namespace tigernet
