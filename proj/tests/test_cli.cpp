#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code;
  std::string out;
  std::vector<json> records;
};

std::string data(const std::string& name) { return std::string(QCLAB_TEST_DATA) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qclab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliRun run(const std::string& args) {
  const std::string command = std::string(QCLAB_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  CliRun r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, {}};
  std::istringstream lines(out);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) r.records.push_back(json::parse(line));
  }
  return r;
}

const json* find(const CliRun& r, const std::string& kind) {
  for (const auto& rec : r.records) {
    if (rec.value("record", "") == kind) return &rec;
  }
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, DceOnXor) {
  const auto dir = scratch("dce");
  const CliRun r = run("dce --g " + data("xor2.tt") + " --mu " + data("uniform2.dist") + " --eps 1/4 --out " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json* rec = find(r, "dce");
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ((*rec)["depth"], 2);
  EXPECT_EQ((*rec)["success"], "1");
  EXPECT_EQ((*rec)["verdict"], "pass");
  EXPECT_TRUE(fs::exists(dir / "witness.tree"));
  EXPECT_EQ(slurp(dir / "report.jsonl"), r.out);
}

TEST(Cli, DceAndIsZero) {
  const CliRun r = run("dce --g " + data("and2.tt") + " --mu " + data("uniform2.dist") + " --eps 1/3");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ((*find(r, "dce"))["depth"], 0);
}

TEST(Cli, RqcIdentityAndCertificate) {
  const CliRun r = run("rqc --g " + data("id1.tt") + " --eps 1/3");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json* rec = find(r, "rqc");
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ((*rec)["depth"], 1);
  EXPECT_EQ((*rec)["certified"], true);
}

TEST(Cli, ParseErrorReportsLine) {
  const CliRun r = run("dce --g " + data("bad.tt") + " --mu " + data("uniform2.dist") + " --eps 1/4");
  EXPECT_EQ(r.exit_code, 2);
  const json* rec = find(r, "error");
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ((*rec)["error"], "ParseError");
  EXPECT_NE((*rec)["message"].get<std::string>().find("line 2"), std::string::npos);
}

TEST(Cli, MissingFileIsIoError) {
  const CliRun r = run("dce --g " + data("nope.tt") + " --mu " + data("uniform2.dist") + " --eps 1/4");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ((*find(r, "error"))["error"], "IoError");
}

TEST(Cli, BuildInstanceInnerComplexityZero) {
  const auto dir = scratch("zero");
  const CliRun r = run("build-instance --g " + data("and2.tt") + " --f " + data("xor2.tt") + " --mu " +
                    data("uniform2.dist") + " --n 2 --eps 1/3 --out " + dir.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ((*find(r, "error"))["error"], "InnerComplexityZero");
}

TEST(Cli, BuildThenSimulateIsReproducible) {
  const auto dir = scratch("sim");
  const CliRun b = run("build-instance --g " + data("xor2.tt") + " --f " + data("xor2.tt") + " --mu " +
                    data("uniform2.dist") + " --n 2 --eps 1/4 --out " + dir.string());
  ASSERT_EQ(b.exit_code, 0) << b.out;
  EXPECT_EQ((*find(b, "build-instance"))["inner_complexity"], 2);
  const std::string manifest = (dir / (*find(b, "build-instance"))["manifest"].get<std::string>()).string();
  const std::string args = "simulate --instance " + manifest + " --tree " + data("b4.tree") + " --samples 3000 --seed 5";
  const CliRun s1 = run(args);
  const CliRun s2 = run(args);
  ASSERT_EQ(s1.exit_code, 0) << s1.out;
  EXPECT_EQ(s1.out, s2.out);
  int leaves = 0;
  for (const auto& rec : s1.records) {
    if (rec["record"] == "leaves") {
      ++leaves;
      EXPECT_EQ(rec["verdict"], "pass");
    }
  }
  EXPECT_EQ(leaves, 4);
  ASSERT_NE(find(s1, "success_chain"), nullptr);
  EXPECT_EQ((*find(s1, "success_chain"))["verdict"], "pass");
  const CliRun s3 = run("simulate --instance " + manifest + " --tree " + data("b4.tree") + " --samples 3000 --seed 6");
  EXPECT_NE(s1.out, s3.out);
}

TEST(Cli, XorStack) {
  const CliRun r = run("xor-stack --g " + data("id1.tt") + " --t 2");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ((*find(r, "xor-stack"))["outputs"], "0110");
}

TEST(Cli, VerifySmallSweep) {
  const CliRun r = run("verify --claim fullbias");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json* rec = find(r, "sweep");
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ((*rec)["violations"], 0);
  EXPECT_EQ((*rec)["verdict"], "pass");
}

TEST(Cli, BadRationalIsRejected) {
  const CliRun r = run("dce --g " + data("xor2.tt") + " --mu " + data("uniform2.dist") + " --eps half");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(find(r, "error"), nullptr);
}
