#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fpt_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const std::string cmd = std::string("'") + FPT_CLI_PATH + "' " + args + " > '" + (dir_ / "out.txt").string() +
                            "' 2> '" + (dir_ / "err.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir_ / "out.txt"), slurp(dir_ / "err.txt")};
  }

  std::string path(const std::string& name) const { return "'" + (dir_ / name).string() + "'"; }

  void write(const std::string& name, const std::string& body) const { std::ofstream(dir_ / name) << body; }

  fs::path dir_;
};

constexpr const char* kSmall =
    R"({"epochs": 2, "d_model": 16, "n_layers": 1, "n_heads": 2, "d_ff": 16, "l_soft_tokens": 2, "d_hidden": 8})";

}  // namespace

TEST_F(Cli, MissingRequiredOptionIsUsageError) {
  const auto r = run("train --k 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: usage: ", 0), 0u) << r.err;
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, MissingDatasetIsIoError) {
  const auto r = run("extract-features --dataset " + path("absent.jsonl"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: io: ", 0), 0u) << r.err;
}

TEST_F(Cli, MalformedDatasetReportsLine) {
  write("bad.jsonl", "{\"id\": \"a\", \"text\": \"Fine.\", \"label\": 0}\nnot json\n");
  const auto r = run("extract-features --dataset " + path("bad.jsonl"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: parse: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownConfigKeyIsConfigError) {
  ASSERT_EQ(run("synth --classes 2 --per-class 4 --out " + path("d.jsonl")).code, 0);
  write("c.json", R"({"epochz": 3})");
  const auto r = run("train --dataset " + path("d.jsonl") + " --config " + path("c.json") + " --out " + path("m"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: config: ", 0), 0u) << r.err;
}

TEST_F(Cli, ShortClassIsDataError) {
  ASSERT_EQ(run("synth --classes 2 --per-class 3 --out " + path("d.jsonl")).code, 0);
  write("c.json", kSmall);
  const auto r = run("train --dataset " + path("d.jsonl") + " --config " + path("c.json") + " --k 2 --out " +
                     path("m"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: data: ", 0), 0u) << r.err;
}

TEST_F(Cli, TrainThenEvaluate) {
  ASSERT_EQ(run("synth --classes 3 --per-class 6 --seed 1 --out " + path("d.jsonl")).code, 0);
  write("c.json", kSmall);
  const auto t = run("train --dataset " + path("d.jsonl") + " --config " + path("c.json") +
                     " --k 1 --seed 2 --out " + path("m"));
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"model.ckpt", "model.json", "train_log.csv", "split.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "m" / f)) << f;
  }
  EXPECT_NE(t.out.find("best_epoch="), std::string::npos);
  const auto e = run("evaluate --dataset " + path("d.jsonl") + " --model " + path("m"));
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("documents=18 accuracy="), std::string::npos) << e.out;
}

TEST_F(Cli, EvaluateRejectsCorruptCheckpoint) {
  ASSERT_EQ(run("synth --classes 2 --per-class 4 --out " + path("d.jsonl")).code, 0);
  write("c.json", kSmall);
  ASSERT_EQ(run("train --dataset " + path("d.jsonl") + " --config " + path("c.json") + " --k 1 --out " +
                path("m")).code,
            0);
  fs::resize_file(dir_ / "m" / "model.ckpt", 20);
  const auto r = run("evaluate --dataset " + path("d.jsonl") + " --model " + path("m"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: parse: ", 0), 0u) << r.err;
}
