#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "test_util.hpp"

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  hetgnn::TempDir tmp;
  const auto log = tmp.path() / "out.txt";
  const std::string cmd = std::string(HETGNN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  const auto& h = rows.at(0);
  const auto idx = static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  std::vector<std::string> out;
  for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(rows[i].at(idx));
  return out;
}

}  // namespace

TEST(Cli, TrainWritesOneRowPerBatch) {
  hetgnn::TempDir out;
  const auto r = run_cli("--out-dir " + out.path().string() +
                         " train --strategy layer-based --hot-ratio 0.2 --n 4 --dataset sbm1k --epochs 2"
                         " --batch-size 64 --hidden 16 --no-eval");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = read_csv(out.path() / "batches.csv");
  const auto epochs = read_csv(out.path() / "epochs.csv");
  ASSERT_EQ(epochs.size(), 3u);
  std::size_t per_epoch = 0;
  for (const auto& e : column(rows, "epoch")) per_epoch += e == "0";
  EXPECT_EQ(per_epoch, 11u);  // 650 train vertices
  EXPECT_EQ(rows.size() - 1, 2 * per_epoch);
  EXPECT_TRUE(std::filesystem::exists(out.path() / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(out.path() / "summary.json"));
}

TEST(Cli, ZeroSuperBatchIsAUsageError) {
  hetgnn::TempDir out;
  const auto r = run_cli("--out-dir " + out.path().string() + " train --n 0 --dataset sbm1k");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("--n"), std::string::npos) << r.output;
  EXPECT_FALSE(std::filesystem::exists(out.path() / "batches.csv"));
}

TEST(Cli, UnknownOptionFails) {
  const auto r = run_cli("train --nope");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, HotZeroLayerBasedMatchesCaseOneLossColumn) {
  hetgnn::TempDir a, b;
  const std::string common = " --dataset sbm1k --batch-size 64 --epochs 2 --hidden 16 --no-eval";
  ASSERT_EQ(run_cli("--out-dir " + a.path().string() + " train --strategy case1" + common).code, 0);
  ASSERT_EQ(run_cli("--out-dir " + b.path().string() + " train --strategy layer-based --hot-ratio 0" + common).code,
            0);
  const auto la = column(read_csv(a.path() / "batches.csv"), "loss");
  const auto lb = column(read_csv(b.path() / "batches.csv"), "loss");
  ASSERT_EQ(la.size(), 22u);
  EXPECT_EQ(la, lb);
}

TEST(Cli, SimulateAndReport) {
  hetgnn::TempDir out;
  const std::string dir = " --out-dir " + out.path().string();
  ASSERT_EQ(run_cli(dir + " simulate --dataset sbm1k --batch-size 64").code, 0);
  const auto rows = read_csv(out.path() / "strategies.csv");
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_TRUE(std::filesystem::exists(out.path() / "trace_layer-based.csv"));
  ASSERT_EQ(run_cli(dir + " train --dataset sbm1k --batch-size 64 --epochs 1 --no-eval").code, 0);
  ASSERT_EQ(run_cli(dir + " report").code, 0);
  EXPECT_TRUE(std::filesystem::exists(out.path() / "report.md"));
}
