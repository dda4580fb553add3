#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("crnpid_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd =
        std::string("'") + CRNPID_CLI_PATH + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Result r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path dir_;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) { return split(text, '\n'); }

double csv_last_value(const std::string& csv, const std::string& column) {
  const auto lines = lines_of(csv);
  const auto header = split(lines.front(), ',');
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw std::runtime_error("no column " + column);
  return std::stod(split(lines.back(), ',')[static_cast<std::size_t>(it - header.begin())]);
}

}  // namespace

TEST_F(Cli, SimulateBuiltinPlant) {
  const auto r = run("simulate gene-expression --t-end 50");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(lines_of(r.out).front(), "time,mRNA,Pro,microRNA");
  EXPECT_NEAR(csv_last_value(r.out, "Pro"), 0.618034, 1e-4);
  EXPECT_NEAR(csv_last_value(r.out, "time"), 50.0, 1e-12);
}

TEST_F(Cli, SimulateFileToOutput) {
  const auto net = write("decay.crn", "0 ->{1} A\nA ->{1} 0\n");
  const auto csv = dir_ / "out.csv";
  const auto r = run("simulate '" + net.string() + "' --t-end 10 --grid 10 -o '" + csv.string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(lines_of(text).size(), 12u);
  EXPECT_NEAR(csv_last_value(text, "A"), 1.0 - std::exp(-10.0), 1e-5);
}

TEST_F(Cli, SimulateEmptyNetwork) {
  const auto net = write("empty.crn", "# nothing here\n");
  const auto r = run("simulate '" + net.string() + "' --t-end 5");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "time\n0\n");
}

TEST_F(Cli, MalformedFileReportsLine) {
  const auto net = write("bad.crn", "A ->{1} B\n\nB ->{-3} C\n");
  const auto r = run("simulate '" + net.string() + "'");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.crn"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingNetwork) {
  EXPECT_EQ(run("simulate no-such-network").status, 2);
  EXPECT_EQ(run("simulate").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
}

TEST_F(Cli, BlowUpIsNumericalFailure) {
  const auto net = write("boom.crn", "2A ->{1} 3A\n\ninit A = 1\n");
  const auto r = run("simulate '" + net.string() + "' --t-end 2");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("t ="), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownActuationIsUsageError) {
  const auto r = run("experiment --set actuation=bogus --out-dir '" + dir_.string() + "'");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST_F(Cli, ComposeEmitsClosedLoop) {
  const auto r = run("compose");
  ASSERT_EQ(r.status, 0) << r.err;
  std::size_t reactions = 0;
  for (const auto& line : lines_of(r.out))
    if (line.find("->{") != std::string::npos) ++reactions;
  EXPECT_EQ(reactions, 54u);
  EXPECT_NE(r.out.find("init U+ = 0.5"), std::string::npos);
  const auto loop = write("loop.crn", r.out);
  EXPECT_EQ(run("simulate '" + loop.string() + "' --t-end 1").status, 0);
}

TEST_F(Cli, FmtCanonicalises) {
  const auto net = write("messy.crn", "B+ + A->{2.50}2C   # comment\ninit A=1\n");
  const auto r = run("fmt '" + net.string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "B+ + A ->{2.5} 2C\n\ninit A = 1\n");
  ASSERT_EQ(run("fmt -i '" + net.string() + "'").status, 0);
  EXPECT_EQ(slurp(net), r.out);
}

TEST_F(Cli, VerifyDerivative) {
  const auto csv = dir_ / "report.csv";
  const auto r = run("verify derivative --scales 1,10 -o '" + csv.string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("monotone decrease"), std::string::npos) << r.out;
  const auto lines = lines_of(slurp(csv));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "scale,parameter,error");
  const double e1 = std::stod(split(lines[1], ',')[2]);
  const double e10 = std::stod(split(lines[2], ',')[2]);
  EXPECT_LE(e10, 0.5 * e1);
}

TEST_F(Cli, VerifyProportionalLadder) {
  const auto csv = dir_ / "report.csv";
  const auto r = run("verify proportional --scales 1,10,100 -o '" + csv.string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto lines = lines_of(slurp(csv));
  ASSERT_EQ(lines.size(), 4u);
  for (std::size_t i = 2; i < lines.size(); ++i)
    EXPECT_LT(std::stod(split(lines[i], ',')[2]), std::stod(split(lines[i - 1], ',')[2]));
}

TEST_F(Cli, VerifyProportionalSingleScale) {
  const auto r = run("verify proportional --scales 10");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("single scale"), std::string::npos) << r.out;
  EXPECT_EQ(run("verify integral").status, 2);
}

TEST_F(Cli, ExperimentIsDeterministic) {
  const std::string args = "experiment --set t_end=30 --set transient_end=10 --set steady_length=10 --out-dir '";
  ASSERT_EQ(run(args + (dir_ / "a").string() + "'").status, 0);
  ASSERT_EQ(run(args + (dir_ / "b").string() + "'").status, 0);
  for (const char* name : {"pi.csv", "pid.csv", "report.csv"})
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
}

TEST_F(Cli, ExperimentWritesFiles) {
  const auto out = dir_ / "exp";
  const auto r = run("experiment --set t_end=40 --set transient_end=20 --set steady_length=10 --set max_step=0.05 "
                     "--out-dir '" + out.string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* name : {"pi.csv", "pid.csv", "report.csv"}) EXPECT_TRUE(fs::exists(out / name)) << name;
  EXPECT_EQ(lines_of(slurp(out / "report.csv")).size(), 5u);
  EXPECT_NE(r.out.find("PID"), std::string::npos);
}

