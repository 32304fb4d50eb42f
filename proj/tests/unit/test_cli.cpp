#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emview/csv.hpp"
#include "emview/relation.hpp"

namespace fs = std::filesystem;
using namespace emview;

namespace {

struct Outcome {
  int rc;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("emview_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome cli(std::vector<std::string> args) {
    const std::string ws = path("ws");
    args.insert(args.begin(), {"emview", "--workspace", ws});
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {rc, out.str(), err.str()};
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(path(name));
    f << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream f(path(name));
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  // 60 points in three blobs, registered as table x.
  void seed_gmm_table() {
    auto r = cli({"--seed", "3", "generate", path("data.csv"), "-n", "60", "-d", "2", "-k", "3", "--table", "x"});
    ASSERT_EQ(r.rc, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateWritesCsvAndRegistersTable) {
  auto r = cli({"generate", path("g.csv"), "-n", "12", "-d", "3", "-k", "2", "--table", "g"});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out, "generated 12 rows\n");
  const Relation rel = read_csv_file(path("g.csv"));
  EXPECT_EQ(rel.size(), 12u);
  EXPECT_TRUE(fs::exists(path("ws/workspace.json")));
}

TEST_F(CliTest, GenerateIsSeedDeterministic) {
  ASSERT_EQ(cli({"--seed", "9", "generate", path("a.csv"), "-n", "20"}).rc, 0);
  ASSERT_EQ(cli({"--seed", "9", "generate", path("b.csv"), "-n", "20"}).rc, 0);
  ASSERT_EQ(cli({"--seed", "10", "generate", path("c.csv"), "-n", "20"}).rc, 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_NE(read("a.csv"), read("c.csv"));
}

TEST_F(CliTest, LoadAndRunTransitiveClosure) {
  write("e.csv", "f,t\n1,2\n2,3\n3,4\n");
  auto r = cli({"load", "e", path("e.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out, "loaded 3 rows into e\n");

  write("tc.sql",
        "with tc(f, t) as ((select f, t from e) union all (select tc.f, e.t from tc, e where tc.t = e.f))\n"
        "select * from tc\n");
  r = cli({"--trace", path("trace.csv"), "run", path("tc.sql"), "--out", path("tc.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const Relation tc = read_csv_file(path("tc.csv"));
  EXPECT_EQ(tc.size(), 6u);
  EXPECT_EQ(r.out.substr(0, 4), "f,t\n");

  const std::string trace = read("trace.csv");
  EXPECT_EQ(trace.rfind("iteration,rows,changed,millis\n", 0), 0u);
  EXPECT_NE(trace.find("\n3,6,0,"), std::string::npos);
}

TEST_F(CliTest, RunBindsParameters) {
  write("count.sql",
        "with c(v) as ((select 0 as v) union all (select v + 1 as v from c where v < n)) select * from c\n");
  auto r = cli({"run", path("count.sql"), "--param", "n=4", "--out", path("c.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(read_csv_file(path("c.csv")).size(), 5u);

  r = cli({"run", path("count.sql"), "--param", "oops"});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[InvalidArgument]", 0), 0u) << r.err;
}

TEST_F(CliTest, TrainGmmStoresViewAndTrace) {
  seed_gmm_table();
  auto r = cli({"--trace", path("t.csv"), "train", "g", "--table", "x", "-k", "3", "--iterations", "5"});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_NE(r.out.find("k,pie,mean,cov\n"), std::string::npos);
  EXPECT_NE(r.out.find("iterations: 5 (max-recursion)\n"), std::string::npos);
  EXPECT_NE(r.out.find("log-likelihood: "), std::string::npos);

  std::istringstream trace(read("t.csv"));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "iteration,rows,changed,millis,log_likelihood");
  int rows = 0;
  while (std::getline(trace, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows) + ",3,", 0), 0u) << line;
    EXPECT_NE(line.back(), ',');
  }
  EXPECT_EQ(rows, 5);
}

TEST_F(CliTest, TrainRegressionModels) {
  ASSERT_EQ(cli({"generate", path("l.csv"), "--generator", "linear", "-n", "40", "-d", "2", "-k", "2", "--table", "l"})
                .rc,
            0);
  for (const std::string model : {"mlr", "moe"}) {
    auto r = cli({"train", "m_" + model, "--model", model, "--table", "l", "-k", "2", "--iterations", "4"});
    ASSERT_EQ(r.rc, 0) << model << ": " << r.err;
    EXPECT_NE(r.out.find("iterations: 4"), std::string::npos);
  }
  auto r = cli({"train", "bad", "--model", "svm", "--table", "l"});
  EXPECT_EQ(r.rc, 2);
}

TEST_F(CliTest, InferAssignAndEval) {
  seed_gmm_table();
  ASSERT_EQ(cli({"train", "g", "--table", "x", "-k", "3", "--iterations", "10"}).rc, 0);

  auto r = cli({"infer", "g", "x", "--out", path("post.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  const Relation post = read_csv_file(path("post.csv"));
  EXPECT_EQ(post.size(), 180u);

  r = cli({"assign", "g", "x", "--out", path("clu.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(read_csv_file(path("clu.csv")).size(), 60u);

  r = cli({"eval", path("clu.csv"), "x"});
  ASSERT_EQ(r.rc, 0) << r.err;
  std::istringstream s(r.out);
  std::string header, values;
  std::getline(s, header);
  std::getline(s, values);
  EXPECT_EQ(header, "purity,nmi");
  const double purity = std::stod(values.substr(0, values.find(',')));
  const double nmi = std::stod(values.substr(values.find(',') + 1));
  EXPECT_GE(purity, 1.0 / 3.0);
  EXPECT_LE(purity, 1.0);
  EXPECT_GE(nmi, 0.0);
  EXPECT_LE(nmi, 1.0 + 1e-12);
}

TEST_F(CliTest, InferRequiresGmmView) {
  ASSERT_EQ(cli({"generate", path("l.csv"), "--generator", "linear", "-n", "20", "--table", "l"}).rc, 0);
  ASSERT_EQ(cli({"train", "m", "--model", "mlr", "--table", "l", "-k", "2", "--iterations", "2"}).rc, 0);
  auto r = cli({"infer", "m", "l"});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[", 0), 0u);
}

TEST_F(CliTest, AttachInsertDeleteMaintainView) {
  seed_gmm_table();
  ASSERT_EQ(cli({"train", "g", "--table", "x", "-k", "3", "--iterations", "20"}).rc, 0);
  auto r = cli({"attach", "x", "g", "--budget", "5"});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out, "attached view g to table x\n");

  write("new.csv", "id,x,label\n1001,\"[0.5,0.5]\",1\n1002,\"[1.0,-0.5]\",2\n");
  r = cli({"insert", "x", path("new.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out.rfind("inserted 2 rows into x\n", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("maintenance of view g: "), std::string::npos);
  EXPECT_NE(r.out.find("staged rows"), std::string::npos);

  r = cli({"delete", "x", "1001,1002"});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(r.out.rfind("deleted 2 rows from x\n", 0), 0u) << r.out;

  r = cli({"assign", "g", "x", "--out", path("clu.csv")});
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_EQ(read_csv_file(path("clu.csv")).size(), 60u);
}

TEST_F(CliTest, InsertHeaderMismatchIsSchemaError) {
  seed_gmm_table();
  write("bad.csv", "id,x\n1001,\"[0.5,0.5]\"\n");
  auto r = cli({"insert", "x", path("bad.csv")});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[SchemaMismatch]", 0), 0u) << r.err;
}

TEST_F(CliTest, ErrorsAndUsage) {
  auto r = cli({});
  EXPECT_EQ(r.rc, 2);
  EXPECT_EQ(r.err.rfind("error[Usage]", 0), 0u) << r.err;

  r = cli({"frobnicate"});
  EXPECT_EQ(r.rc, 2);

  r = cli({"train", "g", "--table", "missing"});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[UnknownRelation]", 0), 0u) << r.err;

  r = cli({"load", "t", path("nope.csv")});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[", 0), 0u);

  write("broken.sql", "select a from t where (a = 1\n");
  r = cli({"run", path("broken.sql")});
  EXPECT_EQ(r.rc, 1);
  EXPECT_EQ(r.err.rfind("error[SyntaxError]", 0), 0u) << r.err;
}

TEST_F(CliTest, HelpExitsZero) {
  auto r = cli({"--help"});
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("train"), std::string::npos);
}
