#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "fixture.h"
#include "ncsched/pipeline.h"

namespace ncsched {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("ncsched_pipeline_" +
             std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    config_ = testing::example_config();
    config_.simulation.runs = 4;
    config_.simulation.horizon = 1000;
  }
  void TearDown() override { fs::remove_all(root_); }

  CommandOptions options(const std::string& sub) const {
    CommandOptions o;
    o.out_dir = root_ / sub;
    return o;
  }

  std::string file(const std::string& sub, const std::string& name) const {
    return read_file(root_ / sub / name);
  }

  fs::path root_;
  RunConfig config_;
};

TEST_F(PipelineTest, CertifyWritesAllFormats) {
  std::ostringstream out;
  ASSERT_EQ(cmd_certify(config_, options("a"), out), 0) << out.str();
  for (const char* name : {"certificates.json", "certificates.csv", "certificates.txt"}) {
    EXPECT_TRUE(fs::exists(root_ / "a" / name)) << name;
  }
  EXPECT_EQ(parse_certificates_json(file("a", "certificates.json")).size(), 5u);
}

TEST_F(PipelineTest, RerunsAreByteIdentical) {
  std::ostringstream out;
  ASSERT_EQ(cmd_synthesize(config_, options("a"), out), 0) << out.str();
  ASSERT_EQ(cmd_simulate(config_, options("a"), out), 0) << out.str();
  ASSERT_EQ(cmd_synthesize(config_, options("b"), out), 0);
  ASSERT_EQ(cmd_simulate(config_, options("b"), out), 0);
  for (const char* name : {"synthesis_report.txt", "cycle.csv", "schedule_period.txt",
                           "schedule.csv", "trajectory.csv", "losses.csv", "runs.csv"}) {
    EXPECT_EQ(file("a", name), file("b", name)) << name;
  }
}

TEST_F(PipelineTest, SerialAndParallelAgree) {
  std::ostringstream out;
  CommandOptions serial = options("s");
  serial.exec = Execution::kSerial;
  ASSERT_EQ(cmd_simulate(config_, serial, out), 0) << out.str();
  ASSERT_EQ(cmd_simulate(config_, options("p"), out), 0) << out.str();
  EXPECT_EQ(file("s", "runs.csv"), file("p", "runs.csv"));
  EXPECT_EQ(file("s", "trajectory.csv"), file("p", "trajectory.csv"));
}

TEST_F(PipelineTest, ReusesPersistedIntermediates) {
  std::ostringstream out;
  ASSERT_EQ(cmd_certify(config_, options("a"), out), 0);
  ASSERT_EQ(cmd_synthesize(config_, options("a"), out), 0);
  ASSERT_EQ(cmd_simulate(config_, options("a"), out), 0);

  CommandOptions from_certs = options("b");
  from_certs.certificates_path = root_ / "a" / "certificates.json";
  ASSERT_EQ(cmd_synthesize(config_, from_certs, out), 0) << out.str();
  EXPECT_EQ(file("a", "cycle.csv"), file("b", "cycle.csv"));

  CommandOptions from_cycle = options("c");
  from_cycle.certificates_path = root_ / "a" / "certificates.json";
  from_cycle.cycle_path = root_ / "a" / "cycle.csv";
  ASSERT_EQ(cmd_schedule(config_, from_cycle, out), 0) << out.str();
  EXPECT_EQ(file("a", "schedule_period.txt"), file("c", "schedule_period.txt"));

  CommandOptions from_schedule = options("d");
  from_schedule.certificates_path = root_ / "a" / "certificates.json";
  from_schedule.schedule_path = root_ / "a" / "schedule_period.txt";
  ASSERT_EQ(cmd_simulate(config_, from_schedule, out), 0) << out.str();
  EXPECT_EQ(file("a", "trajectory.csv"), file("d", "trajectory.csv"));
  EXPECT_EQ(file("a", "runs.csv"), file("d", "runs.csv"));
}

TEST_F(PipelineTest, LossFileReplay) {
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(config_, options("a"), out), 0);
  config_.simulation.loss_file = (root_ / "a" / "losses.csv").string();
  config_.simulation.seed = 99;
  ASSERT_EQ(cmd_simulate(config_, options("b"), out), 0) << out.str();
  EXPECT_EQ(file("a", "losses.csv"), file("b", "losses.csv"));
}

TEST_F(PipelineTest, OverridesChangeTheRun) {
  std::ostringstream out;
  CommandOptions o = options("a");
  o.seed = 5;
  o.horizon = 300;
  cmd_simulate(config_, o, out);
  EXPECT_NE(out.str().find("horizon 300, seed 5"), std::string::npos);
}

TEST_F(PipelineTest, CheckReportsConditions) {
  std::ostringstream out;
  ASSERT_EQ(cmd_check(config_, options("a"), out), 0) << out.str();
  EXPECT_NE(out.str().find("any-capacity condition: fails"), std::string::npos);
}

TEST_F(PipelineTest, ViolatedAssumptionsStopUnlessOverridden) {
  config_.plants[0].K = Matrix::Zero(config_.plants[0].K.rows(), config_.plants[0].K.cols());
  std::ostringstream out;
  EXPECT_EQ(cmd_certify(config_, options("a"), out), 2);
  EXPECT_NE(out.str().find("validation failed"), std::string::npos);
  EXPECT_FALSE(fs::exists(root_ / "a" / "certificates.json"));
  CommandOptions o = options("b");
  o.override_validation = true;
  EXPECT_EQ(cmd_certify(config_, o, out), 1);
}

TEST_F(PipelineTest, InfeasibleBurstReturnsOne) {
  config_.network.max_burst = 40;
  config_.mode = SynthesisMode::kAutoPartition;
  std::ostringstream out;
  EXPECT_EQ(cmd_synthesize(config_, options("a"), out), 1) << out.str();
  EXPECT_NE(out.str().find("infeasible"), std::string::npos);
}

TEST_F(PipelineTest, ReproduceExample) {
  std::ostringstream out;
  ASSERT_EQ(cmd_reproduce_example(options("a"), out), 0) << out.str();
  const std::string text = out.str();
  EXPECT_NE(text.find("composed cycle: {1,2}:2 {2,4}:1 {3,4}:1 {3,5}:2"), std::string::npos)
      << text;
  EXPECT_NE(text.find("PASS"), std::string::npos);
}

}  // namespace
}  // namespace ncsched
