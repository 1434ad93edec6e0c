#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "fixture.h"
#include "ncsched/errors.h"
#include "ncsched/io.h"

namespace ncsched {
namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "network": {"capacity": 1, "max_burst": 1},
  "plants": [
    {"id": 2, "A": {"rows": 1, "cols": 1, "data": [2.0]},
     "B": {"rows": 1, "cols": 1, "data": [1.0]},
     "K": {"rows": 1, "cols": 1, "data": ["-1.5"]}},
    {"id": 1, "A": {"rows": 1, "cols": 1, "data": [1.5]},
     "B": {"rows": 1, "cols": 1, "data": [1.0]},
     "lqr": {"Q": {"rows": 1, "cols": 1, "data": [1]},
             "R": {"rows": 1, "cols": 1, "data": [1]}}}
  ]
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(Config, MinimalWithDefaults) {
  const RunConfig c = parse_config(kMinimal);
  ASSERT_EQ(c.plants.size(), 2u);
  EXPECT_EQ(c.plants[0].id, 1);
  EXPECT_EQ(c.plants[1].K(0, 0), -1.5);
  // Scalar DARE: p = 1 + 2.25 p / (1 + p), so p^2 - 2.25 p - 1 = 0 and
  // K = -1.5 p / (1 + p).
  const double p = (2.25 + std::sqrt(2.25 * 2.25 + 4.0)) / 2.0;
  EXPECT_NEAR(c.plants[0].K(0, 0), -1.5 * p / (1.0 + p), 1e-10);
  EXPECT_EQ(c.network.num_plants, 2);
  EXPECT_EQ(c.grid, kDefaultGrid);
  EXPECT_EQ(c.mode, SynthesisMode::kAutoPartition);
  EXPECT_EQ(c.simulation.runs, 100);
  EXPECT_FALSE(c.reference);
}

TEST(Config, BundledExample) {
  const RunConfig& c = testing::example_config();
  EXPECT_EQ(c.plants.size(), 5u);
  EXPECT_EQ(c.network.capacity, 2);
  EXPECT_EQ(c.network.max_burst, 2);
  EXPECT_EQ(c.mode, SynthesisMode::kGivenPartition);
  EXPECT_EQ(to_string(*c.partition), "{1,4,5} {2,3}");
  ASSERT_TRUE(c.reference);
  EXPECT_EQ(c.reference->plants[1].lambda_u, 1.2207);
  EXPECT_EQ(c.simulation.seed, 20190101u);
}

TEST(Config, Rejections) {
  const std::string base = kMinimal;
  const std::pair<std::string, std::string> edits[] = {
      {"\"schema_version\": 1", "\"schema_version\": 2"},
      {"\"schema_version\": 1", "\"schema_version\": 1, \"extra\": 0"},
      {"\"max_burst\": 1", "\"max_burst\": 0"},
      {"\"capacity\": 1", "\"capacity\": 2"},
      {"\"data\": [2.0]", "\"data\": [2.0, 1.0]"},
      {"\"data\": [\"-1.5\"]", "\"data\": [\"-1.5x\"]"},
      {"\"id\": 2", "\"id\": 3"},
      {"\"lqr\"", "\"K\": {\"rows\": 1, \"cols\": 1, \"data\": [0]}, \"lqr\""},
      {"\"network\"", "\"synthesis\": {\"mode\": \"given-partition\"}, \"network\""},
      {"\"network\"", "\"simulation\": {\"loss_prob\": 1.5}, \"network\""},
      {"\"network\"", "\"synthesis\": {\"partition\": [[1], [2]]}, \"network\""},
  };
  for (const auto& [from, to] : edits) {
    EXPECT_THROW(parse_config(with(base, from, to)), ValidationError) << to;
  }
  EXPECT_THROW(parse_config("{"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ValidationError);
}

TEST(FormatExact, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::numeric_limits<double>::denorm_min()}) {
    EXPECT_EQ(std::strtod(format_exact(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_exact(0.5), "0.5");
  EXPECT_EQ(format_fixed(1.0 / 3.0, 4), "0.3333");
}

TEST(CertificatesJson, LosslessRoundTrip) {
  const auto& config = testing::example_config();
  std::vector<StabilityCertificate> certs;
  for (const auto& o : certify_all(config.plants, 200, SelectionRule::kMaxBudget, 2)) {
    certs.push_back(*o.certificate);
  }
  const std::string text = certificates_json(certs, 2);
  const auto back = parse_certificates_json(text);
  ASSERT_EQ(back.size(), certs.size());
  for (std::size_t i = 0; i < certs.size(); ++i) {
    EXPECT_EQ(back[i].plant_id, certs[i].plant_id);
    EXPECT_EQ(back[i].stable.P, certs[i].stable.P);
    EXPECT_EQ(back[i].unstable.P, certs[i].unstable.P);
    EXPECT_EQ(back[i].stable.lambda, certs[i].stable.lambda);
    EXPECT_EQ(back[i].unstable.lambda, certs[i].unstable.lambda);
    EXPECT_EQ(back[i].mu_su, certs[i].mu_su);
    EXPECT_EQ(back[i].mu_us, certs[i].mu_us);
    EXPECT_EQ(back[i].budget, certs[i].budget);
  }
  EXPECT_EQ(certificates_json(back, 2), text);
  const std::string csv = certificates_csv(certs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "plant,lambda_s,lambda_u,mu_su,mu_us,budget");
  EXPECT_THROW(parse_certificates_json("[]"), ValidationError);
}

TEST(CycleCsv, RoundTrip) {
  const Cycle c{{ActiveSet::of({1, 2}), ActiveSet::of({2, 4}), ActiveSet::of({3, 4}),
                 ActiveSet::of({3, 5})},
                {2, 1, 1, 2}};
  const std::string text = cycle_csv(c);
  EXPECT_EQ(text,
            "vertex,active_set,t_factor\n0,\"{1,2}\",2\n1,\"{2,4}\",1\n2,\"{3,4}\",1\n3,"
            "\"{3,5}\",2\n");
  const Cycle back = parse_cycle_csv(text);
  EXPECT_EQ(back.vertices, c.vertices);
  EXPECT_EQ(back.t_factors, c.t_factors);
  EXPECT_THROW(parse_cycle_csv("vertex,active_set,t_factor\n0,\"{1}\",0\n1,\"{2}\",1\n"),
               ValidationError);
  EXPECT_THROW(parse_cycle_csv("v,a,t\n"), ValidationError);
}

TEST(ScheduleText, RoundTripAndCsv) {
  const Cycle c{{ActiveSet::of({1, 2}), ActiveSet::of({2, 4}), ActiveSet::of({3, 4}),
                 ActiveSet::of({3, 5})},
                {2, 1, 1, 2}};
  const ScheduleLogic s(c, 2);
  const std::string text = schedule_period_text(s);
  const ScheduleLogic back = parse_schedule_period_text(text);
  EXPECT_EQ(back.period(), 18);
  EXPECT_EQ(back.cycle().vertices, c.vertices);
  EXPECT_EQ(schedule_period_text(back), text);
  const std::string csv = schedule_csv(s, 20);
  EXPECT_NE(csv.find("\n7,\"{2,4}\",1\n"), std::string::npos);
  EXPECT_NE(csv.find("\n19,\"{1,2}\",0\n"), std::string::npos);
  EXPECT_THROW(parse_schedule_period_text(with(text, "period 18", "period 17")),
               ValidationError);
}

TEST(LossesCsv, RoundTripAndRejection) {
  const LossSignal s = gen_random_admissible(2, 30, 2, 0.4, 8);
  const LossSignal back = parse_losses_csv(losses_csv(s));
  EXPECT_EQ(back.channels, 2);
  EXPECT_EQ(back.horizon, 30);
  EXPECT_EQ(back.kappa, s.kappa);
  EXPECT_THROW(parse_losses_csv("t,channel,kappa\n0,1,2\n"), ValidationError);
  EXPECT_THROW(parse_losses_csv("t,channel,kappa\n0,0,1\n"), ValidationError);
}

TEST(TrajectoryCsv, Layout) {
  PlantModel p{1, testing::mat(2, 2, {1.2, 0, 0, 1.1}), testing::mat(2, 1, {1, 0}),
               testing::mat(1, 2, {-1, 0})};
  const std::vector<PlantModel> plants{p, {2, p.A, p.B, p.K}};
  const ScheduleLogic s({{ActiveSet::of({1}), ActiveSet::of({2})}, {1, 1}}, 1);
  const std::vector<Vector> x0{Vector::Ones(2), Vector::Ones(2)};
  const Trajectory traj = simulate(plants, s, no_losses(1, 3), x0, 3);
  const std::string csv = trajectory_csv(traj);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,plant,x1,x2,norm2,mode,loss_flag");
  EXPECT_NE(csv.find("\n0,1,1,1,2,stable,0\n"), std::string::npos);
  EXPECT_NE(csv.find("\n0,2,1,1,2,unstable,0\n"), std::string::npos);
}

TEST(Files, WriteAndRead) {
  const auto dir = std::filesystem::temp_directory_path() / "ncsched_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file(dir / "a.txt", "x\r\ny\n");
  EXPECT_EQ(read_file(dir / "a.txt"), "x\r\ny\n");
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace ncsched
