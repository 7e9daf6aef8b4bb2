#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aggr/experiments.hpp"

using namespace aggr;

namespace {
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("aggr_exp_" + tag);
  fs::remove_all(p);
  return p;
}
}  // namespace

TEST_CASE("example1 rounds follow the scripted experts") {
  const auto rounds = example1_rounds(60);
  REQUIRE(rounds.size() == 60);
  for (size_t t = 0; t < rounds.size(); ++t) {
    CHECK(rounds[t].outcome == 0);
    CHECK(rounds[t].expert_predictions[0][0] == 0.5);
    CHECK(rounds[t].expert_predictions[1][0] == (t < 50 ? 0.25 : 0.75));
  }
}

TEST_CASE("example1 summary at the canonical horizon") {
  const Example1Result r = run_example1(150);
  CHECK(r.best_expert == 1);
  CHECK(r.bound == doctest::Approx(std::log(2.0)));
  CHECK(std::abs(r.bound_plus_delta - (-5.0)) <= 0.5);
  CHECK(r.agaa_regret_vs_best < 0.0);  // the learner beats the best expert
  CHECK(std::abs(r.aa_regret_vs_best - std::log(2.0)) <= 0.05);
}

TEST_CASE("example1 first round matches across the three learners") {
  const Example1Result r = run_example1(1);
  // no correction has been applied yet, so AGAA and AA coincide
  CHECK((r.agaa.rounds[0].learner_prediction.weights() -
         r.aa.rounds[0].learner_prediction.weights())
            .cwiseAbs()
            .maxCoeff() <= 1e-9);
}

TEST_CASE("synthetic rounds are seed deterministic") {
  const auto a = synthetic_rounds(3, 2, 25, 42);
  const auto b = synthetic_rounds(3, 2, 25, 42);
  const auto c = synthetic_rounds(3, 2, 25, 43);
  REQUIRE(a.size() == b.size());
  bool all_equal = true;
  bool differs_from_c = false;
  for (size_t t = 0; t < a.size(); ++t) {
    all_equal = all_equal && a[t].outcome == b[t].outcome;
    differs_from_c = differs_from_c || a[t].outcome != c[t].outcome;
    for (int e = 0; e < 3; ++e) {
      all_equal = all_equal &&
                  a[t].expert_predictions[e].weights() == b[t].expert_predictions[e].weights();
      differs_from_c = differs_from_c ||
                       a[t].expert_predictions[e].weights() != c[t].expert_predictions[e].weights();
    }
  }
  CHECK(all_equal);
  CHECK(differs_from_c);
}

TEST_CASE("experiments write byte-identical outputs for equal configs") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::SyntheticRandom;
  cfg.learners = {LearnerChoice::AA, LearnerChoice::AGAA};
  cfg.loss = LossKind::Brier;
  cfg.outcomes = 2;
  cfg.experts = 3;
  cfg.eta = 1.0;
  cfg.seed = 7;
  cfg.rounds = 100;
  cfg.grid_resolution = 201;

  const fs::path out1 = temp_dir("det1"), out2 = temp_dir("det2");
  cfg.output_path = out1.string();
  run_experiment(cfg);
  cfg.output_path = out2.string();
  run_experiment(cfg);

  for (const std::string name : {"AA_rounds.csv", "AGAA_rounds.csv", "summary.json"}) {
    const std::string first = slurp(out1 / name);
    CHECK(!first.empty());
    CHECK(first == slurp(out2 / name));
  }
}

TEST_CASE("per-round csv cumulative columns are consistent") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::SyntheticRandom;
  cfg.learners = {LearnerChoice::GAA};
  cfg.experts = 2;
  cfg.rounds = 50;
  cfg.seed = 11;
  cfg.grid_resolution = 201;
  const fs::path out = temp_dir("csv");
  cfg.output_path = out.string();
  const ExperimentResult result = run_experiment(cfg);

  std::ifstream in(out / "GAA_rounds.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("t,learner_cumulative_loss,expert1", 0) == 0);
  double prev_learner = 0.0, prev_e1 = 0.0, prev_e2 = 0.0;
  double last_learner = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    REQUIRE(cells.size() == 5);  // learner, 2 experts, 2 regrets
    CHECK(cells[0] >= prev_learner - 1e-12);
    CHECK(cells[1] >= prev_e1 - 1e-12);
    CHECK(cells[2] >= prev_e2 - 1e-12);
    CHECK(cells[3] == doctest::Approx(cells[1] - cells[0]).epsilon(1e-9));
    prev_learner = cells[0];
    prev_e1 = cells[1];
    prev_e2 = cells[2];
    last_learner = cells[0];
    ++rows;
  }
  CHECK(rows == 50);
  CHECK(last_learner ==
        doctest::Approx(result.summaries[0].final_learner_loss).epsilon(1e-10));
}

TEST_CASE("summary json carries the contract fields") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::Example1;
  cfg.learners = {LearnerChoice::AA, LearnerChoice::AGAA, LearnerChoice::MetaAAAGAA};
  cfg.rounds = 150;
  cfg.grid_resolution = 201;
  const fs::path out = temp_dir("summary");
  cfg.output_path = out.string();
  const ExperimentResult result = run_experiment(cfg);

  const std::string text = slurp(out / "summary.json");
  for (const std::string field :
       {"final_learner_loss", "final_expert_losses", "regret_vs_best", "bound",
        "delta_regret", "eta", "eta_phi"})
    CHECK(text.find(field) != std::string::npos);

  // example1: AGAA bound + delta at the horizon is the headline number
  double agaa_regret = 0.0, agaa_bound_delta = 0.0, meta_loss = 0.0;
  double aa_loss = 0.0, agaa_loss = 0.0;
  for (const AlgorithmSummary& s : result.summaries) {
    if (s.learner == LearnerChoice::AGAA) {
      agaa_regret = s.regret_vs_best;
      agaa_bound_delta = s.bound + s.delta_regret;
      agaa_loss = s.final_learner_loss;
    }
    if (s.learner == LearnerChoice::AA) aa_loss = s.final_learner_loss;
    if (s.learner == LearnerChoice::MetaAAAGAA) meta_loss = s.final_learner_loss;
  }
  CHECK(std::abs(agaa_bound_delta - (-5.0)) <= 0.5);
  CHECK(agaa_regret < 0.0);
  CHECK(meta_loss <= std::min(aa_loss, agaa_loss) + std::log(2.0) + 1e-6);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.output_path = "";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg.output_path = "out";
  cfg.scenario = Scenario::Example1;
  cfg.loss = LossKind::Log;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg.loss = LossKind::Brier;
  cfg.outcomes = 2;
  cfg.experts = 2;
  CHECK_NOTHROW(cfg.validate());

  cfg.scenario = Scenario::OddsDataset;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no dataset path
}

TEST_CASE("config json round trip") {
  const fs::path p = fs::temp_directory_path() / "aggr_cfg.json";
  {
    std::ofstream out(p);
    out << R"({"scenario":"synthetic","algorithms":["AA","GAA"],"loss":"brier",)"
        << R"("outcomes":2,"experts":4,"entropy":"mixture","mixture_alpha":0.25,)"
        << R"("eta":0.5,"seed":9,"rounds":33,"output_path":"zzz"})";
  }
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(p.string());
  CHECK(cfg.scenario == Scenario::SyntheticRandom);
  REQUIRE(cfg.learners.size() == 2);
  CHECK(cfg.learners[1] == LearnerChoice::GAA);
  CHECK(cfg.experts == 4);
  CHECK(cfg.entropy == EntropyKind::Mixture);
  CHECK(cfg.mixture_alpha == 0.25);
  CHECK(cfg.eta == 0.5);
  CHECK(cfg.rounds == 33);
  CHECK(cfg.output_path == "zzz");
}

TEST_CASE("odds experiment runs end to end on the fixture") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::OddsDataset;
  cfg.learners = {LearnerChoice::AA, LearnerChoice::AGAA, LearnerChoice::MetaAAAGAA};
  cfg.loss = LossKind::Brier;
  cfg.outcomes = 3;
  cfg.dataset_path = std::string(AGGR_DATA_DIR) + "/fixtures/odds_fixture.csv";
  cfg.bookmakers = {"B365", "WH"};
  cfg.correction_alpha = 0.5;
  cfg.rounds = 1000;
  cfg.grid_resolution = 201;
  const fs::path out = temp_dir("odds");
  cfg.output_path = out.string();

  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.dataset_rows == 10);
  CHECK(result.dropped_rows == 0);
  for (const AlgorithmSummary& s : result.summaries) {
    CHECK(s.trace.rounds.size() == 10);
    CHECK(s.final_expert_losses.size() == 2);
  }
  CHECK(fs::exists(out / "MetaAAAGAA_rounds.csv"));
}
