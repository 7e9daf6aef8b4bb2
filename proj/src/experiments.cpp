#include "aggr/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

namespace aggr {

namespace {

using nlohmann::json;

// Portable unit draw from the raw engine stream (distribution objects are
// implementation-defined; the outputs must be reproducible byte for byte).
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int draw_categorical(std::mt19937_64& rng, const Distribution& p) {
  const double u = next_unit(rng);
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.dim() - 1;
}

Distribution draw_interior(std::mt19937_64& rng, int dim) {
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w(i) = -std::log(std::max(next_unit(rng), 1e-300));
  w /= w.sum();
  // keep predictions clear of the boundary so log losses stay finite
  w = 0.85 * w + Vec::Constant(dim, 0.15 / dim);
  return Distribution(w);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int best_expert_index(const Vec& cumulative) {
  int best = 0;
  for (int i = 1; i < cumulative.size(); ++i)
    if (cumulative(i) < cumulative(best)) best = i;
  return best;
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "example1") return Scenario::Example1;
  if (s == "synthetic") return Scenario::SyntheticRandom;
  if (s == "odds") return Scenario::OddsDataset;
  throw ConfigError("unknown scenario '" + s + "'");
}

LearnerChoice learner_from_string(const std::string& s) {
  if (s == "AA" || s == "aa") return LearnerChoice::AA;
  if (s == "GAA" || s == "gaa") return LearnerChoice::GAA;
  if (s == "AGAA" || s == "agaa") return LearnerChoice::AGAA;
  if (s == "MetaAAAGAA" || s == "meta") return LearnerChoice::MetaAAAGAA;
  throw ConfigError("unknown learner '" + s + "'");
}

LossKind loss_from_string(const std::string& s) {
  if (s == "brier") return LossKind::Brier;
  if (s == "log") return LossKind::Log;
  throw ConfigError("unknown loss '" + s + "'");
}

EntropyKind entropy_from_string(const std::string& s) {
  if (s == "shannon") return EntropyKind::Shannon;
  if (s == "quadratic") return EntropyKind::Quadratic;
  if (s == "mixture") return EntropyKind::Mixture;
  if (s == "legendre") return EntropyKind::LegendreCounterexample;
  if (s == "scaled-shannon") return EntropyKind::ScaledShannon;
  throw ConfigError("unknown entropy '" + s + "'");
}

// Cumulative per-round CSV; the correction column is present for the
// adaptive learner only.
void write_rounds_csv(const std::string& path, const GameTrace& trace, bool adaptive,
                      int best_theta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const int k = static_cast<int>(trace.cumulative_expert_losses.size());
  out << "t,learner_cumulative_loss";
  for (int i = 0; i < k; ++i) out << ",expert" << (i + 1) << "_cumulative_loss";
  for (int i = 0; i < k; ++i) out << ",regret_vs_expert" << (i + 1);
  if (adaptive) out << ",delta_regret_best";
  out << "\n";

  Vec expert_cum = Vec::Zero(k);
  double learner_cum = 0.0;
  double delta_running = 0.0;
  for (size_t t = 0; t < trace.rounds.size(); ++t) {
    const RoundRecord& rec = trace.rounds[t];
    expert_cum += rec.expert_losses;
    learner_cum += rec.learner_loss;
    out << (t + 1) << "," << format_double(learner_cum);
    for (int i = 0; i < k; ++i) out << "," << format_double(expert_cum(i));
    for (int i = 0; i < k; ++i)
      out << "," << format_double(expert_cum(i) - learner_cum);
    if (adaptive) {
      // Delta R at horizon t sums the first t-1 correction terms.
      if (t >= 1) {
        const Vec& v = trace.correction_history[t - 1];
        delta_running += v(best_theta) - v.dot(trace.q_history[t - 1].weights());
      }
      out << "," << format_double(delta_running);
    }
    out << "\n";
  }
}

}  // namespace

const char* to_string(LearnerChoice c) {
  switch (c) {
    case LearnerChoice::AA: return "AA";
    case LearnerChoice::GAA: return "GAA";
    case LearnerChoice::AGAA: return "AGAA";
    case LearnerChoice::MetaAAAGAA: return "MetaAAAGAA";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("scenario")) cfg.scenario = scenario_from_string(j.at("scenario"));
    if (j.contains("algorithms")) {
      cfg.learners.clear();
      for (const auto& a : j.at("algorithms"))
        cfg.learners.push_back(learner_from_string(a.get<std::string>()));
    }
    if (j.contains("loss")) cfg.loss = loss_from_string(j.at("loss"));
    cfg.outcomes = j.value("outcomes", cfg.outcomes);
    cfg.experts = j.value("experts", cfg.experts);
    if (j.contains("entropy")) cfg.entropy = entropy_from_string(j.at("entropy"));
    cfg.mixture_alpha = j.value("mixture_alpha", cfg.mixture_alpha);
    cfg.scaled_eta = j.value("scaled_eta", cfg.scaled_eta);
    cfg.eta = j.value("eta", cfg.eta);
    cfg.correction_alpha = j.value("correction_alpha", cfg.correction_alpha);
    cfg.seed = j.value("seed", cfg.seed);
    // odds datasets default to their full length; rounds only caps them
    cfg.rounds = j.value("rounds", cfg.scenario == Scenario::OddsDataset
                                       ? std::numeric_limits<int>::max()
                                       : cfg.rounds);
    cfg.grid_resolution = j.value("grid_resolution", cfg.grid_resolution);
    cfg.grid_epsilon = j.value("grid_epsilon", cfg.grid_epsilon);
    cfg.dataset_path = j.value("dataset_path", cfg.dataset_path);
    cfg.column_map_path = j.value("column_map", cfg.column_map_path);
    if (j.contains("bookmakers")) {
      cfg.bookmakers.clear();
      for (const auto& b : j.at("bookmakers")) cfg.bookmakers.push_back(b.get<std::string>());
    }
    cfg.output_path = j.value("output_path", cfg.output_path);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw ConfigError("config: rounds must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("config: eta must be > 0");
  if (learners.empty()) throw ConfigError("config: no learners selected");
  if (output_path.empty()) throw ConfigError("config: output_path is required");
  if (scenario == Scenario::Example1 &&
      (loss != LossKind::Brier || outcomes != 2 || experts != 2))
    throw ConfigError("config: example1 forces the 2-outcome Brier game with 2 experts");
  if (scenario == Scenario::OddsDataset) {
    if (dataset_path.empty()) throw ConfigError("config: odds scenario needs dataset_path");
    if (bookmakers.empty() && column_map_path.empty())
      throw ConfigError("config: odds scenario needs bookmakers or a column map");
    if (outcomes != 3) throw ConfigError("config: odds scenario has 3 outcomes");
  }
  if (grid_resolution < 2) throw ConfigError("config: grid_resolution must be >= 2");
}

LossSpec ExperimentConfig::make_loss() const {
  switch (loss) {
    case LossKind::Brier: return LossSpec::brier(outcomes);
    case LossKind::Log: return LossSpec::log(outcomes);
    case LossKind::Custom: break;
  }
  throw ConfigError("config: custom losses are not constructible from a config file");
}

Entropy ExperimentConfig::make_entropy(int k) const {
  switch (entropy) {
    case EntropyKind::Shannon: return Entropy::shannon(k);
    case EntropyKind::Quadratic: return Entropy::quadratic(k);
    case EntropyKind::Mixture: return Entropy::mixture(k, mixture_alpha);
    case EntropyKind::ScaledShannon: return Entropy::scaled_shannon(k, scaled_eta);
    case EntropyKind::LegendreCounterexample: return Entropy::legendre_counterexample();
  }
  throw ConfigError("config: unknown entropy");
}

std::vector<GameRound> example1_rounds(int total_rounds) {
  if (total_rounds < 1) throw ConfigError("example1: rounds must be >= 1");
  Vec steady(2), early(2), late(2);
  steady << 0.5, 0.5;
  early << 0.25, 0.75;
  late << 0.75, 0.25;
  std::vector<GameRound> rounds;
  rounds.reserve(static_cast<size_t>(total_rounds));
  for (int t = 1; t <= total_rounds; ++t) {
    rounds.push_back(GameRound{
        {Distribution(steady), Distribution(t <= 50 ? early : late)}, 0});
  }
  return rounds;
}

Example1Result run_example1(int total_rounds, double correction_alpha) {
  const auto rounds = example1_rounds(total_rounds);
  const LossSpec loss = LossSpec::brier(2);
  const Entropy shannon = Entropy::shannon(2);
  const double eta = 1.0;
  const AverageLossCorrection protocol(correction_alpha);

  Example1Result result;
  result.agaa = run_game(make_learner(Algorithm::AGAA, shannon, eta, Distribution::uniform(2)),
                         loss, rounds, &protocol);
  result.aa = run_game(make_learner(Algorithm::AA, shannon, eta, Distribution::uniform(2)),
                       loss, rounds);

  result.best_expert = best_expert_index(result.agaa.cumulative_expert_losses);
  result.bound = std::log(2.0) / eta;
  std::vector<Vec> v_head(result.agaa.correction_history.begin(),
                          result.agaa.correction_history.end());
  std::vector<Distribution> q_head(result.agaa.q_history.begin(), result.agaa.q_history.end());
  if (!v_head.empty()) {
    v_head.pop_back();  // Delta R(T) stops at T-1
    q_head.pop_back();
  }
  result.delta_regret_best = delta_regret(v_head, q_head, result.best_expert);
  result.bound_plus_delta = result.bound + result.delta_regret_best;
  const double best_loss = result.agaa.cumulative_expert_losses(result.best_expert);
  result.agaa_regret_vs_best = result.agaa.cumulative_learner_loss - best_loss;
  result.aa_regret_vs_best =
      result.aa.cumulative_learner_loss -
      result.aa.cumulative_expert_losses(best_expert_index(result.aa.cumulative_expert_losses));
  return result;
}

std::vector<GameRound> synthetic_rounds(int experts, int outcomes, int total_rounds,
                                        unsigned long long seed) {
  if (experts < 1 || outcomes < 2) throw ConfigError("synthetic: bad dimensions");
  std::mt19937_64 rng(seed);
  const Distribution truth = draw_interior(rng, outcomes);
  std::vector<GameRound> rounds;
  rounds.reserve(static_cast<size_t>(total_rounds));
  for (int t = 0; t < total_rounds; ++t) {
    GameRound round;
    for (int e = 0; e < experts; ++e)
      round.expert_predictions.push_back(draw_interior(rng, outcomes));
    round.outcome = draw_categorical(rng, truth);
    rounds.push_back(std::move(round));
  }
  return rounds;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  ExperimentResult result;
  std::vector<GameRound> rounds;
  int experts = config.experts;
  int outcomes = config.outcomes;
  switch (config.scenario) {
    case Scenario::Example1:
      rounds = example1_rounds(config.rounds);
      experts = 2;
      outcomes = 2;
      break;
    case Scenario::SyntheticRandom:
      rounds = synthetic_rounds(config.experts, config.outcomes, config.rounds, config.seed);
      break;
    case Scenario::OddsDataset: {
      const ColumnMap map = config.column_map_path.empty()
                                ? ColumnMap::football_data(config.bookmakers)
                                : ColumnMap::from_json_file(config.column_map_path);
      IngestResult ingest = ingest_odds_csv(config.dataset_path, map);
      if (ingest.games.empty()) throw ParseError("odds dataset has no usable rows");
      result.dataset_rows = ingest.total_rows;
      result.dropped_rows = ingest.dropped_rows;
      if (config.rounds < static_cast<int>(ingest.games.size()))
        ingest.games.resize(static_cast<size_t>(config.rounds));
      rounds = std::move(ingest.games);
      experts = static_cast<int>(rounds.front().expert_predictions.size());
      outcomes = 3;
      break;
    }
  }

  const LossSpec loss =
      config.loss == LossKind::Brier ? LossSpec::brier(outcomes) : LossSpec::log(outcomes);
  const Entropy phi = config.make_entropy(experts);
  const SimplexGrid grid{2, config.grid_resolution, config.grid_epsilon};

  const double eta_phi =
      generalized_mixability_constant(loss, phi, grid, grid, Execution::Parallel);
  const double bound =
      eta_phi > 0.0 ? regret_bound(phi, eta_phi, experts, grid).bound : kInf;

  const AverageLossCorrection protocol(config.correction_alpha);
  const Distribution prior = Distribution::uniform(experts);

  auto run_choice = [&](LearnerChoice choice) -> GameTrace {
    switch (choice) {
      case LearnerChoice::AA:
        return run_game(make_learner(Algorithm::AA, phi, config.eta, prior), loss, rounds);
      case LearnerChoice::GAA:
        return run_game(make_learner(Algorithm::GAA, phi, config.eta, prior), loss, rounds);
      case LearnerChoice::AGAA:
        return run_game(make_learner(Algorithm::AGAA, phi, config.eta, prior), loss, rounds,
                        &protocol);
      case LearnerChoice::MetaAAAGAA: {
        const GameTrace aa =
            run_game(make_learner(Algorithm::AA, phi, config.eta, prior), loss, rounds);
        const GameTrace agaa = run_game(
            make_learner(Algorithm::AGAA, phi, config.eta, prior), loss, rounds, &protocol);
        return meta_aa(aa, agaa, loss, config.eta);
      }
    }
    throw ConfigError("unknown learner choice");
  };

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_path, ec);
  if (ec) throw IoError("cannot create output directory " + config.output_path);

  json summary;
  summary["config"] = {
      {"scenario", config.scenario == Scenario::Example1       ? "example1"
                   : config.scenario == Scenario::OddsDataset ? "odds"
                                                              : "synthetic"},
      {"rounds", static_cast<long>(rounds.size())},
      {"experts", experts},
      {"outcomes", outcomes},
      {"seed", config.seed},
  };
  if (config.scenario == Scenario::OddsDataset) {
    summary["dataset"] = {{"rows", result.dataset_rows}, {"dropped", result.dropped_rows}};
  }

  for (LearnerChoice choice : config.learners) {
    AlgorithmSummary s;
    s.learner = choice;
    s.trace = run_choice(choice);
    s.final_learner_loss = s.trace.cumulative_learner_loss;
    s.final_expert_losses = s.trace.cumulative_expert_losses;
    const int best = best_expert_index(s.trace.cumulative_expert_losses);
    s.regret_vs_best = s.final_learner_loss - s.trace.cumulative_expert_losses(best);
    s.bound = bound;
    s.eta = config.eta;
    s.eta_phi = eta_phi;
    if (choice == LearnerChoice::AGAA && !s.trace.correction_history.empty()) {
      std::vector<Vec> v_head(s.trace.correction_history.begin(),
                              s.trace.correction_history.end() - 1);
      std::vector<Distribution> q_head(s.trace.q_history.begin(),
                                       s.trace.q_history.end() - 1);
      s.delta_regret = delta_regret(v_head, q_head, best);
    }

    const std::string name = to_string(choice);
    write_rounds_csv((fs::path(config.output_path) / (name + "_rounds.csv")).string(),
                     s.trace, choice == LearnerChoice::AGAA, best);

    json js;
    js["final_learner_loss"] = s.final_learner_loss;
    js["final_expert_losses"] = std::vector<double>(
        s.final_expert_losses.data(),
        s.final_expert_losses.data() + s.final_expert_losses.size());
    js["regret_vs_best"] = s.regret_vs_best;
    js["bound"] = std::isinf(s.bound) ? json() : json(s.bound);
    js["delta_regret"] = s.delta_regret;
    js["eta"] = s.eta;
    js["eta_phi"] = s.eta_phi;
    summary["algorithms"][name] = js;

    result.summaries.push_back(std::move(s));
  }

  std::ofstream out(fs::path(config.output_path) / "summary.json", std::ios::binary);
  if (!out) throw IoError("cannot write summary.json");
  out << summary.dump(2) << "\n";
  return result;
}

}  // namespace aggr
