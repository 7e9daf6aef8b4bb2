#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "aggr/experiments.hpp"

namespace {

using namespace aggr;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitCertification = 4;

struct CommonOpts {
  unsigned long long seed = 0;
  std::string out;
  int grid_resolution = 1001;
  double epsilon = 1e-4;
  std::string config_path;
};

Entropy build_entropy(const std::string& kind, int k, double alpha, double scaled_eta) {
  if (kind == "shannon") return Entropy::shannon(k);
  if (kind == "quadratic") return Entropy::quadratic(k);
  if (kind == "mixture") return Entropy::mixture(k, alpha);
  if (kind == "legendre") return Entropy::legendre_counterexample();
  if (kind == "scaled-shannon") return Entropy::scaled_shannon(k, scaled_eta);
  throw ConfigError("unknown entropy '" + kind + "'");
}

LossSpec build_loss(const std::string& kind, int outcomes) {
  if (kind == "brier") return LossSpec::brier(outcomes);
  if (kind == "log") return LossSpec::log(outcomes);
  throw ConfigError("unknown loss '" + kind + "'");
}

int cmd_example1(int rounds, double alpha, const CommonOpts& common) {
  const Example1Result r = run_example1(rounds, alpha);
  std::printf("rounds                : %d\n", rounds);
  std::printf("best expert           : %d\n", r.best_expert + 1);
  std::printf("bound R               : %.6f\n", r.bound);
  std::printf("delta regret (best)   : %.6f\n", r.delta_regret_best);
  std::printf("bound + delta regret  : %.6f\n", r.bound_plus_delta);
  std::printf("AGAA regret vs best   : %.6f\n", r.agaa_regret_vs_best);
  std::printf("AA   regret vs best   : %.6f\n", r.aa_regret_vs_best);
  if (!common.out.empty()) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Example1;
    cfg.learners = {LearnerChoice::AA, LearnerChoice::GAA, LearnerChoice::AGAA,
                    LearnerChoice::MetaAAAGAA};
    cfg.rounds = rounds;
    cfg.correction_alpha = alpha;
    cfg.output_path = common.out;
    cfg.grid_resolution = common.grid_resolution;
    cfg.grid_epsilon = common.epsilon;
    run_experiment(cfg);
    std::printf("outputs written to    : %s\n", common.out.c_str());
  }
  return kExitOk;
}

int cmd_certify(const std::string& loss_kind, int outcomes, const std::string& entropy_kind,
                double alpha, double scaled_eta, int experts, double eta,
                const CommonOpts& common) {
  const LossSpec loss = build_loss(loss_kind, outcomes);
  Entropy phi = build_entropy(entropy_kind, experts, alpha, scaled_eta);
  if (eta != 1.0) phi = phi.scaled(1.0 / eta);
  const SimplexGrid grid{2, common.grid_resolution, common.epsilon};
  const MixabilityCertificate cert = certify_phi_mixable(loss, phi, grid, grid);
  std::printf("loss                  : %s (n=%d)\n", loss_kind.c_str(), outcomes);
  std::printf("entropy               : %s (k=%d, eta=%g)\n", entropy_kind.c_str(), experts, eta);
  std::printf("eta_lower             : %.9f\n", cert.eta_lower);
  std::printf("eta_phi               : %.9f\n", cert.eta_phi);
  std::printf("convexity margin      : %.9g\n", cert.convexity_margin);
  std::printf("refined margin        : %.9g\n", cert.refined_margin);
  std::printf("verdict               : %s\n", to_string(cert.verdict));
  return cert.verdict == Verdict::Inconclusive ? kExitCertification : kExitOk;
}

int cmd_constants(const std::string& loss_kind, int outcomes, const std::string& entropy_kind,
                  double alpha, double scaled_eta, int experts, const CommonOpts& common) {
  const LossSpec loss = build_loss(loss_kind, outcomes);
  const Entropy phi = build_entropy(entropy_kind, experts, alpha, scaled_eta);
  const SimplexGrid grid{2, common.grid_resolution, common.epsilon};
  const double eta_lower = mixability_constant(loss, grid);
  const double eta_phi = generalized_mixability_constant(loss, phi, grid, grid);
  std::printf("eta_lower             : %.9f\n", eta_lower);
  std::printf("eta_phi               : %.9f\n", eta_phi);
  if (eta_phi > 0.0) {
    const RegretBound rb = regret_bound(phi, eta_phi, experts, grid);
    std::printf("regret bound          : %.9f\n", rb.bound);
  }
  return kExitOk;
}

int run_configured(ExperimentConfig cfg, const CommonOpts& common) {
  if (cfg.output_path.empty()) cfg.output_path = common.out;
  const ExperimentResult result = run_experiment(cfg);
  for (const AlgorithmSummary& s : result.summaries) {
    std::printf("%-10s final loss %.6f  regret vs best %.6f", to_string(s.learner),
                s.final_learner_loss, s.regret_vs_best);
    if (s.learner == LearnerChoice::AGAA)
      std::printf("  bound+delta %.6f", s.bound + s.delta_regret);
    std::printf("\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expert-advice aggregation: learners, mixability constants, experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may appear after the subcommand

  CommonOpts common;
  app.add_option("--seed", common.seed, "RNG seed for synthetic scenarios");
  app.add_option("--out", common.out, "output directory");
  app.add_option("--grid-resolution", common.grid_resolution, "interior grid resolution");
  app.add_option("--epsilon", common.epsilon, "interior grid margin");
  app.add_option("--config", common.config_path, "JSON experiment config");

  auto* ex1 = app.add_subcommand("example1", "two-expert Brier game with an outcome that never moves");
  int ex1_rounds = 150;
  double ex1_alpha = 0.125;
  ex1->add_option("--rounds", ex1_rounds, "number of rounds");
  ex1->add_option("--alpha", ex1_alpha, "correction coefficient");

  auto* sim = app.add_subcommand("simulate", "seeded synthetic random games");
  std::vector<std::string> sim_algos = {"AA"};
  std::string sim_loss = "brier", sim_entropy = "shannon";
  int sim_outcomes = 2, sim_experts = 2, sim_rounds = 100;
  double sim_eta = 1.0, sim_mixture_alpha = 0.5, sim_scaled_eta = 1.0, sim_corr = 0.125;
  sim->add_option("--algo", sim_algos, "learners: aa gaa agaa meta");
  sim->add_option("--loss", sim_loss, "brier or log");
  sim->add_option("--outcomes", sim_outcomes, "outcome count");
  sim->add_option("--experts", sim_experts, "expert count");
  sim->add_option("--entropy", sim_entropy, "shannon|quadratic|mixture|legendre|scaled-shannon");
  sim->add_option("--mixture-alpha", sim_mixture_alpha, "mixture weight on Shannon");
  sim->add_option("--scaled-eta", sim_scaled_eta, "ScaledShannon divisor");
  sim->add_option("--eta", sim_eta, "learning rate");
  sim->add_option("--rounds", sim_rounds, "number of rounds");
  sim->add_option("--correction-alpha", sim_corr, "AGAA correction coefficient");

  auto* exp = app.add_subcommand("experiment", "run a configured experiment (JSON or odds CSV)");
  std::string exp_data, exp_colmap;
  std::vector<std::string> exp_books;
  std::vector<std::string> exp_algos = {"AA", "AGAA"};
  int exp_rounds = 1000000;
  double exp_eta = 1.0, exp_corr = 0.5;
  exp->add_option("--data", exp_data, "odds CSV path");
  exp->add_option("--column-map", exp_colmap, "column map JSON");
  exp->add_option("--bookmakers", exp_books, "bookmaker column prefixes");
  exp->add_option("--algo", exp_algos, "learners: aa gaa agaa meta");
  exp->add_option("--rounds", exp_rounds, "cap on the number of rounds");
  exp->add_option("--eta", exp_eta, "learning rate");
  exp->add_option("--correction-alpha", exp_corr, "AGAA correction coefficient");

  auto* cert = app.add_subcommand("certify", "convexity certificate for a (loss, entropy) pair");
  std::string cert_loss = "brier", cert_entropy = "shannon";
  int cert_outcomes = 2, cert_experts = 2;
  double cert_alpha = 0.5, cert_scaled_eta = 1.0, cert_eta = 1.0;
  cert->add_option("--loss", cert_loss, "brier or log");
  cert->add_option("--outcomes", cert_outcomes, "outcome count");
  cert->add_option("--entropy", cert_entropy, "entropy kind");
  cert->add_option("--mixture-alpha", cert_alpha, "mixture weight on Shannon");
  cert->add_option("--scaled-eta", cert_scaled_eta, "ScaledShannon divisor");
  cert->add_option("--experts", cert_experts, "expert count");
  cert->add_option("--eta", cert_eta, "certify (eta, phi)-mixability");

  auto* cons = app.add_subcommand("constants", "mixability constants for a (loss, entropy) pair");
  std::string cons_loss = "brier", cons_entropy = "shannon";
  int cons_outcomes = 2, cons_experts = 2;
  double cons_alpha = 0.5, cons_scaled_eta = 1.0;
  cons->add_option("--loss", cons_loss, "brier or log");
  cons->add_option("--outcomes", cons_outcomes, "outcome count");
  cons->add_option("--entropy", cons_entropy, "entropy kind");
  cons->add_option("--mixture-alpha", cons_alpha, "mixture weight on Shannon");
  cons->add_option("--scaled-eta", cons_scaled_eta, "ScaledShannon divisor");
  cons->add_option("--experts", cons_experts, "expert count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!common.config_path.empty()) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(common.config_path);
      return run_configured(std::move(cfg), common);
    }
    if (ex1->parsed()) return cmd_example1(ex1_rounds, ex1_alpha, common);
    if (cert->parsed())
      return cmd_certify(cert_loss, cert_outcomes, cert_entropy, cert_alpha,
                         cert_scaled_eta, cert_experts, cert_eta, common);
    if (cons->parsed())
      return cmd_constants(cons_loss, cons_outcomes, cons_entropy, cons_alpha,
                           cons_scaled_eta, cons_experts, common);
    if (sim->parsed()) {
      ExperimentConfig cfg;
      cfg.scenario = Scenario::SyntheticRandom;
      cfg.learners.clear();
      for (const std::string& a : sim_algos)
        cfg.learners.push_back(a == "aa" || a == "AA"           ? LearnerChoice::AA
                               : a == "gaa" || a == "GAA"       ? LearnerChoice::GAA
                               : a == "agaa" || a == "AGAA"     ? LearnerChoice::AGAA
                               : a == "meta" || a == "MetaAAAGAA"
                                   ? LearnerChoice::MetaAAAGAA
                                   : throw ConfigError("unknown learner " + a));
      cfg.loss = sim_loss == "log" ? LossKind::Log : LossKind::Brier;
      cfg.outcomes = sim_outcomes;
      cfg.experts = sim_experts;
      cfg.entropy = sim_entropy == "quadratic"        ? EntropyKind::Quadratic
                    : sim_entropy == "mixture"        ? EntropyKind::Mixture
                    : sim_entropy == "legendre"       ? EntropyKind::LegendreCounterexample
                    : sim_entropy == "scaled-shannon" ? EntropyKind::ScaledShannon
                                                      : EntropyKind::Shannon;
      cfg.mixture_alpha = sim_mixture_alpha;
      cfg.scaled_eta = sim_scaled_eta;
      cfg.eta = sim_eta;
      cfg.rounds = sim_rounds;
      cfg.correction_alpha = sim_corr;
      cfg.seed = common.seed;
      cfg.grid_resolution = common.grid_resolution;
      cfg.grid_epsilon = common.epsilon;
      return run_configured(std::move(cfg), common);
    }
    if (exp->parsed()) {
      ExperimentConfig cfg;
      cfg.scenario = Scenario::OddsDataset;
      cfg.learners.clear();
      for (const std::string& a : exp_algos)
        cfg.learners.push_back(a == "aa" || a == "AA"           ? LearnerChoice::AA
                               : a == "gaa" || a == "GAA"       ? LearnerChoice::GAA
                               : a == "agaa" || a == "AGAA"     ? LearnerChoice::AGAA
                               : a == "meta" || a == "MetaAAAGAA"
                                   ? LearnerChoice::MetaAAAGAA
                                   : throw ConfigError("unknown learner " + a));
      cfg.loss = LossKind::Brier;
      cfg.outcomes = 3;
      cfg.dataset_path = exp_data;
      cfg.column_map_path = exp_colmap;
      cfg.bookmakers = exp_books;
      cfg.rounds = exp_rounds;
      cfg.eta = exp_eta;
      cfg.correction_alpha = exp_corr;
      cfg.seed = common.seed;
      cfg.grid_resolution = common.grid_resolution;
      cfg.grid_epsilon = common.epsilon;
      return run_configured(std::move(cfg), common);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "certification error: " << e.what() << "\n";
    return kExitCertification;
  } catch (const InfeasibleError& e) {
    std::cerr << "certification error: " << e.what() << "\n";
    return kExitCertification;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
