#include <doctest.h>

#include <cmath>
#include <random>

#include "aggr/aggregation.hpp"
#include "aggr/mixability.hpp"

using namespace aggr;

namespace {
Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<GameRound> random_brier_game(std::mt19937_64& rng, int k, int n, int rounds) {
  std::vector<GameRound> game;
  for (int t = 0; t < rounds; ++t) {
    GameRound round;
    for (int e = 0; e < k; ++e) {
      Vec w(n);
      for (int i = 0; i < n; ++i) w(i) = 0.05 + unit(rng);
      round.expert_predictions.push_back(Distribution(w / w.sum()));
    }
    round.outcome = static_cast<int>(rng() % static_cast<unsigned>(n));
    game.push_back(std::move(round));
  }
  return game;
}

struct ConstantCorrection final : CorrectionProtocol {
  double c;
  explicit ConstantCorrection(double c_) : c(c_) {}
  Vec correction(const std::vector<Vec>& losses) const override {
    return Vec::Constant(losses.back().size(), c);
  }
};
}  // namespace

TEST_CASE("aa prediction is the bayesian mixture under the log loss") {
  const LossSpec log2 = LossSpec::log(2);
  const LearnerState state =
      make_learner(Algorithm::AA, Entropy::shannon(2), 1.0, Distribution::uniform(2));
  const std::vector<Distribution> experts = {Distribution(make_vec({0.5, 0.5})),
                                             Distribution(make_vec({0.25, 0.75}))};
  const Distribution p = aa_predict(state, experts, log2);
  CHECK(p[0] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("aa prediction degenerate cases") {
  const LossSpec brier = LossSpec::brier(2);
  const Distribution lone(make_vec({0.3, 0.7}));
  const LearnerState single =
      make_learner(Algorithm::AA, Entropy::shannon(1), 1.0, Distribution::uniform(1));
  const Distribution p1 = aa_predict(single, {lone}, brier);
  CHECK(p1[0] == doctest::Approx(0.3).epsilon(1e-7));

  const LearnerState state =
      make_learner(Algorithm::AA, Entropy::shannon(3), 1.0, Distribution::uniform(3));
  const Distribution common(make_vec({0.6, 0.4}));
  const Distribution p2 = aa_predict(state, {common, common, common}, brier);
  CHECK(p2[0] == doctest::Approx(0.6).epsilon(1e-7));
}

TEST_CASE("aa update hand values") {
  const LearnerState state =
      make_learner(Algorithm::AA, Entropy::shannon(2), 1.0, Distribution::uniform(2));

  const LearnerState upd = aa_update(state, make_vec({0.0, std::log(2.0)}));
  CHECK(upd.q[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(upd.q[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  const LearnerState same = aa_update(state, make_vec({1.7, 1.7}));
  CHECK(same.q[0] == doctest::Approx(0.5).epsilon(1e-12));

  const LearnerState elim = aa_update(state, make_vec({0.0, kInf}));
  CHECK(elim.q[0] == 1.0);
  CHECK(elim.q[1] == 0.0);

  CHECK_THROWS_AS(aa_update(state, make_vec({kInf, kInf})), DegenerateError);
}

TEST_CASE("aa invariant: q equals softmax of the dual iterate") {
  std::mt19937_64 rng(31337ULL);
  const LossSpec brier = LossSpec::brier(2);
  LearnerState state =
      make_learner(Algorithm::AA, Entropy::shannon(4), 1.0, Distribution::uniform(4));
  for (const GameRound& round : random_brier_game(rng, 4, 2, 60)) {
    state = aa_update(state, brier.loss_row(round.outcome, round.expert_predictions));
    const Vec z = state.dual_iterate + state.prior.weights().array().log().matrix();
    const double m = z.maxCoeff();
    Vec soft = (z.array() - m).exp();
    soft /= soft.sum();
    CHECK((soft - state.q.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("gaa with shannon reproduces aa round by round") {
  std::mt19937_64 rng(2024ULL);
  const LossSpec brier = LossSpec::brier(2);
  for (int k : {2, 5}) {
    const auto game = random_brier_game(rng, k, 2, 50);
    LearnerState aa =
        make_learner(Algorithm::AA, Entropy::shannon(k), 1.0, Distribution::uniform(k));
    LearnerState gaa =
        make_learner(Algorithm::GAA, Entropy::shannon(k), 1.0, Distribution::uniform(k));
    for (const GameRound& round : game) {
      const Distribution pa = aa_predict(aa, round.expert_predictions, brier);
      const Distribution pg = gaa_predict(gaa, round.expert_predictions, brier);
      CHECK((pa.weights() - pg.weights()).cwiseAbs().maxCoeff() <= 1e-9);
      const Vec losses = brier.loss_row(round.outcome, round.expert_predictions);
      aa = aa_update(aa, losses);
      gaa = gaa_update(gaa, losses);
      CHECK((aa.q.weights() - gaa.q.weights()).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("gaa update edge cases") {
  const Entropy m2 = Entropy::mixture(2, 0.5);
  const LearnerState state =
      make_learner(Algorithm::GAA, m2, 1.0, Distribution::uniform(2));

  // zero losses keep the prior
  const LearnerState same = gaa_update(state, Vec::Zero(2));
  CHECK((same.q.weights() - state.q.weights()).cwiseAbs().maxCoeff() <= 1e-12);

  // frozen by a resolution-2e6 grid scan of <mu,l> + D(mu,q)
  const LearnerState moved = gaa_update(state, make_vec({1.0, 0.0}));
  CHECK(moved.q[0] == doctest::Approx(0.19834).epsilon(5e-4));

  // mirror step matches the direct grid argmin within 1e-3 in divergence
  double best = kInf;
  Distribution best_mu = Distribution::uniform(2);
  for (int i = 1; i < 20000; ++i) {
    const double t = static_cast<double>(i) / 20000;
    const Distribution mu(make_vec({t, 1.0 - t}));
    const double v = mu.weights()(0) * 1.0 + m2.divergence(mu, state.q);
    if (v < best) {
      best = v;
      best_mu = mu;
    }
  }
  CHECK(m2.divergence(best_mu, moved.q) <= 1e-3);
}

TEST_CASE("gaa with a single expert returns its prediction") {
  const LossSpec brier = LossSpec::brier(2);
  const LearnerState single =
      make_learner(Algorithm::GAA, Entropy::shannon(1), 1.0, Distribution::uniform(1));
  Vec w(2);
  w << 0.7, 0.3;
  const Distribution p = gaa_predict(single, {Distribution(w)}, brier);
  CHECK(p[0] == doctest::Approx(0.7).epsilon(1e-7));
}

TEST_CASE("gaa prediction at a vertex prior returns that expert") {
  const LossSpec brier = LossSpec::brier(2);
  LearnerState state =
      make_learner(Algorithm::GAA, Entropy::mixture(3, 0.5), 1.0, Distribution::vertex(3, 2));
  const std::vector<Distribution> experts = {Distribution(make_vec({0.9, 0.1})),
                                             Distribution(make_vec({0.2, 0.8})),
                                             Distribution(make_vec({0.55, 0.45}))};
  const Distribution p = gaa_predict(state, experts, brier);
  CHECK(p[0] == doctest::Approx(0.55).epsilon(1e-6));
}

TEST_CASE("eliminated experts never return under aa or shannon gaa") {
  std::mt19937_64 rng(99ULL);
  for (Algorithm algo : {Algorithm::AA, Algorithm::GAA}) {
    LearnerState state =
        make_learner(algo, Entropy::shannon(3), 1.0, Distribution::uniform(3));
    Vec first = make_vec({0.4, kInf, 0.2});
    state = algo == Algorithm::AA ? aa_update(state, first) : gaa_update(state, first);
    CHECK(state.q[1] == 0.0);
    for (int t = 0; t < 20; ++t) {
      Vec losses(3);
      for (int e = 0; e < 3; ++e) losses(e) = unit(rng);
      state = algo == Algorithm::AA ? aa_update(state, losses) : gaa_update(state, losses);
      CHECK(state.q[1] == 0.0);
    }
  }
}

TEST_CASE("agaa with zero corrections walks the gaa trajectory") {
  std::mt19937_64 rng(512ULL);
  const LossSpec brier = LossSpec::brier(2);
  const auto game = random_brier_game(rng, 3, 2, 40);
  const ZeroCorrection zero;

  LearnerState gaa =
      make_learner(Algorithm::GAA, Entropy::shannon(3), 1.0, Distribution::uniform(3));
  LearnerState agaa =
      make_learner(Algorithm::AGAA, Entropy::shannon(3), 1.0, Distribution::uniform(3));
  for (const GameRound& round : game) {
    const Distribution pg = gaa_predict(gaa, round.expert_predictions, brier);
    auto [pa, next] = agaa_step(agaa, round.expert_predictions, brier, zero, round.outcome);
    CHECK((pa.weights() - pg.weights()).cwiseAbs().maxCoeff() <= 1e-12);
    gaa = gaa_update(gaa, brier.loss_row(round.outcome, round.expert_predictions));
    agaa = std::move(next);
    CHECK((agaa.q.weights() - gaa.q.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("constant corrections do not move the shannon trajectory") {
  std::mt19937_64 rng(640ULL);
  const LossSpec brier = LossSpec::brier(2);
  const auto game = random_brier_game(rng, 3, 2, 30);
  const ZeroCorrection zero;
  const ConstantCorrection shifted(0.35);

  LearnerState base =
      make_learner(Algorithm::AGAA, Entropy::shannon(3), 1.0, Distribution::uniform(3));
  LearnerState offset = base;
  for (const GameRound& round : game) {
    auto [pb, nb] = agaa_step(base, round.expert_predictions, brier, zero, round.outcome);
    auto [po, no] = agaa_step(offset, round.expert_predictions, brier, shifted, round.outcome);
    CHECK((pb.weights() - po.weights()).cwiseAbs().maxCoeff() <= 1e-12);
    base = std::move(nb);
    offset = std::move(no);
    CHECK((base.q.weights() - offset.q.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("delta regret") {
  CHECK(delta_regret({}, {}, 0) == 0.0);

  const std::vector<Vec> v = {make_vec({1.0, 0.0})};
  const std::vector<Distribution> q = {Distribution::uniform(2)};
  CHECK(delta_regret(v, q, 0) == doctest::Approx(0.5));
  CHECK(delta_regret(v, q, 1) == doctest::Approx(-0.5));

  CHECK_THROWS_AS(delta_regret(v, {}, 0), LengthMismatchError);
}

TEST_CASE("game traces accumulate consistently") {
  std::mt19937_64 rng(7ULL);
  const LossSpec brier = LossSpec::brier(3);
  const auto game = random_brier_game(rng, 4, 3, 80);
  const AverageLossCorrection protocol(0.125);
  for (Algorithm algo : {Algorithm::AA, Algorithm::GAA, Algorithm::AGAA}) {
    const GameTrace trace =
        run_game(make_learner(algo, Entropy::shannon(4), 1.0, Distribution::uniform(4)),
                 brier, game, &protocol);
    Vec expert_sum = Vec::Zero(4);
    double learner_sum = 0.0;
    for (const RoundRecord& rec : trace.rounds) {
      expert_sum += rec.expert_losses;
      learner_sum += rec.learner_loss;
    }
    CHECK((expert_sum - trace.cumulative_expert_losses).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(learner_sum - trace.cumulative_learner_loss) <= 1e-10);
    CHECK(trace.q_history.size() == game.size());
  }
}

TEST_CASE("gaa regret bound holds every round on seeded games") {
  std::mt19937_64 rng(424242ULL);
  const LossSpec brier = LossSpec::brier(2);

  struct Setup {
    Entropy phi;
    double eta;
    double bound;
  };
  const std::vector<Setup> setups = {
      {Entropy::shannon(2), 1.0, std::log(2.0)},
      {Entropy::mixture(2, 0.5), 0.5, 0.25 + std::log(2.0)},  // D_phi(e,u)/eta_phi
  };
  for (const Setup& s : setups) {
    for (int g = 0; g < 10; ++g) {
      const auto game = random_brier_game(rng, 2, 2, 120);
      LearnerState state =
          make_learner(Algorithm::GAA, s.phi, s.eta, Distribution::uniform(2));
      Vec expert_cum = Vec::Zero(2);
      double learner_cum = 0.0;
      for (const GameRound& round : game) {
        const Distribution p = gaa_predict(state, round.expert_predictions, brier);
        const Vec losses = brier.loss_row(round.outcome, round.expert_predictions);
        learner_cum += brier.loss(round.outcome, p);
        expert_cum += losses;
        state = gaa_update(state, losses);
        CHECK(learner_cum - expert_cum.minCoeff() <= s.bound + 1e-6);
      }
    }
  }
}

TEST_CASE("agaa regret bound with the correction term holds for every expert") {
  std::mt19937_64 rng(90210ULL);
  const LossSpec brier = LossSpec::brier(2);
  const AverageLossCorrection protocol(0.125);
  const double bound = std::log(3.0);  // shannon, k = 3, eta = 1
  for (int g = 0; g < 10; ++g) {
    const auto game = random_brier_game(rng, 3, 2, 120);
    const GameTrace trace =
        run_game(make_learner(Algorithm::AGAA, Entropy::shannon(3), 1.0,
                              Distribution::uniform(3)),
                 brier, game, &protocol);
    Vec expert_cum = Vec::Zero(3);
    double learner_cum = 0.0;
    for (size_t t = 0; t < trace.rounds.size(); ++t) {
      expert_cum += trace.rounds[t].expert_losses;
      learner_cum += trace.rounds[t].learner_loss;
      const std::vector<Vec> v_head(trace.correction_history.begin(),
                                    trace.correction_history.begin() + t);
      const std::vector<Distribution> q_head(trace.q_history.begin(),
                                             trace.q_history.begin() + t);
      for (int theta = 0; theta < 3; ++theta) {
        const double shift = delta_regret(v_head, q_head, theta);
        CHECK(learner_cum - expert_cum(theta) <= bound + shift + 1e-6);
      }
    }
  }
}

TEST_CASE("meta learner stays within log 2 of the better component") {
  std::mt19937_64 rng(1123581321ULL);
  const LossSpec brier = LossSpec::brier(2);
  const AverageLossCorrection protocol(0.5);
  for (int g = 0; g < 10; ++g) {
    const auto game = random_brier_game(rng, 3, 2, 150);
    const GameTrace aa = run_game(
        make_learner(Algorithm::AA, Entropy::shannon(3), 1.0, Distribution::uniform(3)),
        brier, game);
    const GameTrace agaa = run_game(
        make_learner(Algorithm::AGAA, Entropy::shannon(3), 1.0, Distribution::uniform(3)),
        brier, game, &protocol);
    const GameTrace meta = meta_aa(aa, agaa, brier, 1.0);
    const double better =
        std::min(aa.cumulative_learner_loss, agaa.cumulative_learner_loss);
    CHECK(meta.cumulative_learner_loss <= better + std::log(2.0) + 1e-6);
  }

  // identical components: the meta learner matches them exactly
  const auto game = random_brier_game(rng, 2, 2, 40);
  const GameTrace one = run_game(
      make_learner(Algorithm::AA, Entropy::shannon(2), 1.0, Distribution::uniform(2)),
      brier, game);
  const GameTrace twin = meta_aa(one, one, brier, 1.0);
  CHECK(twin.cumulative_learner_loss ==
        doctest::Approx(one.cumulative_learner_loss).epsilon(1e-9));

  GameTrace truncated = one;
  truncated.rounds.pop_back();
  CHECK_THROWS_AS(meta_aa(one, truncated, brier, 1.0), LengthMismatchError);
}
