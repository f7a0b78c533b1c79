#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <random>

#include "debatelab/error.hpp"
#include "debatelab/metrics.hpp"
#include "debatelab/mock_gateway.hpp"
#include "debatelab/orchestrator.hpp"
#include "debatelab/protocol.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;

namespace {

// Independent oracles in long double.
long double oracle_cos(std::span<const double> u, std::span<const double> v) {
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  long double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0L, 1.0L);
}
long double oracle_cos(const EmbeddingVector& u, const EmbeddingVector& v) {
  return oracle_cos(u.values(), v.values());
}

long double oracle_pair_mean(const std::vector<EmbeddingVector>& vs, bool distance) {
  long double sum = 0;
  int n = 0;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j, ++n) {
      const long double c = oracle_cos(vs[i], vs[j]);
      sum += distance ? 1 - c : c;
    }
  return sum / n;
}

long double oracle_slope(const std::vector<double>& y) {
  const long double n = y.size();
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double x = i + 1;
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EmbeddingVector ev(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

const TurnRecord& find_turn(const DebateTranscript& t, Agent a, int round, TurnKind k) {
  for (const TurnRecord& r : t.turns)
    if (r.agent == a && r.round == round && r.kind == k) return r;
  throw std::runtime_error("turn not found");
}
TurnRecord& find_turn(DebateTranscript& t, Agent a, int round, TurnKind k) {
  return const_cast<TurnRecord&>(find_turn(std::as_const(t), a, round, k));
}

}  // namespace

TEST_CASE("cosine examples") {
  const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1}, neg{-1, 0};
  CHECK(cosine_similarity(d, d) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity(e1, e2) == 0.0);
  CHECK(std::abs(cosine_similarity(e1, d) - 0.70710678) < 1e-8);
  CHECK(std::abs(cosine_similarity(e1, d) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(cosine_distance(d, d) == doctest::Approx(0.0));
  CHECK(cosine_distance(e1, neg) == 2.0);
  CHECK(std::abs(cosine_distance(e1, d) - 0.29289322) < 1e-8);
}

TEST_CASE("cosine errors") {
  const std::vector<double> a{1, 0}, b{1, 0, 0}, z{0, 0};
  CHECK_THROWS_AS(cosine_similarity(a, b), DimensionMismatch);
  CHECK_THROWS_AS(cosine_similarity(a, z), ZeroVector);
  CHECK_THROWS_AS(cosine_distance(z, a), ZeroVector);
  CHECK_THROWS_AS(mean_pairwise_similarity(std::vector<EmbeddingVector>{ev({1, 0})}), Error);
}

TEST_CASE("cosine matches the oracle, is symmetric and scale invariant") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(2, 512);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 300; ++i) {
    const std::size_t d = dim(rng);
    const auto u = random_embedding(rng, d), v = random_embedding(rng, d);
    const double s = cosine_similarity(u, v);
    CHECK(std::abs(s - static_cast<double>(oracle_cos(u, v))) < 1e-12);
    CHECK(s == cosine_similarity(v, u));
    std::vector<double> scaled(u.values().begin(), u.values().end());
    const double alpha = scale(rng);
    for (double& x : scaled) x *= alpha;
    CHECK(std::abs(cosine_similarity(scaled, v.values()) - s) < 1e-12);
    const double dist = cosine_distance(u, v);
    CHECK(dist >= 0.0);
    CHECK(dist <= 2.0);
  }
}

TEST_CASE("pairwise means") {
  const std::vector<EmbeddingVector> three{ev({1, 0}), ev({0, 1}), ev({1, 1})};
  // pairs: 0, 1/sqrt2, 1/sqrt2
  CHECK(mean_pairwise_similarity(three) == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::vector<EmbeddingVector> four;
  for (int i = 0; i < 4; ++i) four.push_back(random_embedding(rng, 16));
  CHECK(std::abs(mean_pairwise_distance(four) - static_cast<double>(oracle_pair_mean(four, true))) < 1e-12);
  const std::vector<EmbeddingVector> same(5, ev({0.3, -2, 7}));
  CHECK(std::abs(mean_pairwise_distance(same)) < 1e-15);
}

TEST_CASE("trend") {
  CHECK(std::abs(trend(std::vector<double>{0.715, 0.952, 1.000}) - 0.1425) < 1e-12);
  CHECK(trend(std::vector<double>{0.5, 0.5, 1.0}) == 0.25);
  CHECK(trend(std::vector<double>{0.4, 0.4, 0.4, 0.4, 0.4}) == 0.0);
  CHECK_THROWS_AS(trend(std::vector<double>{1.0}), SeriesTooShort);
  CHECK_THROWS_AS(trend(std::vector<double>{}), SeriesTooShort);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(2 + rng() % 7);
    for (double& x : s) x = u(rng);
    CHECK(std::abs(trend(s) - static_cast<double>(oracle_slope(s))) < 1e-12);
    const double a = u(rng) * 5, b = u(rng) * 5;
    std::vector<double> t = s;
    for (double& x : t) x = a * x + b;
    CHECK(std::abs(trend(t) - a * trend(s)) < 1e-12);
    std::vector<double> three{u(rng), u(rng), u(rng)};
    CHECK(trend(three) == (three[2] - three[0]) / 2);
  }
}

TEST_CASE("stance metrics on scripted vectors") {
  std::mt19937_64 rng(21);
  DebateTranscript t = random_transcript(rng, 2, 2);
  const int closing = closing_round(2);
  SUBCASE("identical closings converge to 1") {
    find_turn(t, Agent::debater_a, closing, TurnKind::closing_stance).embedding = ev({0.2, 0.9});
    find_turn(t, Agent::debater_b, closing, TurnKind::closing_stance).embedding = ev({0.2, 0.9});
    CHECK(final_stance_convergence(t) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("orthogonal closings converge to 0") {
    find_turn(t, Agent::debater_a, closing, TurnKind::closing_stance).embedding = ev({1, 0});
    find_turn(t, Agent::debater_b, closing, TurnKind::closing_stance).embedding = ev({0, 3});
    CHECK(final_stance_convergence(t) == 0.0);
  }
  SUBCASE("total shift") {
    find_turn(t, Agent::debater_a, 0, TurnKind::opening_stance).embedding = ev({1, 0});
    find_turn(t, Agent::debater_a, closing, TurnKind::closing_stance).embedding = ev({2, 0});
    find_turn(t, Agent::debater_b, 0, TurnKind::opening_stance).embedding = ev({1, 1});
    find_turn(t, Agent::debater_b, closing, TurnKind::closing_stance).embedding = ev({-1, -1});
    CHECK(total_stance_shift(t, Agent::debater_a) == doctest::Approx(0.0));
    CHECK(total_stance_shift(t, Agent::debater_b) == doctest::Approx(2.0));
  }
  SUBCASE("two-step rotation gives the closed-form distances") {
    const double a1 = 0.3, a2 = 1.1;
    find_turn(t, Agent::debater_a, 0, TurnKind::opening_stance).embedding = ev({1, 0});
    find_turn(t, Agent::debater_a, 1, TurnKind::round_stance).embedding = ev({std::cos(a1), std::sin(a1)});
    find_turn(t, Agent::debater_a, 2, TurnKind::round_stance).embedding = ev({std::cos(a2), std::sin(a2)});
    CHECK(stance_shift_from_prev(t, Agent::debater_a, 1) == doctest::Approx(1 - std::cos(a1)).epsilon(1e-13));
    CHECK(stance_shift_from_prev(t, Agent::debater_a, 2) == doctest::Approx(1 - std::cos(a2 - a1)).epsilon(1e-13));
  }
  SUBCASE("constant stance series never shifts") {
    for (TurnRecord& r : t.turns)
      if (r.agent == Agent::debater_b && is_stance(r.kind)) r.embedding = ev({0.5, 0.5});
    for (int r = 1; r <= 2; ++r) CHECK(std::abs(stance_shift_from_prev(t, Agent::debater_b, r)) < 1e-15);
  }
  SUBCASE("agreement and diversity") {
    find_turn(t, Agent::debater_a, 1, TurnKind::round_stance).embedding = ev({1, 0});
    find_turn(t, Agent::debater_b, 1, TurnKind::round_stance).embedding = ev({1, 0});
    find_turn(t, Agent::debater_a, 1, TurnKind::argument).embedding = ev({1, 0});
    find_turn(t, Agent::debater_b, 1, TurnKind::argument).embedding = ev({0, 1});
    CHECK(round_stance_agreement(t, 1) == doctest::Approx(1.0));
    CHECK(semantic_diversity(t, 1) == 1.0);
    find_turn(t, Agent::debater_b, 1, TurnKind::argument).embedding = ev({1, 0});
    CHECK(semantic_diversity(t, 1) == doctest::Approx(0.0));
  }
  SUBCASE("argument stance source reads the arguments") {
    t.config.stance_source = StanceSource::argument;
    const auto& arg = find_turn(t, Agent::debater_a, 2, TurnKind::argument);
    CHECK(&stance_embedding(t, Agent::debater_a, 2) == &*arg.embedding);
  }
}

TEST_CASE("round_bias") {
  std::mt19937_64 rng(5);
  DebateTranscript t = random_transcript(rng, 3, 4);
  const int labels[3][2] = {{1, 0}, {0, 0}, {1, 1}};
  for (int r = 1; r <= 3; ++r) {
    find_turn(t, Agent::debater_a, r, TurnKind::argument).bias = labels[r - 1][0];
    find_turn(t, Agent::debater_b, r, TurnKind::argument).bias = labels[r - 1][1];
  }
  CHECK(round_bias(t, 1) == 0.5);
  CHECK(round_bias(t, 2) == 0.0);
  CHECK(round_bias(t, 3) == 1.0);
  find_turn(t, Agent::debater_b, 2, TurnKind::argument).bias.reset();
  CHECK_THROWS_AS(round_bias(t, 2), MissingLabels);
  CHECK_THROWS_AS(round_bias(t, 9), MissingLabels);
}

TEST_CASE("psychometric aggregation") {
  std::mt19937_64 rng(13);
  std::vector<DebateTranscript> ts;
  for (int i = 0; i < 3; ++i) ts.push_back(random_transcript(rng, 3, 4));
  const std::string analyst = ts[0].config.debater_a.name;

  SUBCASE("constant confidence 0.849") {
    for (auto& t : ts)
      for (auto& r : t.turns)
        if (r.self_report) r.self_report->scores = PsychometricScores{0.849, 4, 0.5, 0.2};
    const auto s = psychometric_aggregate(ts, analyst);
    REQUIRE(s.means);
    CHECK(std::abs(s.means->confidence - 0.849) < 1e-12);
    CHECK(s.n_reports == 9);
    CHECK(s.n_excluded == 0);
  }
  SUBCASE("single report") {
    std::vector<DebateTranscript> one{ts[0]};
    bool first = true;
    for (auto& r : one[0].turns)
      if (r.self_report && r.agent == Agent::debater_a) {
        if (first) r.self_report->scores = PsychometricScores{0.1, 2, 0.3, 0.4};
        else r.self_report->scores.reset();
        first = false;
      }
    const auto s = psychometric_aggregate(one, analyst);
    CHECK(s.means->confidence == 0.1);
    CHECK(s.means->effort == 2.0);
    CHECK(s.means->empathy == 0.3);
    CHECK(s.means->dissonance == 0.4);
    CHECK(s.n_reports == 1);
    CHECK(s.n_excluded == 2);
  }
  SUBCASE("mixed parsed and unparsed") {
    std::vector<DebateTranscript> one{ts[0]};
    const double conf[] = {0.2, 0.6, 0.0};
    int i = 0;
    for (auto& r : one[0].turns)
      if (r.self_report && r.agent == Agent::debater_a) {
        if (i < 2) r.self_report->scores = PsychometricScores{conf[i], 1 + 2 * i, 0.5, 0.5};
        else r.self_report->scores.reset();
        ++i;
      }
    const auto s = psychometric_aggregate(one, analyst);
    CHECK(s.means->confidence == doctest::Approx(0.4));
    CHECK(s.means->effort == 2.0);
    CHECK(s.n_reports == 2);
    CHECK(s.n_excluded == 1);
  }
  SUBCASE("no parsed reports") {
    for (auto& t : ts)
      for (auto& r : t.turns)
        if (r.self_report) r.self_report->scores.reset();
    CHECK_THROWS_AS(psychometric_aggregate(ts, analyst), NoReports);
    CHECK_THROWS_AS(psychometric_aggregate(ts, "nobody"), NoReports);
  }
}

TEST_CASE("compute_debate_metrics field by field") {
  std::mt19937_64 rng(77);
  for (int rounds : {1, 2, 3, 5}) {
    const DebateTranscript t = random_transcript(rng, rounds, 12);
    const DebateMetrics m = compute_debate_metrics(t);
    const int close = closing_round(rounds);
    auto emb = [&](Agent a, int r, TurnKind k) { return *find_turn(t, a, r, k).embedding; };

    const auto ca = emb(Agent::debater_a, close, TurnKind::closing_stance);
    const auto cb = emb(Agent::debater_b, close, TurnKind::closing_stance);
    CHECK(std::abs(m.final_stance_convergence - static_cast<double>(oracle_cos(ca, cb))) < 1e-12);
    long double shift_sum = 0;
    for (Agent a : kDebaters) {
      const long double s = 1 - oracle_cos(emb(a, 0, TurnKind::opening_stance), emb(a, close, TurnKind::closing_stance));
      CHECK(std::abs(m.total_stance_shift.at(a) - static_cast<double>(s)) < 1e-12);
      shift_sum += s;
    }
    CHECK(std::abs(m.mean_total_stance_shift - static_cast<double>(shift_sum / 2)) < 1e-12);

    REQUIRE(m.rounds.size() == static_cast<std::size_t>(rounds));
    std::vector<double> agreement, bias;
    for (int r = 1; r <= rounds; ++r) {
      const RoundMetrics& rm = m.rounds[r - 1];
      CHECK(rm.round == r);
      const auto sa = emb(Agent::debater_a, r, TurnKind::round_stance);
      const auto sb = emb(Agent::debater_b, r, TurnKind::round_stance);
      CHECK(std::abs(rm.stance_agreement - static_cast<double>(oracle_cos(sa, sb))) < 1e-12);
      const auto aa = emb(Agent::debater_a, r, TurnKind::argument);
      const auto ab = emb(Agent::debater_b, r, TurnKind::argument);
      CHECK(std::abs(rm.semantic_diversity - static_cast<double>(1 - oracle_cos(aa, ab))) < 1e-12);
      long double shifts = 0;
      for (Agent a : kDebaters) {
        const TurnKind prev_kind = r == 1 ? TurnKind::opening_stance : TurnKind::round_stance;
        const long double s = 1 - oracle_cos(emb(a, r - 1, prev_kind), emb(a, r, TurnKind::round_stance));
        CHECK(std::abs(rm.shift_from_prev.at(a) - static_cast<double>(s)) < 1e-12);
        shifts += s;
      }
      CHECK(std::abs(rm.mean_shift_from_prev - static_cast<double>(shifts / 2)) < 1e-12);
      const double b = (*find_turn(t, Agent::debater_a, r, TurnKind::argument).bias +
                        *find_turn(t, Agent::debater_b, r, TurnKind::argument).bias) / 2.0;
      CHECK(rm.avg_bias == b);
      const double s = (*find_turn(t, Agent::debater_a, r, TurnKind::argument).sentiment +
                        *find_turn(t, Agent::debater_b, r, TurnKind::argument).sentiment) / 2.0;
      CHECK(rm.avg_sentiment == doctest::Approx(s).epsilon(1e-14));
      agreement.push_back(rm.stance_agreement);
      bias.push_back(rm.avg_bias);
    }
    if (rounds == 1) {
      CHECK_FALSE(m.agreement_trend.has_value());
      CHECK_FALSE(m.bias_amplification_trend.has_value());
    } else {
      CHECK(std::abs(*m.agreement_trend - static_cast<double>(oracle_slope(agreement))) < 1e-12);
      CHECK(std::abs(*m.bias_amplification_trend - static_cast<double>(oracle_slope(bias))) < 1e-12);
    }
    for (Agent a : kDebaters) CHECK(m.psychometrics.at(a) == agent_psychometrics(t, a));
    CHECK(compute_debate_metrics(t) == m);
  }
}

TEST_CASE("aborted transcripts are rejected") {
  std::mt19937_64 rng(1);
  const auto t = random_transcript(rng, 3, 4, 8);
  CHECK_THROWS_AS(compute_debate_metrics(t), IncompleteTranscript);
  CHECK_THROWS_AS(final_stance_convergence(t), IncompleteTranscript);
  CHECK_THROWS_AS(stance_shift_from_prev(t, Agent::debater_a, 2), IncompleteTranscript);
}

TEST_CASE("funnel scenario narrows then converges") {
  MockGateway g(load_scenario(source_data("scenarios/funnel.json")));
  const auto t = run_debate(sample_config(3), g, PromptTemplateSet::builtin());
  REQUIRE(t.complete());
  const auto m = compute_debate_metrics(t);
  CHECK(m.final_stance_convergence >= 0.99);
  CHECK(m.rounds[0].semantic_diversity > m.rounds[1].semantic_diversity);
  CHECK(m.rounds[1].semantic_diversity > m.rounds[2].semantic_diversity);
  CHECK(*m.agreement_trend > 0);
}
