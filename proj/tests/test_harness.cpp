#include "doctest.h"

#include "fgr/config.hpp"
#include "fgr/harness.hpp"

#include <algorithm>

using namespace fgr;

namespace {

ExperimentConfig small_experiment(int train, int test, int episodes = 3) {
  auto c = default_config(7);
  c.stream.episodes = episodes;
  c.stream.train_per_episode = train;
  c.stream.test_per_episode = test;
  c.footprint.codewords = 16;
  c.epochs = 3;
  c.stream.shared_offset = 0.0;
  return c;
}

std::vector<EpisodeData> stream_of(const ExperimentConfig& c) {
  return make_stream(c.stream, RngStream(c.seeds.data, Purpose::data));
}

Strategy strategy(StrategyKind kind) {
  Strategy s;
  s.kind = kind;
  return s;
}

}  // namespace

TEST_CASE("strategy names and validation") {
  CHECK(parse_strategy_kind("er") == StrategyKind::er);
  CHECK(parse_strategy_kind("footprint_replay") == StrategyKind::footprint_replay);
  CHECK_THROWS_AS(parse_strategy_kind("ewc"), std::invalid_argument);
  Strategy s = strategy(StrategyKind::er);
  s.buffer = 0;
  CHECK_THROWS(s.validate());
  s = strategy(StrategyKind::footprint_replay);
  s.lambda = -0.5;
  CHECK_THROWS(s.validate());
}

TEST_CASE("lambda zero reproduces naive bit for bit") {
  const auto c = small_experiment(24, 6);
  const auto stream = stream_of(c);
  auto replay = strategy(StrategyKind::footprint_replay);
  replay.lambda = 0.0;
  const auto naive = run_stream(stream, strategy(StrategyKind::naive), c.harness(), c.seeds);
  const auto zero = run_stream(stream, replay, c.harness(), c.seeds);
  CHECK(naive.matrix.values() == zero.matrix.values());
  CHECK(naive.matrix.to_csv() == zero.matrix.to_csv());
  CHECK(naive.state.model.checksum() == zero.state.model.checksum());
  CHECK(zero.state.log[2].pseudo_samples == 0);

  replay.lambda = 1.0;
  const auto full = run_stream(stream, replay, c.harness(), c.seeds);
  CHECK(full.state.model.checksum() != naive.state.model.checksum());
}

TEST_CASE("reservoir buffer holds exactly B slides") {
  auto c = small_experiment(100, 1);
  c.footprint.codewords = 8;
  c.epochs = 1;
  const auto stream = stream_of(c);
  auto er = strategy(StrategyKind::er);
  er.buffer = 10;
  const auto h = c.harness();
  auto st = initial_state(h, c.seeds);
  for (std::size_t t = 0; t < 3; ++t) {
    st = run_episode(std::move(st), stream[t], er, h, c.seeds);
    CHECK(st.er_buffer.size() == 10);
  }
  CHECK(st.er_seen == 300);
  CHECK(st.log[1].real_samples == 110);
  std::vector<int> domains;
  for (const auto& s : st.er_buffer) domains.push_back(s.domain_id);
  CHECK(std::count(domains.begin(), domains.end(), 0) < 10);
}

TEST_CASE("cumulative trains on everything seen so far") {
  const auto c = small_experiment(15, 2);
  const auto stream = stream_of(c);
  const auto h = c.harness();
  auto st = initial_state(h, c.seeds);
  for (std::size_t t = 0; t < 3; ++t) {
    st = run_episode(std::move(st), stream[t], strategy(StrategyKind::cumulative), h, c.seeds);
    CHECK(st.log[t].real_samples == 15 * static_cast<int>(t + 1));
    CHECK(st.log[t].pseudo_samples == 0);
  }
}

TEST_CASE("footprint replay never trains on past real slides") {
  const auto c = small_experiment(20, 4);
  const auto stream = stream_of(c);
  const auto h = c.harness();
  const auto s = strategy(StrategyKind::footprint_replay);
  auto st = initial_state(h, c.seeds);
  std::vector<DomainFootprint> first;
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(st.teacher.has_value() == (t >= 1));
    st = run_episode(std::move(st), stream[t], s, h, c.seeds);
    const auto& log = st.log[t];
    CHECK(log.real_samples == 20);
    for (int d : log.real_sample_domains) CHECK(d == static_cast<int>(t));
    CHECK(log.pseudo_samples == 20 * static_cast<int>(t));
    CHECK(st.footprints.size() == t + 1);
    CHECK(st.er_buffer.empty());
    CHECK(st.history.empty());
    if (t == 0) first = st.footprints;
  }
  CHECK(st.footprints[0].codebook.codewords == first[0].codebook.codewords);
  CHECK(st.footprints[0].style.r == first[0].style.r);
  CHECK(st.teacher->checksum() == st.model.checksum());

  CHECK_THROWS_AS(run_episode(st, stream[1], s, h, c.seeds), std::invalid_argument);
}

TEST_CASE("teacher pseudo reports name the organ after one episode") {
  auto c = default_config(3);
  c.stream.episodes = 2;
  c.stream.train_per_episode = 100;
  c.stream.test_per_episode = 1;
  const auto stream = stream_of(c);
  const auto h = c.harness();
  auto st = run_episode(initial_state(h, c.seeds), stream[0], strategy(StrategyKind::footprint_replay), h, c.seeds);
  REQUIRE(st.teacher.has_value());
  ReplayConfig rc;
  rc.per_domain = 50;
  const auto pseudo = build_replay_set(st.footprints, 1, *st.teacher, rc, RngStream(1, Purpose::replay));
  REQUIRE(pseudo.size() == 50);
  const Token organ = stream[0].spec.organ_token;
  const auto expected = render_report(stream[0].spec.style_id, organ, {stream[0].spec.keyword_vocab[0]});
  const auto pos = static_cast<std::size_t>(std::find(expected.begin(), expected.end(), organ) - expected.begin());
  int hits = 0;
  for (const auto& p : pseudo) hits += p.pseudo_report.size() > pos && p.pseudo_report[pos] == organ ? 1 : 0;
  CHECK(hits >= 45);
}

TEST_CASE("run_stream is deterministic and fills a full matrix") {
  const auto c = small_experiment(16, 5);
  const auto stream = stream_of(c);
  int callbacks = 0;
  const auto a = run_stream(stream, strategy(StrategyKind::footprint_replay), c.harness(), c.seeds,
                            [&](const EpisodeState& st, const std::vector<SplitEvaluation>& evals) {
                              CHECK(evals.size() == 3);
                              CHECK(st.episode == callbacks + 1);
                              ++callbacks;
                            });
  const auto b = run_stream(stream, strategy(StrategyKind::footprint_replay), c.harness(), c.seeds);
  CHECK(callbacks == 3);
  CHECK(a.matrix.episodes() == 3);
  CHECK(a.matrix.to_csv() == b.matrix.to_csv());
  CHECK((a.matrix.values().array() >= 0).all());
  CHECK((a.matrix.values().array() <= 1).all());

  const auto naive = run_stream(stream, strategy(StrategyKind::naive), c.harness(), c.seeds);
  CHECK(naive.matrix.to_csv() != a.matrix.to_csv());

  std::vector<EpisodeData> one(stream.begin(), stream.begin() + 1);
  CHECK_THROWS(run_stream(one, strategy(StrategyKind::naive), c.harness(), c.seeds));
}

TEST_CASE("evaluation routes by footprint, not by label") {
  const auto c = small_experiment(16, 5);
  const auto stream = stream_of(c);
  const auto h = c.harness();
  auto st = initial_state(h, c.seeds);
  st = run_episode(std::move(st), stream[0], strategy(StrategyKind::naive), h, c.seeds);
  const FrozenTextEncoder enc(h.generator.vocab_size, h.generator.text_dim);
  const auto ev = evaluate_split(st.model, st.footprints, stream[2].test, enc, h.keyword_vocabulary);
  for (int d : ev.routed_domain) CHECK(d == 0);
  CHECK(ev.routing_accuracy == 0.0);
  CHECK(ev.per_slide.size() == 5);
}
