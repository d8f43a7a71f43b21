#include "doctest.h"

#include "fgr/synthetic.hpp"

#include <cmath>
#include <set>

using namespace fgr;

namespace {

StreamConfig small_stream() {
  StreamConfig c;
  c.episodes = 3;
  c.train_per_episode = 12;
  c.test_per_episode = 6;
  return c;
}

}  // namespace

TEST_CASE("make_domain is deterministic and separated") {
  const StreamConfig c;
  RngStream a(4, Purpose::data), b(4, Purpose::data);
  const auto x = make_domain(c, 1, a);
  const auto y = make_domain(c, 1, b);
  REQUIRE(x.components.size() == y.components.size());
  for (std::size_t k = 0; k < x.components.size(); ++k) CHECK(x.components[k].mean == y.components[k].mean);
  CHECK(x.keyword_vocab == y.keyword_vocab);
  CHECK(x.style_id == y.style_id);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed, Purpose::data);
    const Vec offset = draw_shared_offset(c, rng);
    const auto spec = make_domain(c, 0, rng, &offset);
    double min_dist = 1e300;
    for (std::size_t i = 0; i < spec.components.size(); ++i)
      for (std::size_t j = i + 1; j < spec.components.size(); ++j)
        min_dist = std::min(min_dist, (spec.components[i].mean - spec.components[j].mean).norm());
    CHECK(min_dist >= 8.0);
  }
}

TEST_CASE("make_domain rejects non-positive separation") {
  StreamConfig c;
  c.separation = 0.0;
  RngStream rng(1, Purpose::data);
  CHECK_THROWS_AS(make_domain(c, 0, rng), std::invalid_argument);
  c.separation = -1.0;
  CHECK_THROWS_AS(make_domain(c, 0, rng), std::invalid_argument);
}

TEST_CASE("different domains have disjoint keyword vocabularies") {
  const StreamConfig c;
  RngStream rng(2, Purpose::data);
  std::set<Token> seen;
  for (int d = 0; d < c.vocab_domains; ++d) {
    const auto spec = make_domain(c, d, rng);
    std::set<Token> mine;
    for (const auto& kw : spec.keyword_vocab) mine.insert(kw.begin(), kw.end());
    for (Token t : mine) CHECK(seen.count(t) == 0);
    seen.insert(mine.begin(), mine.end());
  }
}

TEST_CASE("style ids follow the style mix") {
  StreamConfig c;
  RngStream rng(3, Purpose::data);
  c.style_mix = StyleMix::shared;
  for (int d = 0; d < 4; ++d) CHECK(make_domain(c, d, rng).style_id == 0);
  c.style_mix = StyleMix::alternating;
  CHECK(make_domain(c, 0, rng).style_id != make_domain(c, 1, rng).style_id);
}

TEST_CASE("patch count draws") {
  RngStream rng(6, Purpose::data);
  for (int i = 0; i < 100; ++i) CHECK(draw_patch_count(100.0, 0.0, 16, 512, rng) == 100);
  for (int i = 0; i < 1000; ++i) {
    const int n = draw_patch_count(20.0, 50.0, 16, 40, rng);
    CHECK(n >= 16);
    CHECK(n <= 40);
  }
}

TEST_CASE("degenerate patch-count spec gives exactly mu patches") {
  StreamConfig c;
  c.patch_count_mean = 100;
  c.patch_count_std = 0;
  RngStream rng(8, Purpose::data);
  const auto spec = make_domain(c, 0, rng);
  for (int i = 0; i < 10; ++i) CHECK(sample_slide(spec, rng).patches.count() == 100);
}

TEST_CASE("mixture frequencies match weights within 3 binomial standard errors") {
  const StreamConfig c;
  RngStream rng(10, Purpose::data);
  const auto spec = make_domain(c, 0, rng);
  const std::vector<double> w{0.05, 0.4, 0.1, 0.3, 0.15};
  const int n = 10000;
  const auto draw = draw_mixture_patches(spec, w, n, rng);
  std::vector<int> counts(w.size(), 0);
  for (int k : draw.assignments) ++counts[static_cast<std::size_t>(k)];
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double se = std::sqrt(w[k] * (1 - w[k]) / n);
    CHECK(std::abs(counts[k] / static_cast<double>(n) - w[k]) <= 3 * se);
  }
  // assignment recorded for each patch is the component it was drawn from
  for (int i = 0; i < 200; ++i) {
    const auto k = static_cast<std::size_t>(draw.assignments[static_cast<std::size_t>(i)]);
    std::size_t nearest = 0;
    for (std::size_t j = 1; j < spec.components.size(); ++j)
      if ((draw.patches.vectors[static_cast<std::size_t>(i)] - spec.components[j].mean).norm() <
          (draw.patches.vectors[static_cast<std::size_t>(i)] - spec.components[nearest].mean).norm())
        nearest = j;
    CHECK(nearest == k);
  }
}

TEST_CASE("dominant components") {
  CHECK(dominant_components({0.1, 0.5, 0.25, 0.15}, 0.2) == std::vector<int>{1, 2});
  CHECK(dominant_components({0.19, 0.18, 0.17, 0.16, 0.15, 0.15}, 0.2) == std::vector<int>{0});
  CHECK(dominant_components({1.0}, 0.2) == std::vector<int>{0});
}

TEST_CASE("single-component spec yields that component's keywords") {
  const StreamConfig c;
  RngStream rng(12, Purpose::data);
  auto spec = make_domain(c, 2, rng);
  spec.components.resize(1);
  spec.dirichlet_alpha.resize(1);
  spec.keyword_vocab.resize(1);
  for (int i = 0; i < 5; ++i) {
    const auto s = sample_slide(spec, rng);
    REQUIRE(s.keywords.size() == 1);
    CHECK(s.keywords[0] == spec.keyword_vocab[0]);
  }
}

TEST_CASE("stream splits, grammar and determinism") {
  const auto c = small_stream();
  const auto a = make_stream(c, RngStream(21, Purpose::data));
  const auto b = make_stream(c, RngStream(21, Purpose::data));
  REQUIRE(a.size() == 3);
  const Vocabulary vocab = c.vocabulary();
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].train.size() == 12);
    CHECK(a[t].test.size() == 6);
    CHECK(a[t].spec.domain_id == static_cast<int>(t));
    for (const auto* split : {&a[t].train, &a[t].test}) {
      for (const auto& s : *split) {
        CHECK(s.domain_id == static_cast<int>(t));
        CHECK(s.prompt == TokenSeq{vocab.organ(static_cast<int>(t))});
        CHECK_FALSE(s.keywords.empty());
        CHECK(s.patches.count() >= 16);
        CHECK(s.patches.count() <= 512);
        for (const auto& v : s.patches.vectors) {
          CHECK(v.size() == c.dim);
          CHECK(v.allFinite());
        }
        const auto parsed = parse_report(a[t].spec.style_id, s.report);
        REQUIRE(parsed.has_value());
        CHECK(parsed->organ_token == s.prompt[0]);
        CHECK(parsed->findings.size() == s.keywords.size());
        for (const auto& kw : s.keywords)
          CHECK(std::find(a[t].spec.keyword_vocab.begin(), a[t].spec.keyword_vocab.end(), kw) !=
                a[t].spec.keyword_vocab.end());
        CHECK(s.report.size() >= 8);
        CHECK(s.report.size() <= 25);
      }
    }
    for (std::size_t i = 0; i < a[t].train.size(); ++i) {
      CHECK(a[t].train[i].report == b[t].train[i].report);
      CHECK(a[t].train[i].patches.vectors == b[t].train[i].patches.vectors);
    }
    // train and test slides come from different substreams
    for (const auto& tr : a[t].train)
      for (const auto& te : a[t].test) CHECK(tr.patches.vectors.front() != te.patches.vectors.front());
  }
}

TEST_CASE("test split size and episode count are independent") {
  auto c = small_stream();
  c.episodes = 4;
  c.test_per_episode = 20;
  const auto s = make_stream(c, RngStream(1, Purpose::data));
  CHECK(s.size() == 4);
  for (const auto& e : s) CHECK(e.test.size() == 20);

  c.test_per_episode = 0;
  CHECK_THROWS(make_stream(c, RngStream(1, Purpose::data)));
  c.test_per_episode = 5;
  c.episodes = 1;
  CHECK_THROWS(make_stream(c, RngStream(1, Purpose::data)));
}

TEST_CASE("growing a split does not change earlier slides") {
  auto c = small_stream();
  const auto a = make_stream(c, RngStream(5, Purpose::data));
  c.train_per_episode = 20;
  const auto b = make_stream(c, RngStream(5, Purpose::data));
  for (std::size_t i = 0; i < a[1].train.size(); ++i) CHECK(a[1].train[i].report == b[1].train[i].report);
  for (std::size_t i = 0; i < a[1].test.size(); ++i) CHECK(a[1].test[i].patches.vectors == b[1].test[i].patches.vectors);
}

TEST_CASE("every style renders and parses back") {
  const Vocabulary vocab(4, 5);
  for (int style = 0; style < kStyleFamilies; ++style) {
    std::vector<TokenSeq> findings{vocab.keyword_entry(1, 0), vocab.keyword_entry(1, 3)};
    const auto report = render_report(style, vocab.organ(1), findings);
    CHECK(report.back() == kEnd);
    const auto parsed = parse_report(style, report);
    REQUIRE(parsed.has_value());
    CHECK(parsed->organ_token == vocab.organ(1));
    auto got = parsed->findings;
    std::sort(got.begin(), got.end());
    CHECK(got == findings);
    CHECK_FALSE(parse_report((style + 1) % kStyleFamilies, report).has_value());
  }
  CHECK_FALSE(parse_report(0, TokenSeq{kEnd}).has_value());
}
