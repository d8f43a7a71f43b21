#include "doctest.h"

#include "fgr/replay.hpp"

#include <cmath>

using namespace fgr;

namespace {

DomainFootprint toy_footprint(int domain, int k = 4, int dim = 3) {
  DomainFootprint fp;
  fp.domain_id = domain;
  fp.organ_token = 21 + domain;
  fp.codebook.codewords.resize(dim, k);
  for (int c = 0; c < k; ++c)
    for (int d = 0; d < dim; ++d) fp.codebook.codewords(d, c) = 10.0 * c + d + domain;
  fp.histogram_bank.capacity = 50;
  Vec h(k);
  h.setLinSpaced(1.0, static_cast<double>(k));
  fp.histogram_bank.histograms = {h / h.sum(), Vec::Unit(k, 1)};
  fp.mu_n = 40;
  fp.sigma_n = 5;
  fp.style.r = Vec::Unit(32, domain % 32);
  return fp;
}

GeneratorModel toy_teacher(int vocab) {
  GeneratorConfig gc;
  gc.vocab_size = vocab;
  gc.slide_dim = 3;
  gc.max_decode_len = 6;
  RngStream rng(4, Purpose::training);
  return GeneratorModel::init(gc, rng);
}

bool is_codeword(const Vec& x, const Codebook& cb) {
  for (int k = 0; k < cb.size(); ++k)
    if (x == cb.codeword(k)) return true;
  return false;
}

}  // namespace

TEST_CASE("noise-free pseudo slides are codewords") {
  const auto fp = toy_footprint(0);
  RngStream rng(1, Purpose::replay);
  for (int i = 0; i < 20; ++i) {
    const auto p = synthesize_pseudo_wsi(fp, rng, 0.0);
    CHECK(p.count() >= 16);
    CHECK(p.count() <= 512);
    for (const auto& x : p.vectors) CHECK(is_codeword(x, fp.codebook));
  }
}

TEST_CASE("one-hot bank yields its hot bin") {
  auto fp = toy_footprint(0);
  fp.histogram_bank.histograms = {Vec::Unit(4, 2)};
  RngStream rng(2, Purpose::replay);
  const auto p = synthesize_pseudo_wsi(fp, rng, 0.0);
  for (const auto& x : p.vectors) CHECK(x == Vec(fp.codebook.codeword(2)));
}

TEST_CASE("code indices follow the histogram within 3 binomial standard errors") {
  auto fp = toy_footprint(0, 5);
  Vec h(5);
  h << 0.1, 0.35, 0.05, 0.3, 0.2;
  fp.histogram_bank.histograms = {h};
  fp.mu_n = 50000;
  fp.sigma_n = 0;
  RngStream rng(3, Purpose::replay);
  const auto p = synthesize_pseudo_wsi(fp, rng, 0.0, 16, 100000);
  REQUIRE(p.count() == 50000);
  std::vector<double> counts(5, 0);
  for (const auto& x : p.vectors)
    for (int k = 0; k < 5; ++k)
      if (x == fp.codebook.codeword(k)) counts[static_cast<std::size_t>(k)] += 1;
  for (int k = 0; k < 5; ++k) {
    const double se = std::sqrt(h(k) * (1 - h(k)) / 50000.0);
    CHECK(std::abs(counts[static_cast<std::size_t>(k)] / 50000.0 - h(k)) <= 3 * se);
  }
}

TEST_CASE("pseudo slide noise is bounded and scaled to codeword norms") {
  const auto fp = toy_footprint(1);
  const double sigma = noise_sigma(fp, 0.01);
  CHECK(sigma == doctest::Approx(0.01 * fp.codebook.codewords.colwise().norm().mean()));
  RngStream rng(4, Purpose::replay);
  for (int i = 0; i < 10; ++i) {
    const auto p = synthesize_pseudo_wsi(fp, rng, sigma);
    for (const auto& x : p.vectors) {
      double best = 1e300;
      for (int k = 0; k < fp.codebook.size(); ++k) best = std::min(best, (x - fp.codebook.codeword(k)).norm());
      CHECK(best <= 6 * sigma * std::sqrt(3.0));
    }
  }
}

TEST_CASE("empty bank is an error") {
  auto fp = toy_footprint(0);
  fp.histogram_bank.histograms.clear();
  RngStream rng(5, Purpose::replay);
  CHECK_THROWS_AS(synthesize_pseudo_wsi(fp, rng, 0.0), std::invalid_argument);
}

TEST_CASE("teacher pseudo reports are deterministic and leave the teacher untouched") {
  const auto teacher = toy_teacher(40);
  const auto fp = toy_footprint(0);
  RngStream rng(6, Purpose::replay);
  const auto p = synthesize_pseudo_wsi(fp, rng, 0.1);
  const auto before = teacher.checksum();
  const auto a = teacher_pseudo_report(teacher, p, {fp.organ_token}, fp.style.r);
  const auto b = teacher_pseudo_report(teacher, p, {fp.organ_token}, fp.style.r);
  CHECK(a.tokens == b.tokens);
  CHECK(teacher.checksum() == before);
  CHECK(a.tokens.size() <= 6);
}

TEST_CASE("teacher that emits only the end token is flagged") {
  GeneratorConfig gc;
  gc.vocab_size = 30;
  gc.slide_dim = 3;
  auto teacher = GeneratorModel::zeros(gc);
  teacher.params.output_bias(kEnd) = 5.0;
  const auto fp = toy_footprint(0);
  RngStream rng(7, Purpose::replay);
  const auto r = teacher_pseudo_report(teacher, synthesize_pseudo_wsi(fp, rng, 0.0), {fp.organ_token}, fp.style.r);
  CHECK(r.tokens == TokenSeq{kEnd});
  CHECK(r.empty_generation);
}

TEST_CASE("replay set counts, sources and determinism") {
  const auto teacher = toy_teacher(40);
  const std::vector<DomainFootprint> fps{toy_footprint(0), toy_footprint(1), toy_footprint(2)};
  const RngStream rng(8, Purpose::replay);
  ReplayConfig cfg;
  cfg.per_domain = 20;
  const auto set = build_replay_set(std::span(fps).first(2), 2, teacher, cfg, rng);
  CHECK(set.size() == 40);
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(set[i].source_domain == static_cast<int>(i / 20));
    CHECK(set[i].source_domain < 2);
    CHECK(set[i].prompt == TokenSeq{fps[static_cast<std::size_t>(set[i].source_domain)].organ_token});
    CHECK_FALSE(set[i].pseudo_report.empty());
  }
  const auto again = build_replay_set(std::span(fps).first(2), 2, teacher, cfg, rng);
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(set[i].patches.vectors == again[i].patches.vectors);
    CHECK(set[i].pseudo_report == again[i].pseudo_report);
  }

  CHECK(build_replay_set(fps, 0, teacher, cfg, rng).empty());

  const auto three = build_replay_set(fps, 3, teacher, cfg, rng);
  CHECK(three.size() == 60);
  for (const auto& s : three) CHECK(s.source_domain < 3);

  try {
    build_replay_set(std::span(fps).first(1), 2, teacher, cfg, rng);
    FAIL("expected missing-footprint error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("domain 1") != std::string::npos);
  }
}

TEST_CASE("noise-free replay patches are drawn from their own footprint's codewords") {
  const auto teacher = toy_teacher(40);
  const std::vector<DomainFootprint> fps{toy_footprint(0), toy_footprint(1)};
  ReplayConfig cfg;
  cfg.per_domain = 5;
  cfg.noise_scale = 0.0;
  for (const auto& s : build_replay_set(fps, 2, teacher, cfg, RngStream(9, Purpose::replay)))
    for (const auto& x : s.patches.vectors)
      CHECK(is_codeword(x, fps[static_cast<std::size_t>(s.source_domain)].codebook));
}
