#pragma once

#include "fgr/numeric.hpp"
#include "fgr/rng.hpp"
#include "fgr/vocab.hpp"

#include <string>
#include <vector>

namespace fgr {

/// Variable-length set of patch embeddings standing in for one slide.
struct PatchSet {
  std::vector<Vec> vectors;

  std::size_t count() const { return vectors.size(); }
  Eigen::Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
  Vec mean() const;
};

enum class StyleMix { shared, alternating };

struct StreamConfig {
  int episodes = 4;
  int train_per_episode = 200;
  int test_per_episode = 50;
  int dim = 32;
  int components = 5;
  double separation = 8.0;
  /// Norm of a stream-wide offset added to every component mean, in units of
  /// the per-coordinate mean scale times sqrt(dim).
  double shared_offset = 3.0;
  double component_stddev = 1.0;
  double dirichlet_alpha = 0.5;
  double patch_count_mean = 120.0;
  double patch_count_std = 30.0;
  int patch_count_min = 16;
  int patch_count_max = 512;
  double keyword_threshold = 0.2;
  StyleMix style_mix = StyleMix::alternating;
  int vocab_domains = 16;

  Vocabulary vocabulary() const { return Vocabulary(vocab_domains, components); }
  void validate() const;
};

struct MorphologyComponent {
  Vec mean;
  double stddev = 1.0;
};

struct DomainSpec {
  int domain_id = 0;
  Token organ_token = 0;
  std::vector<MorphologyComponent> components;
  std::vector<double> dirichlet_alpha;
  double patch_count_mean = 120.0;
  double patch_count_std = 30.0;
  int patch_count_min = 16;
  int patch_count_max = 512;
  double keyword_threshold = 0.2;
  int style_id = 0;
  std::vector<TokenSeq> keyword_vocab;

  void validate() const;
};

struct Slide {
  PatchSet patches;
  TokenSeq report;
  TokenSeq prompt;
  std::vector<TokenSeq> keywords;
  int domain_id = 0;
};

struct EpisodeData {
  DomainSpec spec;
  std::vector<Slide> train;
  std::vector<Slide> test;
};

/// Draws component means at distance >= separation * stddev from each other,
/// then shifts them by `offset` when given.
DomainSpec make_domain(const StreamConfig& config, int domain_id, RngStream& rng, const Vec* offset = nullptr);

/// Stream-wide mean offset (zero when config.shared_offset == 0).
Vec draw_shared_offset(const StreamConfig& config, RngStream& rng);

/// Patch count N ~ round(Normal(mean, std^2)) clamped to [lo, hi].
int draw_patch_count(double mean, double stddev, int lo, int hi, RngStream& rng);

struct MixtureDraw {
  PatchSet patches;
  std::vector<int> assignments;
};

MixtureDraw draw_mixture_patches(const DomainSpec& spec, const std::vector<double>& weights, int count,
                                 RngStream& rng);

/// Components whose weight exceeds the keyword threshold; the heaviest
/// component when none does. Ascending component order.
std::vector<int> dominant_components(const std::vector<double>& weights, double threshold);

Slide sample_slide(const DomainSpec& spec, RngStream& rng);

/// One (train, test) split per episode. Slide i of a split draws from its
/// own substream keyed by (episode, split, i).
std::vector<EpisodeData> make_stream(const StreamConfig& config, const RngStream& data_rng);

}  // namespace fgr
