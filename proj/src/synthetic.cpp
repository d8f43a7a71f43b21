#include "fgr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fgr {

namespace {
constexpr std::uint64_t kTrainTag = 0x7472;
constexpr std::uint64_t kTestTag = 0x7465;
}  // namespace

Vec PatchSet::mean() const {
  if (vectors.empty()) throw std::invalid_argument("PatchSet::mean: empty patch set");
  Vec m = Vec::Zero(vectors.front().size());
  for (const auto& v : vectors) m += v;
  return m / static_cast<double>(vectors.size());
}

void StreamConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("stream: episodes must be >= 1");
  if (train_per_episode < 1 || test_per_episode < 1) throw std::invalid_argument("stream: zero-size split");
  if (dim < 1) throw std::invalid_argument("stream: dim must be positive");
  if (components < 2) throw std::invalid_argument("stream: need at least 2 components per domain");
  if (!(separation > 0)) throw std::invalid_argument("stream: separation must be > 0");
  if (!(component_stddev > 0)) throw std::invalid_argument("stream: component_stddev must be > 0");
  if (!(dirichlet_alpha > 0)) throw std::invalid_argument("stream: dirichlet_alpha must be > 0");
  if (!(patch_count_mean >= 1) || !(patch_count_std >= 0)) throw std::invalid_argument("stream: bad patch count stats");
  if (patch_count_min < 1 || patch_count_max < patch_count_min) throw std::invalid_argument("stream: bad patch count bounds");
  if (episodes > vocab_domains) throw std::invalid_argument("stream: episodes exceed vocab_domains");
}

void DomainSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("DomainSpec: no components");
  if (dirichlet_alpha.size() != components.size() || keyword_vocab.size() != components.size())
    throw std::invalid_argument("DomainSpec: per-component lists disagree in length");
  for (const auto& c : components)
    if (!(c.stddev > 0) || !c.mean.allFinite()) throw std::invalid_argument("DomainSpec: bad component");
  if (!(patch_count_mean >= 1)) throw std::invalid_argument("DomainSpec: patch_count_mean must be >= 1");
  if (patch_count_min < 1 || patch_count_max < patch_count_min) throw std::invalid_argument("DomainSpec: bad clamp bounds");
}

namespace {
double mean_scale(const StreamConfig& config) {
  // typical pairwise distance of two N(0, a^2 I) draws is a*sqrt(2D); aim for 1.5x the minimum
  return 1.5 * config.separation * config.component_stddev / std::sqrt(2.0 * config.dim);
}
}  // namespace

Vec draw_shared_offset(const StreamConfig& config, RngStream& rng) {
  Vec v = Vec::Zero(config.dim);
  if (config.shared_offset == 0.0) return v;
  for (int i = 0; i < config.dim; ++i) v(i) = rng.normal();
  return v.normalized() * (config.shared_offset * mean_scale(config) * std::sqrt(static_cast<double>(config.dim)));
}

DomainSpec make_domain(const StreamConfig& config, int domain_id, RngStream& rng, const Vec* offset) {
  if (!(config.separation > 0)) throw std::invalid_argument("make_domain: separation must be > 0");
  if (config.components < 2) throw std::invalid_argument("make_domain: need at least 2 components");
  const Vocabulary vocab = config.vocabulary();

  DomainSpec spec;
  spec.domain_id = domain_id;
  spec.organ_token = vocab.organ(domain_id);
  spec.dirichlet_alpha.assign(static_cast<std::size_t>(config.components), config.dirichlet_alpha);
  spec.patch_count_mean = config.patch_count_mean;
  spec.patch_count_std = config.patch_count_std;
  spec.patch_count_min = config.patch_count_min;
  spec.patch_count_max = config.patch_count_max;
  spec.keyword_threshold = config.keyword_threshold;
  spec.style_id = config.style_mix == StyleMix::shared ? 0 : domain_id % 2;
  spec.keyword_vocab = vocab.keyword_entries(domain_id);

  const double min_dist = config.separation * config.component_stddev;
  const double scale = mean_scale(config);
  constexpr int kMaxAttempts = 10000;
  for (int c = 0; c < config.components; ++c) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts) throw std::runtime_error("make_domain: could not place separated component means");
      Vec m(config.dim);
      for (int i = 0; i < config.dim; ++i) m(i) = rng.normal(0.0, scale);
      const bool ok = std::all_of(spec.components.begin(), spec.components.end(), [&](const MorphologyComponent& o) {
        return (o.mean - (offset ? Vec(m + *offset) : m)).norm() >= min_dist;
      });
      if (ok) {
        if (offset) m += *offset;
        spec.components.push_back({std::move(m), config.component_stddev});
        break;
      }
    }
  }
  return spec;
}

int draw_patch_count(double mean, double stddev, int lo, int hi, RngStream& rng) {
  const double n = std::round(rng.normal(mean, stddev));
  return static_cast<int>(std::clamp(n, static_cast<double>(lo), static_cast<double>(hi)));
}

MixtureDraw draw_mixture_patches(const DomainSpec& spec, const std::vector<double>& weights, int count,
                                 RngStream& rng) {
  if (weights.size() != spec.components.size()) throw std::invalid_argument("draw_mixture_patches: weight count mismatch");
  MixtureDraw out;
  out.patches.vectors.reserve(static_cast<std::size_t>(count));
  out.assignments.reserve(static_cast<std::size_t>(count));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  for (int i = 0; i < count; ++i) {
    const int k = pick(rng.engine());
    const auto& comp = spec.components[static_cast<std::size_t>(k)];
    Vec x(comp.mean.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) x(d) = comp.mean(d) + rng.normal(0.0, comp.stddev);
    out.patches.vectors.push_back(std::move(x));
    out.assignments.push_back(k);
  }
  return out;
}

std::vector<int> dominant_components(const std::vector<double>& weights, double threshold) {
  std::vector<int> out;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (weights[k] > threshold) out.push_back(static_cast<int>(k));
  if (out.empty() && !weights.empty())
    out.push_back(static_cast<int>(std::max_element(weights.begin(), weights.end()) - weights.begin()));
  return out;
}

Slide sample_slide(const DomainSpec& spec, RngStream& rng) {
  spec.validate();
  const int n = draw_patch_count(spec.patch_count_mean, spec.patch_count_std, spec.patch_count_min,
                                 spec.patch_count_max, rng);
  const auto weights = rng.dirichlet(spec.dirichlet_alpha);
  Slide s;
  s.patches = draw_mixture_patches(spec, weights, n, rng).patches;
  s.domain_id = spec.domain_id;
  s.prompt = {spec.organ_token};
  for (int k : dominant_components(weights, spec.keyword_threshold))
    s.keywords.push_back(spec.keyword_vocab[static_cast<std::size_t>(k)]);
  s.report = render_report(spec.style_id, spec.organ_token, s.keywords);
  return s;
}

std::vector<EpisodeData> make_stream(const StreamConfig& config, const RngStream& data_rng) {
  config.validate();
  if (config.episodes < 2) throw std::invalid_argument("make_stream: need at least 2 episodes");
  RngStream offset_rng = data_rng.fork(0x0ff5e7);
  const Vec offset = draw_shared_offset(config, offset_rng);
  std::vector<EpisodeData> stream;
  stream.reserve(static_cast<std::size_t>(config.episodes));
  for (int t = 0; t < config.episodes; ++t) {
    const RngStream episode_rng = data_rng.fork(static_cast<std::uint64_t>(t));
    RngStream spec_rng = episode_rng.fork(0x5bec);
    EpisodeData ep;
    ep.spec = make_domain(config, t, spec_rng, &offset);
    const RngStream train_rng = episode_rng.fork(kTrainTag);
    const RngStream test_rng = episode_rng.fork(kTestTag);
    for (int i = 0; i < config.train_per_episode; ++i) {
      RngStream r = train_rng.fork(static_cast<std::uint64_t>(i));
      ep.train.push_back(sample_slide(ep.spec, r));
    }
    for (int i = 0; i < config.test_per_episode; ++i) {
      RngStream r = test_rng.fork(static_cast<std::uint64_t>(i));
      ep.test.push_back(sample_slide(ep.spec, r));
    }
    stream.push_back(std::move(ep));
  }
  return stream;
}

}  // namespace fgr
