#include "fgr/replay.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace fgr {

double noise_sigma(const DomainFootprint& fp, double noise_scale) {
  if (fp.codebook.size() == 0) return 0.0;
  return noise_scale * fp.codebook.codewords.colwise().norm().mean();
}

PatchSet synthesize_pseudo_wsi(const DomainFootprint& fp, RngStream& rng, double sigma_noise, int patch_count_min,
                               int patch_count_max) {
  const auto& bank = fp.histogram_bank.histograms;
  if (bank.empty())
    throw std::invalid_argument("synthesize_pseudo_wsi: empty histogram bank for domain " + std::to_string(fp.domain_id));
  if (!(sigma_noise >= 0)) throw std::invalid_argument("synthesize_pseudo_wsi: negative noise");
  const int n = draw_patch_count(fp.mu_n, fp.sigma_n, patch_count_min, patch_count_max, rng);
  const Vec& h = bank[rng.index(bank.size())];
  std::discrete_distribution<int> pick(h.data(), h.data() + h.size());
  PatchSet out;
  out.vectors.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec x = fp.codebook.codeword(pick(rng.engine()));
    if (sigma_noise > 0)
      for (Eigen::Index d = 0; d < x.size(); ++d) x(d) += rng.normal(0.0, sigma_noise);
    out.vectors.push_back(std::move(x));
  }
  return out;
}

TeacherReport teacher_pseudo_report(const GeneratorModel& teacher, const PatchSet& patches, const TokenSeq& prompt,
                                    const Vec& style) {
  TeacherReport r;
  r.tokens = decode_greedy(teacher, patches, style, prompt);
  if (r.tokens.empty() || (r.tokens.size() == 1 && r.tokens.front() == kEnd)) {
    r.tokens = {kEnd};
    r.empty_generation = true;
  }
  return r;
}

std::vector<PseudoSample> build_replay_set(std::span<const DomainFootprint> footprints, int current_episode,
                                           const GeneratorModel& teacher, const ReplayConfig& config,
                                           const RngStream& rng) {
  std::vector<PseudoSample> out;
  if (current_episode < 1) return out;
  if (config.per_domain < 0) throw std::invalid_argument("build_replay_set: negative per-domain count");
  for (int j = 0; j < current_episode; ++j) {
    const auto it = std::find_if(footprints.begin(), footprints.end(),
                                 [j](const DomainFootprint& f) { return f.domain_id == j; });
    if (it == footprints.end())
      throw std::invalid_argument("build_replay_set: missing footprint for domain " + std::to_string(j));
    const double sigma = noise_sigma(*it, config.noise_scale);
    for (int k = 0; k < config.per_domain; ++k) {
      RngStream sample_rng = rng.fork((static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint64_t>(k));
      PseudoSample s;
      s.source_domain = j;
      s.prompt = {it->organ_token};
      s.patches = synthesize_pseudo_wsi(*it, sample_rng, sigma, config.patch_count_min, config.patch_count_max);
      auto rep = teacher_pseudo_report(teacher, s.patches, s.prompt, it->style.r);
      s.pseudo_report = std::move(rep.tokens);
      s.empty_generation = rep.empty_generation;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace fgr
