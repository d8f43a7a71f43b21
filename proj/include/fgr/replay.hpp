#pragma once

#include "fgr/footprint.hpp"
#include "fgr/generator.hpp"

#include <span>
#include <vector>

namespace fgr {

struct PseudoSample {
  PatchSet patches;
  TokenSeq pseudo_report;
  int source_domain = 0;
  TokenSeq prompt;
  /// Teacher produced only the end token.
  bool empty_generation = false;
};

struct ReplayConfig {
  int per_domain = 20;
  /// Noise stddev as a fraction of the mean codeword norm.
  double noise_scale = 0.01;
  int patch_count_min = 16;
  int patch_count_max = 512;
};

/// noise_scale times the mean l2 norm of the footprint's codewords.
double noise_sigma(const DomainFootprint& fp, double noise_scale);

/// Pseudo slide: N from the patch-count stats, one histogram drawn uniformly
/// from the bank, N code indices drawn from it, codewords plus Gaussian noise.
PatchSet synthesize_pseudo_wsi(const DomainFootprint& fp, RngStream& rng, double sigma_noise, int patch_count_min = 16,
                               int patch_count_max = 512);

struct TeacherReport {
  TokenSeq tokens;
  bool empty_generation = false;
};

TeacherReport teacher_pseudo_report(const GeneratorModel& teacher, const PatchSet& patches, const TokenSeq& prompt,
                                    const Vec& style);

/// per_domain pseudo samples for every past domain j < current_episode, in
/// domain order. Each sample draws from its own substream of rng.
std::vector<PseudoSample> build_replay_set(std::span<const DomainFootprint> footprints, int current_episode,
                                           const GeneratorModel& teacher, const ReplayConfig& config,
                                           const RngStream& rng);

}  // namespace fgr
