#pragma once

#include "fgr/footprint.hpp"
#include "fgr/generator.hpp"
#include "fgr/metrics.hpp"
#include "fgr/replay.hpp"
#include "fgr/synthetic.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fgr {

enum class StrategyKind { naive, er, cumulative, footprint_replay };

struct Strategy {
  StrategyKind kind = StrategyKind::footprint_replay;
  int buffer = 32;             // er
  double lambda = 1.0;         // footprint_replay
  int pseudo_per_domain = 20;  // footprint_replay
  double noise_scale = 0.01;   // footprint_replay, fraction of mean codeword norm

  void validate() const;
  std::string name() const;
};

StrategyKind parse_strategy_kind(const std::string& name);
std::string strategy_kind_name(StrategyKind kind);

/// One seed per random purpose; streams never share draws.
struct Seeds {
  std::uint64_t data = 0;
  std::uint64_t kmeans = 0;
  std::uint64_t replay = 0;
  std::uint64_t training = 0;
  std::uint64_t decoding = 0;

  static Seeds from(std::uint64_t seed) { return {seed, seed, seed, seed, seed}; }
};

struct HarnessConfig {
  GeneratorConfig generator;
  FootprintConfig footprint;
  int epochs = 10;
  double lr = 0.05;
  int patch_count_min = 16;
  int patch_count_max = 512;
  /// Keyword entries that count towards key_score precision.
  std::vector<TokenSeq> keyword_vocabulary;
};

struct EpisodeLog {
  int episode = 0;
  std::vector<double> epoch_losses;
  int real_samples = 0;
  int pseudo_samples = 0;
  int empty_pseudo_reports = 0;
  /// domain_id of every real sample that entered a training step this episode.
  std::vector<int> real_sample_domains;
};

struct EpisodeState {
  /// Completed episodes; the next episode trains domain `episode`.
  int episode = 0;
  GeneratorModel model;
  std::optional<GeneratorModel> teacher;
  std::vector<DomainFootprint> footprints;
  std::vector<Slide> er_buffer;
  std::size_t er_seen = 0;
  /// Every real slide seen so far (cumulative only); points into caller-owned data.
  std::vector<const Slide*> history;
  std::vector<EpisodeLog> log;
};

EpisodeState initial_state(const HarnessConfig& config, const Seeds& seeds);

/// Builds the episode's footprint, assembles the strategy's training pool,
/// trains for config.epochs, then refreshes the teacher snapshot (replay)
/// or reservoir buffer (er). `data` must outlive the returned state when the
/// strategy is cumulative.
EpisodeState run_episode(EpisodeState state, const EpisodeData& data, const Strategy& strategy,
                         const HarnessConfig& config, const Seeds& seeds);

struct SplitEvaluation {
  double mean_composite = 0.0;
  double routing_accuracy = 0.0;
  std::vector<SlideScores> per_slide;
  std::vector<int> routed_domain;
  std::vector<TokenSeq> generated;
};

/// Routes each slide to a footprint by quantization error, conditions on the
/// routed style prototype and scores the greedy report.
SplitEvaluation evaluate_split(const GeneratorModel& model, std::span<const DomainFootprint> footprints,
                               std::span<const Slide> slides, const FrozenTextEncoder& encoder,
                               const std::vector<TokenSeq>& keyword_vocabulary);

struct StreamResult {
  EpisodeState state;
  ScoreMatrix matrix;
  ClMetrics metrics;
};

using EpisodeCallback = std::function<void(const EpisodeState&, const std::vector<SplitEvaluation>&)>;

/// Runs every episode in order and fills R(t, j) for all T test splits.
StreamResult run_stream(const std::vector<EpisodeData>& stream, const Strategy& strategy, const HarnessConfig& config,
                        const Seeds& seeds, const EpisodeCallback& on_episode = {});

}  // namespace fgr
