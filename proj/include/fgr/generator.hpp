#pragma once

#include "fgr/numeric.hpp"
#include "fgr/rng.hpp"
#include "fgr/synthetic.hpp"
#include "fgr/vocab.hpp"

#include <span>
#include <vector>

namespace fgr {

struct GeneratorConfig {
  int vocab_size = 0;
  int embed_dim = 16;
  int window = 3;
  int cond_dim = 32;
  int style_slots = 4;
  int slide_dim = 32;
  int text_dim = 32;
  int max_decode_len = 32;

  int condition_size() const { return (style_slots + 1) * cond_dim; }
  int input_size() const { return window * embed_dim + condition_size(); }
  void validate() const;
};

/// Parameter tensors of the decoder. Gradients reuse the same layout.
struct GeneratorParams {
  Mat embedding;      // V x embed_dim
  Mat slide_weight;   // cond_dim x slide_dim
  Vec slide_bias;     // cond_dim
  Mat style_weight;   // style_slots*cond_dim x text_dim
  Vec style_bias;     // style_slots*cond_dim
  Mat output_weight;  // V x input_size
  Vec output_bias;    // V

  static GeneratorParams zeros(const GeneratorConfig& config);
};

template <typename Params, typename F>
void for_each_param(Params& p, F&& f) {
  f("embedding", p.embedding);
  f("slide_weight", p.slide_weight);
  f("slide_bias", p.slide_bias);
  f("style_weight", p.style_weight);
  f("style_bias", p.style_bias);
  f("output_weight", p.output_weight);
  f("output_bias", p.output_bias);
}

struct GeneratorModel {
  GeneratorConfig config;
  GeneratorParams params;

  static GeneratorModel zeros(const GeneratorConfig& config);
  /// Small random weights, zero biases.
  static GeneratorModel init(const GeneratorConfig& config, RngStream& rng);

  bool all_finite() const;
  /// Order-sensitive hash of every parameter bit pattern.
  std::uint64_t checksum() const;
};

/// [slide projection of the mean patch ; style projection of r reshaped to M blocks].
Vec encode_condition(const GeneratorModel& model, const PatchSet& patches, const Vec& style);

/// Last `window` tokens before `pos`, left-padded.
TokenSeq context_window(const TokenSeq& tokens, std::size_t pos, int window);

Vec forward(const GeneratorModel& model, const Vec& condition, const TokenSeq& window);

struct LossAndGrad {
  double loss = 0.0;
  GeneratorParams grads;
};

/// Teacher-forced mean cross-entropy over positions with mask set. Position p
/// reads the window of `inputs` before p and is scored against labels[p].
LossAndGrad masked_token_loss(const GeneratorModel& model, const PatchSet& patches, const Vec& style,
                              const TokenSeq& inputs, const TokenSeq& labels, const std::vector<bool>& mask);

/// Loss over report positions of [prompt; report]; prompt positions are masked.
LossAndGrad sequence_loss(const GeneratorModel& model, const PatchSet& patches, const Vec& style,
                          const TokenSeq& prompt, const TokenSeq& report);

struct TrainingSample {
  const PatchSet* patches = nullptr;
  Vec style;
  TokenSeq prompt;
  TokenSeq report;
  double weight = 1.0;
  int domain_id = 0;
  bool pseudo = false;
};

struct EpochStats {
  double mean_loss = 0.0;  // unweighted mean over visited samples
  int steps = 0;
};

/// One SGD pass in the given order; each step uses weight * grad. Samples
/// with weight 0 are skipped.
EpochStats train_pass(GeneratorModel& model, std::span<const TrainingSample> samples,
                      std::span<const std::size_t> order, double lr);

/// train_pass over a shuffle drawn from rng.
EpochStats train_epoch(GeneratorModel& model, std::span<const TrainingSample> samples, double lr, RngStream& rng);

/// Argmax decoding after the prompt, lowest index on ties. Stops after the
/// end token (which is kept) or max_decode_len tokens.
TokenSeq decode_greedy(const GeneratorModel& model, const PatchSet& patches, const Vec& style, const TokenSeq& prompt);

}  // namespace fgr
