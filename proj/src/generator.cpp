#include "fgr/generator.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace fgr {

void GeneratorConfig::validate() const {
  if (vocab_size < 3 || embed_dim < 1 || window < 1 || cond_dim < 1 || style_slots < 1 || slide_dim < 1 ||
      text_dim < 1 || max_decode_len < 1)
    throw std::invalid_argument("GeneratorConfig: all sizes must be positive (vocab_size >= 3)");
}

GeneratorParams GeneratorParams::zeros(const GeneratorConfig& c) {
  c.validate();
  GeneratorParams p;
  p.embedding = Mat::Zero(c.vocab_size, c.embed_dim);
  p.slide_weight = Mat::Zero(c.cond_dim, c.slide_dim);
  p.slide_bias = Vec::Zero(c.cond_dim);
  p.style_weight = Mat::Zero(c.style_slots * c.cond_dim, c.text_dim);
  p.style_bias = Vec::Zero(c.style_slots * c.cond_dim);
  p.output_weight = Mat::Zero(c.vocab_size, c.input_size());
  p.output_bias = Vec::Zero(c.vocab_size);
  return p;
}

GeneratorModel GeneratorModel::zeros(const GeneratorConfig& config) { return {config, GeneratorParams::zeros(config)}; }

GeneratorModel GeneratorModel::init(const GeneratorConfig& config, RngStream& rng) {
  GeneratorModel m = zeros(config);
  auto fill = [&rng](Mat& w, double sd) {
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.normal(0.0, sd);
  };
  fill(m.params.embedding, 0.1);
  fill(m.params.slide_weight, 1.0 / std::sqrt(static_cast<double>(config.slide_dim)));
  fill(m.params.style_weight, 1.0 / std::sqrt(static_cast<double>(config.text_dim)));
  fill(m.params.output_weight, 0.01);
  return m;
}

bool GeneratorModel::all_finite() const {
  bool ok = true;
  for_each_param(params, [&ok](const char*, const auto& p) { ok = ok && p.allFinite(); });
  return ok;
}

std::uint64_t GeneratorModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_param(params, [&h](const char*, const auto& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      std::uint64_t bits;
      const double v = p.data()[i];
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    }
  });
  return h;
}

Vec encode_condition(const GeneratorModel& model, const PatchSet& patches, const Vec& style) {
  const auto& c = model.config;
  if (patches.count() == 0) throw std::invalid_argument("encode_condition: empty patch set");
  if (patches.dim() != c.slide_dim)
    throw std::invalid_argument("encode_condition: patch dimension " + std::to_string(patches.dim()) +
                                " != slide_dim " + std::to_string(c.slide_dim));
  if (style.size() != c.text_dim)
    throw std::invalid_argument("encode_condition: style dimension " + std::to_string(style.size()) +
                                " != text_dim " + std::to_string(c.text_dim));
  Vec cond(c.condition_size());
  cond.head(c.cond_dim) = linear_forward(model.params.slide_weight, model.params.slide_bias, patches.mean());
  cond.tail(c.style_slots * c.cond_dim) = linear_forward(model.params.style_weight, model.params.style_bias, style);
  return cond;
}

TokenSeq context_window(const TokenSeq& tokens, std::size_t pos, int window) {
  TokenSeq w(static_cast<std::size_t>(window), kPad);
  for (int s = 0; s < window; ++s) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos) - window + s;
    if (src >= 0) w[static_cast<std::size_t>(s)] = tokens[static_cast<std::size_t>(src)];
  }
  return w;
}

namespace {

void check_token(const GeneratorConfig& c, Token t) {
  if (t < 0 || t >= c.vocab_size)
    throw std::out_of_range("token " + std::to_string(t) + " outside vocabulary of size " + std::to_string(c.vocab_size));
}

void fill_input(const GeneratorModel& model, const Vec& condition, const TokenSeq& window,
                Eigen::Ref<Vec> input) {
  const auto& c = model.config;
  for (int s = 0; s < c.window; ++s) {
    check_token(c, window[static_cast<std::size_t>(s)]);
    input.segment(s * c.embed_dim, c.embed_dim) = model.params.embedding.row(window[static_cast<std::size_t>(s)]).transpose();
  }
  input.tail(c.condition_size()) = condition;
}

}  // namespace

Vec forward(const GeneratorModel& model, const Vec& condition, const TokenSeq& window) {
  const auto& c = model.config;
  if (static_cast<int>(window.size()) != c.window) throw std::invalid_argument("forward: window length mismatch");
  if (condition.size() != c.condition_size()) throw std::invalid_argument("forward: condition size mismatch");
  Vec input(c.input_size());
  fill_input(model, condition, window, input);
  return linear_forward(model.params.output_weight, model.params.output_bias, input);
}

LossAndGrad masked_token_loss(const GeneratorModel& model, const PatchSet& patches, const Vec& style,
                              const TokenSeq& inputs, const TokenSeq& labels, const std::vector<bool>& mask) {
  const auto& c = model.config;
  if (inputs.size() != labels.size() || inputs.size() != mask.size())
    throw std::invalid_argument("masked_token_loss: inputs, labels and mask differ in length");
  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < mask.size(); ++p)
    if (mask[p]) positions.push_back(p);
  if (positions.empty()) throw std::invalid_argument("masked_token_loss: no scored positions");

  const Vec cond = encode_condition(model, patches, style);
  const auto L = static_cast<Eigen::Index>(positions.size());
  Mat h(c.input_size(), L);
  std::vector<TokenSeq> windows(positions.size());
  for (Eigen::Index l = 0; l < L; ++l) {
    const std::size_t p = positions[static_cast<std::size_t>(l)];
    check_token(c, labels[p]);
    windows[static_cast<std::size_t>(l)] = context_window(inputs, p, c.window);
    fill_input(model, cond, windows[static_cast<std::size_t>(l)], h.col(l));
  }
  Mat logits = model.params.output_weight * h;
  logits.colwise() += model.params.output_bias;

  LossAndGrad out{0.0, GeneratorParams::zeros(c)};
  Mat g(c.vocab_size, L);
  const double inv_l = 1.0 / static_cast<double>(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const Token target = labels[positions[static_cast<std::size_t>(l)]];
    out.loss += cross_entropy(logits.col(l), target);
    g.col(l) = cross_entropy_grad(logits.col(l), target) * inv_l;
  }
  out.loss *= inv_l;

  auto& gr = out.grads;
  gr.output_weight.noalias() = g * h.transpose();
  gr.output_bias = g.rowwise().sum();
  const Mat dh = model.params.output_weight.transpose() * g;
  for (Eigen::Index l = 0; l < L; ++l)
    for (int s = 0; s < c.window; ++s)
      gr.embedding.row(windows[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)]) +=
          dh.col(l).segment(s * c.embed_dim, c.embed_dim).transpose();
  const Vec dcond = dh.bottomRows(c.condition_size()).rowwise().sum();
  const Vec dslide = dcond.head(c.cond_dim);
  const Vec dstyle = dcond.tail(c.style_slots * c.cond_dim);
  const auto slide_g = linear_backward(model.params.slide_weight, patches.mean(), dslide);
  gr.slide_weight = slide_g.dW;
  gr.slide_bias = slide_g.db;
  const auto style_g = linear_backward(model.params.style_weight, style, dstyle);
  gr.style_weight = style_g.dW;
  gr.style_bias = style_g.db;
  return out;
}

LossAndGrad sequence_loss(const GeneratorModel& model, const PatchSet& patches, const Vec& style,
                          const TokenSeq& prompt, const TokenSeq& report) {
  if (report.empty()) throw std::invalid_argument("sequence_loss: empty report");
  TokenSeq seq = prompt;
  seq.insert(seq.end(), report.begin(), report.end());
  std::vector<bool> mask(seq.size(), false);
  std::fill(mask.begin() + static_cast<std::ptrdiff_t>(prompt.size()), mask.end(), true);
  return masked_token_loss(model, patches, style, seq, seq, mask);
}

EpochStats train_pass(GeneratorModel& model, std::span<const TrainingSample> samples,
                      std::span<const std::size_t> order, double lr) {
  if (!(lr > 0)) throw std::invalid_argument("train_pass: learning rate must be > 0");
  EpochStats stats;
  double total = 0.0;
  for (std::size_t idx : order) {
    if (idx >= samples.size()) throw std::out_of_range("train_pass: order index out of range");
    const auto& s = samples[idx];
    if (s.weight == 0.0) continue;
    if (!s.patches) throw std::invalid_argument("train_pass: sample without patches");
    auto lg = sequence_loss(model, *s.patches, s.style, s.prompt, s.report);
    if (!std::isfinite(lg.loss)) throw std::runtime_error("train_pass: non-finite loss at sample " + std::to_string(idx));
    total += lg.loss;
    ++stats.steps;
    const double step = lr * s.weight;
    auto apply = [&](const char* name, auto& param, const auto& grad) { sgd_step(param, grad, step, name); };
    apply("embedding", model.params.embedding, lg.grads.embedding);
    apply("slide_weight", model.params.slide_weight, lg.grads.slide_weight);
    apply("slide_bias", model.params.slide_bias, lg.grads.slide_bias);
    apply("style_weight", model.params.style_weight, lg.grads.style_weight);
    apply("style_bias", model.params.style_bias, lg.grads.style_bias);
    apply("output_weight", model.params.output_weight, lg.grads.output_weight);
    apply("output_bias", model.params.output_bias, lg.grads.output_bias);
  }
  stats.mean_loss = stats.steps ? total / stats.steps : 0.0;
  return stats;
}

EpochStats train_epoch(GeneratorModel& model, std::span<const TrainingSample> samples, double lr, RngStream& rng) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  return train_pass(model, samples, order, lr);
}

TokenSeq decode_greedy(const GeneratorModel& model, const PatchSet& patches, const Vec& style, const TokenSeq& prompt) {
  const auto& c = model.config;
  const Vec cond = encode_condition(model, patches, style);
  TokenSeq seq = prompt;
  TokenSeq out;
  Vec input(c.input_size());
  for (int step = 0; step < c.max_decode_len; ++step) {
    fill_input(model, cond, context_window(seq, seq.size(), c.window), input);
    const Vec logits = model.params.output_weight * input + model.params.output_bias;
    Eigen::Index best = 0;
    for (Eigen::Index v = 1; v < logits.size(); ++v)
      if (logits(v) > logits(best)) best = v;
    const auto tok = static_cast<Token>(best);
    seq.push_back(tok);
    out.push_back(tok);
    if (tok == kEnd) break;
  }
  return out;
}

}  // namespace fgr
