#include "fgr/harness.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fgr {

namespace {
constexpr std::uint64_t kInitTag = 0x1a17;
constexpr std::uint64_t kInterleaveTag = 0x1e7e;
constexpr std::uint64_t kReservoirTag = 0x4e5e;

const DomainFootprint& footprint_for(const std::vector<DomainFootprint>& fps, int domain) {
  for (const auto& f : fps)
    if (f.domain_id == domain) return f;
  throw std::invalid_argument("no footprint for domain " + std::to_string(domain));
}

TrainingSample real_sample(const Slide& s, const std::vector<DomainFootprint>& fps) {
  return {&s.patches, footprint_for(fps, s.domain_id).style.r, s.prompt, s.report, 1.0, s.domain_id, false};
}
}  // namespace

void Strategy::validate() const {
  if (kind == StrategyKind::er && buffer <= 0) throw std::invalid_argument("strategy er: buffer must be > 0");
  if (kind == StrategyKind::footprint_replay) {
    if (!(lambda >= 0)) throw std::invalid_argument("strategy footprint_replay: lambda must be >= 0");
    if (pseudo_per_domain < 0) throw std::invalid_argument("strategy footprint_replay: pseudo_per_domain must be >= 0");
    if (!(noise_scale >= 0)) throw std::invalid_argument("strategy footprint_replay: noise_scale must be >= 0");
  }
}

std::string strategy_kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::naive: return "naive";
    case StrategyKind::er: return "er";
    case StrategyKind::cumulative: return "cumulative";
    case StrategyKind::footprint_replay: return "footprint_replay";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(const std::string& name) {
  for (auto k : {StrategyKind::naive, StrategyKind::er, StrategyKind::cumulative, StrategyKind::footprint_replay})
    if (strategy_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected naive, er, cumulative or footprint_replay)");
}

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::er: return "er(B=" + std::to_string(buffer) + ")";
    case StrategyKind::footprint_replay: return "footprint_replay(lambda=" + std::to_string(lambda) + ")";
    default: return strategy_kind_name(kind);
  }
}

EpisodeState initial_state(const HarnessConfig& config, const Seeds& seeds) {
  EpisodeState s;
  RngStream init_rng = RngStream(seeds.training, Purpose::training).fork(kInitTag);
  s.model = GeneratorModel::init(config.generator, init_rng);
  return s;
}

EpisodeState run_episode(EpisodeState state, const EpisodeData& data, const Strategy& strategy,
                         const HarnessConfig& config, const Seeds& seeds) {
  strategy.validate();
  if (data.train.empty()) throw std::invalid_argument("run_episode: empty episode data");
  if (!(config.lr > 0) || config.epochs < 0) throw std::invalid_argument("run_episode: bad lr/epochs");
  const int t = state.episode;
  const int domain = data.spec.domain_id;
  const auto ep_tag = static_cast<std::uint64_t>(t);
  for (const auto& s : data.train)
    if (s.domain_id != domain) throw std::invalid_argument("run_episode: training slide from another domain");
  for (const auto& f : state.footprints)
    if (f.domain_id == domain)
      throw std::invalid_argument("run_episode: footprint for domain " + std::to_string(domain) + " already exists");

  const FrozenTextEncoder encoder(config.generator.vocab_size, config.generator.text_dim);
  RngStream kmeans_rng = RngStream(seeds.kmeans, Purpose::kmeans).fork(ep_tag);
  state.footprints.push_back(build_footprint(data.train, config.footprint, encoder, kmeans_rng));

  std::vector<TrainingSample> samples;
  for (const auto& s : data.train) samples.push_back(real_sample(s, state.footprints));
  switch (strategy.kind) {
    case StrategyKind::er:
      for (const auto& s : state.er_buffer) samples.push_back(real_sample(s, state.footprints));
      break;
    case StrategyKind::cumulative:
      for (const Slide* s : state.history) samples.push_back(real_sample(*s, state.footprints));
      break;
    default:
      break;
  }
  const std::size_t real_count = samples.size();

  const RngStream replay_rng = RngStream(seeds.replay, Purpose::replay).fork(ep_tag);
  std::vector<PseudoSample> pseudo;
  std::uint64_t teacher_sum = 0;
  EpisodeLog log;
  log.episode = t;
  if (strategy.kind == StrategyKind::footprint_replay) {
    for (std::size_t i = 0; i < real_count; ++i)
      if (samples[i].domain_id != domain)
        throw std::logic_error("footprint_replay: real sample from past domain " + std::to_string(samples[i].domain_id) +
                               " in episode " + std::to_string(t));
    if (t >= 1) {
      if (!state.teacher) throw std::invalid_argument("footprint_replay: no teacher snapshot for episode " + std::to_string(t));
      teacher_sum = state.teacher->checksum();
      ReplayConfig rc{strategy.pseudo_per_domain, strategy.noise_scale, config.patch_count_min, config.patch_count_max};
      const std::vector<DomainFootprint> past(state.footprints.begin(), state.footprints.end() - 1);
      pseudo = build_replay_set(past, t, *state.teacher, rc, replay_rng.fork(0));
      for (const auto& p : pseudo) {
        samples.push_back({&p.patches, footprint_for(state.footprints, p.source_domain).style.r, p.prompt,
                           p.pseudo_report, strategy.lambda, p.source_domain, true});
        log.empty_pseudo_reports += p.empty_generation ? 1 : 0;
      }
    }
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].weight == 0.0) continue;
    if (samples[i].pseudo)
      ++log.pseudo_samples;
    else
      log.real_sample_domains.push_back(samples[i].domain_id);
  }
  log.real_samples = static_cast<int>(log.real_sample_domains.size());

  // Real samples are shuffled by the training stream; pseudo samples are
  // interleaved by the replay stream, which leaves the real order untouched.
  RngStream train_rng = RngStream(seeds.training, Purpose::training).fork(ep_tag);
  RngStream interleave_rng = replay_rng.fork(kInterleaveTag);
  for (int e = 0; e < config.epochs; ++e) {
    std::vector<std::size_t> order(real_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    train_rng.shuffle(order);
    if (!pseudo.empty()) {
      std::vector<std::size_t> extra(samples.size() - real_count);
      std::iota(extra.begin(), extra.end(), real_count);
      interleave_rng.shuffle(extra);
      for (std::size_t idx : extra) {
        const auto pos = static_cast<std::ptrdiff_t>(interleave_rng.index(order.size() + 1));
        order.insert(order.begin() + pos, idx);
      }
    }
    log.epoch_losses.push_back(train_pass(state.model, samples, order, config.lr).mean_loss);
  }

  if (strategy.kind == StrategyKind::footprint_replay && t >= 1 && state.teacher->checksum() != teacher_sum)
    throw std::logic_error("teacher parameters changed during episode " + std::to_string(t));

  switch (strategy.kind) {
    case StrategyKind::footprint_replay:
      state.teacher = state.model;
      break;
    case StrategyKind::er: {
      RngStream res_rng = replay_rng.fork(kReservoirTag);
      const auto cap = static_cast<std::size_t>(strategy.buffer);
      for (const auto& s : data.train) {
        ++state.er_seen;
        if (state.er_buffer.size() < cap) {
          state.er_buffer.push_back(s);
        } else {
          const std::size_t j = res_rng.index(state.er_seen);
          if (j < cap) state.er_buffer[j] = s;
        }
      }
      break;
    }
    case StrategyKind::cumulative:
      for (const auto& s : data.train) state.history.push_back(&s);
      break;
    case StrategyKind::naive:
      break;
  }
  state.log.push_back(std::move(log));
  ++state.episode;
  return state;
}

SplitEvaluation evaluate_split(const GeneratorModel& model, std::span<const DomainFootprint> footprints,
                               std::span<const Slide> slides, const FrozenTextEncoder& encoder,
                               const std::vector<TokenSeq>& keyword_vocabulary) {
  SplitEvaluation ev;
  if (slides.empty()) return ev;
  int correct = 0;
  double total = 0.0;
  for (const auto& s : slides) {
    const int routed = route_domain(s.patches, footprints);
    const auto it = std::find_if(footprints.begin(), footprints.end(),
                                 [routed](const DomainFootprint& f) { return f.domain_id == routed; });
    TokenSeq gen = decode_greedy(model, s.patches, it->style.r, s.prompt);
    const auto scores = score_report(gen, s.report, s.keywords, keyword_vocabulary, encoder);
    total += scores.composite;
    correct += routed == s.domain_id ? 1 : 0;
    ev.per_slide.push_back(scores);
    ev.routed_domain.push_back(routed);
    ev.generated.push_back(std::move(gen));
  }
  ev.mean_composite = total / static_cast<double>(slides.size());
  ev.routing_accuracy = static_cast<double>(correct) / static_cast<double>(slides.size());
  return ev;
}

StreamResult run_stream(const std::vector<EpisodeData>& stream, const Strategy& strategy, const HarnessConfig& config,
                        const Seeds& seeds, const EpisodeCallback& on_episode) {
  const int T = static_cast<int>(stream.size());
  if (T < 2) throw std::invalid_argument("run_stream: need at least 2 episodes");
  const FrozenTextEncoder encoder(config.generator.vocab_size, config.generator.text_dim);
  StreamResult result{initial_state(config, seeds), ScoreMatrix(T), {}};
  for (int t = 0; t < T; ++t) {
    try {
      result.state = run_episode(std::move(result.state), stream[static_cast<std::size_t>(t)], strategy, config, seeds);
    } catch (const std::exception& e) {
      throw std::runtime_error("episode " + std::to_string(t) + ": " + e.what());
    }
    std::vector<SplitEvaluation> evals;
    for (int j = 0; j < T; ++j) {
      evals.push_back(evaluate_split(result.state.model, result.state.footprints, stream[static_cast<std::size_t>(j)].test,
                                     encoder, config.keyword_vocabulary));
      result.matrix(t, j) = evals.back().mean_composite;
    }
    if (on_episode) on_episode(result.state, evals);
  }
  result.matrix.validate();
  result.metrics = cl_metrics(result.matrix);
  return result;
}

}  // namespace fgr
