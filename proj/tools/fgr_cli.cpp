// fgr: synthetic data generation, footprint building, training, continual
// runs, evaluation and footprint inspection.

#include "fgr/config.hpp"
#include "fgr/harness.hpp"
#include "fgr/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fgr;

namespace {

constexpr int kExitConfig = 2;
constexpr const char* kOutputEnv = "FGR_OUTPUT_DIR";

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

fs::path output_dir(const ExperimentConfig& config, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return config.output_dir;
}

std::string split_name(int episode, bool train) {
  return "episode_" + std::to_string(episode) + (train ? "_train.jsonl" : "_test.jsonl");
}

std::vector<EpisodeData> load_or_generate(const ExperimentConfig& config) {
  const RngStream data_rng(config.seeds.data, Purpose::data);
  if (!config.data_dir) return make_stream(config.stream, data_rng);
  std::vector<EpisodeData> stream;
  for (int t = 0; t < config.stream.episodes; ++t) {
    EpisodeData ep;
    ep.spec.domain_id = t;
    ep.train = read_dataset(fs::path(*config.data_dir) / split_name(t, true));
    ep.test = read_dataset(fs::path(*config.data_dir) / split_name(t, false));
    if (ep.train.empty() || ep.test.empty()) throw std::runtime_error("empty split for episode " + std::to_string(t));
    ep.spec.domain_id = ep.train.front().domain_id;
    stream.push_back(std::move(ep));
  }
  return stream;
}

int cmd_gen_data(const ExperimentConfig& config, const std::string& out_flag) {
  const fs::path out = output_dir(config, out_flag);
  const auto stream = make_stream(config.stream, RngStream(config.seeds.data, Purpose::data));
  nlohmann::ordered_json manifest;
  manifest["episodes"] = config.stream.episodes;
  manifest["files"] = nlohmann::ordered_json::array();
  for (int t = 0; t < config.stream.episodes; ++t) {
    for (bool train : {true, false}) {
      const auto& slides = train ? stream[static_cast<std::size_t>(t)].train : stream[static_cast<std::size_t>(t)].test;
      const std::string text = dataset_text(slides);
      write_text_file(out / split_name(t, train), text);
      manifest["files"].push_back({{"name", split_name(t, train)},
                                   {"domain_id", t},
                                   {"split", train ? "train" : "test"},
                                   {"records", slides.size()},
                                   {"sha256", sha256_hex(text)}});
    }
  }
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << 2 * config.stream.episodes << " split files to " << out.string() << "\n";
  return 0;
}

int cmd_build_footprint(const ExperimentConfig& config, const std::string& data, const std::string& out) {
  const auto slides = read_dataset(data);
  if (slides.empty()) throw std::runtime_error("no slides in " + data);
  const auto h = config.harness();
  const FrozenTextEncoder encoder(h.generator.vocab_size, h.generator.text_dim);
  RngStream rng = RngStream(config.seeds.kmeans, Purpose::kmeans).fork(static_cast<std::uint64_t>(slides.front().domain_id));
  const auto fp = build_footprint(slides, h.footprint, encoder, rng);
  write_footprint(out, fp);
  std::cout << "footprint for domain " << fp.domain_id << " written to " << out << "\n";
  return 0;
}

int cmd_train(const ExperimentConfig& config, const std::string& data, const std::string& init, const std::string& out) {
  auto slides = read_dataset(data);
  if (slides.empty()) throw std::runtime_error("no slides in " + data);
  const auto h = config.harness();
  EpisodeState state = initial_state(h, config.seeds);
  if (!init.empty()) state.model = read_checkpoint(init);
  EpisodeData ep;
  ep.spec.domain_id = slides.front().domain_id;
  ep.train = std::move(slides);
  Strategy naive;
  naive.kind = StrategyKind::naive;
  state.episode = ep.spec.domain_id;
  state = run_episode(std::move(state), ep, naive, h, config.seeds);
  for (std::size_t e = 0; e < state.log.back().epoch_losses.size(); ++e)
    std::cout << "epoch " << e << " loss " << format_double(state.log.back().epoch_losses[e]) << "\n";
  write_checkpoint(out, state.model);
  return 0;
}

nlohmann::ordered_json scores_json(const SlideScores& s) {
  return {{"bleu4", s.bleu}, {"rouge_l", s.rouge}, {"key_score", s.key}, {"emb_score", s.emb}, {"composite", s.composite}};
}

int cmd_run(ExperimentConfig config, const std::string& strategy, const std::string& out_flag) {
  if (!strategy.empty()) config.strategy.kind = parse_strategy_kind(strategy);
  const fs::path out = output_dir(config, out_flag);
  const auto stream = load_or_generate(config);
  if (static_cast<int>(stream.size()) != config.stream.episodes) throw std::runtime_error("stream length mismatch");
  const auto h = config.harness();
  std::string log;
  std::size_t written_fps = 0;
  auto on_episode = [&](const EpisodeState& st, const std::vector<SplitEvaluation>& evals) {
    const int t = st.episode - 1;
    for (; written_fps < st.footprints.size(); ++written_fps)
      write_footprint(out / "footprints" / ("domain_" + std::to_string(st.footprints[written_fps].domain_id) + ".json"),
                      st.footprints[written_fps]);
    write_checkpoint(out / "checkpoints" / ("episode_" + std::to_string(t) + ".json"), st.model);
    const auto& el = st.log.back();
    nlohmann::ordered_json rec;
    rec["episode"] = t;
    rec["epoch_losses"] = el.epoch_losses;
    rec["real_samples"] = el.real_samples;
    rec["pseudo_samples"] = el.pseudo_samples;
    rec["empty_pseudo_reports"] = el.empty_pseudo_reports;
    std::vector<double> scores, routing;
    for (const auto& e : evals) {
      scores.push_back(e.mean_composite);
      routing.push_back(e.routing_accuracy);
    }
    rec["scores"] = scores;
    rec["routing_accuracy"] = routing;
    log += rec.dump() + "\n";
    std::cerr << "episode " << t << " done, final loss " << format_double(el.epoch_losses.empty() ? 0.0 : el.epoch_losses.back())
              << "\n";
  };
  const auto result = run_stream(stream, config.strategy, h, config.seeds, on_episode);
  write_text_file(out / "matrix.csv", result.matrix.to_csv());
  write_text_file(out / "cl_metrics.csv", cl_metrics_csv(result.metrics));
  write_text_file(out / "run_log.jsonl", log);
  write_text_file(out / "config.json", config_json(config));
  std::cout << "strategy " << config.strategy.name() << "\n" << result.matrix.to_csv() << cl_metrics_csv(result.metrics);
  return 0;
}

int cmd_eval(const ExperimentConfig& config, const std::string& checkpoint, const std::vector<std::string>& footprints,
             const std::string& data, const std::string& out) {
  const auto model = read_checkpoint(checkpoint);
  std::vector<DomainFootprint> fps;
  for (const auto& f : footprints) fps.push_back(read_footprint(f));
  const auto slides = read_dataset(data);
  const auto h = config.harness();
  const FrozenTextEncoder encoder(h.generator.vocab_size, h.generator.text_dim);
  const auto ev = evaluate_split(model, fps, slides, encoder, h.keyword_vocabulary);
  std::string dump;
  for (std::size_t i = 0; i < slides.size(); ++i) {
    nlohmann::ordered_json rec;
    rec["index"] = i;
    rec["domain_id"] = slides[i].domain_id;
    rec["routed_domain"] = ev.routed_domain[i];
    rec["generated"] = ev.generated[i];
    rec["scores"] = scores_json(ev.per_slide[i]);
    dump += rec.dump() + "\n";
  }
  if (!out.empty()) write_text_file(out, dump);
  std::cout << "slides " << slides.size() << "\nmean_composite " << format_double(ev.mean_composite)
            << "\nrouting_accuracy " << format_double(ev.routing_accuracy) << "\n";
  return 0;
}

int cmd_inspect_footprint(const std::string& file) {
  DomainFootprint fp;
  try {
    fp = read_footprint(file);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  // usage mass of each codeword averaged over the bank
  Vec usage = Vec::Zero(fp.codebook.size());
  for (const auto& hgram : fp.histogram_bank.histograms) usage += hgram;
  if (!fp.histogram_bank.histograms.empty()) usage /= static_cast<double>(fp.histogram_bank.histograms.size());
  std::vector<int> idx(static_cast<std::size_t>(usage.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return usage(a) > usage(b); });

  std::ostringstream os;
  char buf[64];
  os << "domain_id " << fp.domain_id << "\n";
  os << "organ_token " << fp.organ_token << "\n";
  os << "K " << fp.codebook.size() << "\n";
  os << "D " << fp.codebook.dim() << "\n";
  os << "histograms " << fp.histogram_bank.histograms.size() << " / H " << fp.histogram_bank.capacity << "\n";
  std::snprintf(buf, sizeof buf, "%.4f", fp.mu_n);
  os << "mu_N " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.4f", fp.sigma_n);
  os << "sigma_N " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.4f", fp.style.r.norm());
  os << "style_norm " << buf << "\n";
  os << "top5_usage";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, idx.size()); ++i) {
    std::snprintf(buf, sizeof buf, " %d:%.4f", idx[i], usage(idx[i]));
    os << buf;
  }
  os << "\n";
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Footprint-guided generative replay toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, data, strategy, checkpoint, init, file;
  std::vector<std::string> footprints;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic domain-incremental stream");
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--out", out, "Output directory (default: config output_dir or $FGR_OUTPUT_DIR)");

  auto* bfp = app.add_subcommand("build-footprint", "Build a domain footprint from a training split");
  bfp->add_option("--config", config_path, "Experiment config (JSON)")->required();
  bfp->add_option("--data", data, "Training split (.jsonl)")->required();
  bfp->add_option("--out", out, "Footprint file to write")->required();

  auto* train = app.add_subcommand("train", "Train the generator on one split (sequential fine-tuning)");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--data", data, "Training split (.jsonl)")->required();
  train->add_option("--init", init, "Checkpoint to continue from");
  train->add_option("--out", out, "Checkpoint file to write")->required();

  auto* run = app.add_subcommand("run", "Run a full continual stream and write the score matrix");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--strategy", strategy, "naive | er | cumulative | footprint_replay (overrides config)");
  run->add_option("--out", out, "Output directory (default: config output_dir or $FGR_OUTPUT_DIR)");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a test split with footprint routing");
  eval->add_option("--config", config_path, "Experiment config (JSON)")->required();
  eval->add_option("--checkpoint", checkpoint, "Generator checkpoint")->required();
  eval->add_option("--footprints", footprints, "Footprint files used for routing")->required();
  eval->add_option("--data", data, "Test split (.jsonl)")->required();
  eval->add_option("--out", out, "Per-slide metric dump (.jsonl)");

  auto* insp = app.add_subcommand("inspect-footprint", "Summarize a footprint file");
  insp->add_option("file", file, "Footprint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (insp->parsed()) return cmd_inspect_footprint(file);
    const ExperimentConfig config = load_config(config_path);
    if (gen->parsed()) return cmd_gen_data(config, out);
    if (bfp->parsed()) return cmd_build_footprint(config, data, out);
    if (train->parsed()) return cmd_train(config, data, init, out);
    if (run->parsed()) return cmd_run(config, strategy, out);
    if (eval->parsed()) return cmd_eval(config, checkpoint, footprints, data, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
