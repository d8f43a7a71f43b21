#include "fgr/config.hpp"

#include "fgr/io.hpp"

#include <json.hpp>

#include <set>

namespace fgr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

template <typename T>
void require(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError("missing required config key '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  read(obj, key, out, where);
}

}  // namespace

HarnessConfig ExperimentConfig::harness() const {
  HarnessConfig h;
  h.generator = generator;
  h.generator.vocab_size = stream.vocabulary().size();
  h.generator.slide_dim = stream.dim;
  h.footprint = footprint;
  h.epochs = epochs;
  h.lr = lr;
  h.patch_count_min = stream.patch_count_min;
  h.patch_count_max = stream.patch_count_max;
  h.keyword_vocabulary = stream.vocabulary().all_keyword_entries(stream.episodes);
  return h;
}

void ExperimentConfig::validate() const {
  try {
    stream.validate();
    strategy.validate();
    harness().generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (epochs < 0) throw ConfigError("training.epochs must be >= 0");
  if (!(lr > 0)) throw ConfigError("training.lr must be > 0");
  if (footprint.codewords < 1 || footprint.histograms < 1 || footprint.max_slides < 1 || footprint.max_patches < 1)
    throw ConfigError("footprint sizes must be positive");
  if (footprint.kmeans.max_iter < 1 || !(footprint.kmeans.tol >= 0)) throw ConfigError("footprint k-means settings invalid");
}

ExperimentConfig default_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seeds = Seeds::from(seed);
  c.generator = c.harness().generator;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, "", {"seed", "seeds", "stream", "strategy", "generator", "footprint", "training", "output_dir", "data_dir"});
  std::uint64_t seed = 0;
  require(root, "seed", seed, "");
  ExperimentConfig c = default_config(seed);

  if (root.contains("seeds")) {
    const auto& s = root["seeds"];
    reject_unknown(s, "seeds", {"data", "kmeans", "replay", "training", "decoding"});
    read(s, "data", c.seeds.data, "seeds");
    read(s, "kmeans", c.seeds.kmeans, "seeds");
    read(s, "replay", c.seeds.replay, "seeds");
    read(s, "training", c.seeds.training, "seeds");
    read(s, "decoding", c.seeds.decoding, "seeds");
  }

  if (!root.contains("stream")) throw ConfigError("missing required config key 'stream'");
  {
    const auto& s = root["stream"];
    const std::string w = "stream";
    reject_unknown(s, w, {"episodes", "train_per_episode", "test_per_episode", "dim", "components", "separation",
                          "shared_offset", "component_stddev", "dirichlet_alpha", "patch_count_mean", "patch_count_std", "patch_count_min",
                          "patch_count_max", "keyword_threshold", "style_mix", "vocab_domains"});
    require(s, "episodes", c.stream.episodes, w);
    require(s, "train_per_episode", c.stream.train_per_episode, w);
    require(s, "test_per_episode", c.stream.test_per_episode, w);
    read(s, "dim", c.stream.dim, w);
    read(s, "components", c.stream.components, w);
    read(s, "separation", c.stream.separation, w);
    read(s, "shared_offset", c.stream.shared_offset, w);
    read(s, "component_stddev", c.stream.component_stddev, w);
    read(s, "dirichlet_alpha", c.stream.dirichlet_alpha, w);
    read(s, "patch_count_mean", c.stream.patch_count_mean, w);
    read(s, "patch_count_std", c.stream.patch_count_std, w);
    read(s, "patch_count_min", c.stream.patch_count_min, w);
    read(s, "patch_count_max", c.stream.patch_count_max, w);
    read(s, "keyword_threshold", c.stream.keyword_threshold, w);
    read(s, "vocab_domains", c.stream.vocab_domains, w);
    std::string mix = c.stream.style_mix == StyleMix::shared ? "shared" : "alternating";
    read(s, "style_mix", mix, w);
    if (mix == "shared")
      c.stream.style_mix = StyleMix::shared;
    else if (mix == "alternating")
      c.stream.style_mix = StyleMix::alternating;
    else
      throw ConfigError("stream.style_mix must be 'shared' or 'alternating'");
  }

  if (root.contains("strategy")) {
    const auto& s = root["strategy"];
    reject_unknown(s, "strategy", {"kind", "buffer", "lambda", "pseudo_per_domain", "noise_scale"});
    std::string kind = strategy_kind_name(c.strategy.kind);
    read(s, "kind", kind, "strategy");
    try {
      c.strategy.kind = parse_strategy_kind(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    read(s, "buffer", c.strategy.buffer, "strategy");
    read(s, "lambda", c.strategy.lambda, "strategy");
    read(s, "pseudo_per_domain", c.strategy.pseudo_per_domain, "strategy");
    read(s, "noise_scale", c.strategy.noise_scale, "strategy");
  }

  if (root.contains("generator")) {
    const auto& g = root["generator"];
    reject_unknown(g, "generator", {"embed_dim", "window", "cond_dim", "style_slots", "text_dim", "max_decode_len"});
    read(g, "embed_dim", c.generator.embed_dim, "generator");
    read(g, "window", c.generator.window, "generator");
    read(g, "cond_dim", c.generator.cond_dim, "generator");
    read(g, "style_slots", c.generator.style_slots, "generator");
    read(g, "text_dim", c.generator.text_dim, "generator");
    read(g, "max_decode_len", c.generator.max_decode_len, "generator");
  }

  if (root.contains("footprint")) {
    const auto& f = root["footprint"];
    reject_unknown(f, "footprint", {"codewords", "histograms", "max_slides", "max_patches", "kmeans_max_iter", "kmeans_tol"});
    read(f, "codewords", c.footprint.codewords, "footprint");
    read(f, "histograms", c.footprint.histograms, "footprint");
    read(f, "max_slides", c.footprint.max_slides, "footprint");
    read(f, "max_patches", c.footprint.max_patches, "footprint");
    read(f, "kmeans_max_iter", c.footprint.kmeans.max_iter, "footprint");
    read(f, "kmeans_tol", c.footprint.kmeans.tol, "footprint");
  }

  if (root.contains("training")) {
    const auto& t = root["training"];
    reject_unknown(t, "training", {"epochs", "lr"});
    read(t, "epochs", c.epochs, "training");
    read(t, "lr", c.lr, "training");
  }

  read(root, "output_dir", c.output_dir, "");
  if (root.contains("data_dir")) {
    std::string d;
    read(root, "data_dir", d, "");
    c.data_dir = d;
  }
  c.generator = c.harness().generator;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seeds"] = {{"data", c.seeds.data}, {"kmeans", c.seeds.kmeans}, {"replay", c.seeds.replay},
                {"training", c.seeds.training}, {"decoding", c.seeds.decoding}};
  j["seed"] = c.seeds.data;
  const auto& s = c.stream;
  j["stream"] = ordered_json{{"episodes", s.episodes},
                             {"train_per_episode", s.train_per_episode},
                             {"test_per_episode", s.test_per_episode},
                             {"dim", s.dim},
                             {"components", s.components},
                             {"separation", s.separation},
                             {"shared_offset", s.shared_offset},
                             {"component_stddev", s.component_stddev},
                             {"dirichlet_alpha", s.dirichlet_alpha},
                             {"patch_count_mean", s.patch_count_mean},
                             {"patch_count_std", s.patch_count_std},
                             {"patch_count_min", s.patch_count_min},
                             {"patch_count_max", s.patch_count_max},
                             {"keyword_threshold", s.keyword_threshold},
                             {"style_mix", s.style_mix == StyleMix::shared ? "shared" : "alternating"},
                             {"vocab_domains", s.vocab_domains}};
  j["strategy"] = ordered_json{{"kind", strategy_kind_name(c.strategy.kind)},
                               {"buffer", c.strategy.buffer},
                               {"lambda", c.strategy.lambda},
                               {"pseudo_per_domain", c.strategy.pseudo_per_domain},
                               {"noise_scale", c.strategy.noise_scale}};
  const auto& g = c.generator;
  j["generator"] = ordered_json{{"embed_dim", g.embed_dim},     {"window", g.window},     {"cond_dim", g.cond_dim},
                                {"style_slots", g.style_slots}, {"text_dim", g.text_dim}, {"max_decode_len", g.max_decode_len}};
  const auto& f = c.footprint;
  j["footprint"] = ordered_json{{"codewords", f.codewords},   {"histograms", f.histograms},
                                {"max_slides", f.max_slides}, {"max_patches", f.max_patches},
                                {"kmeans_max_iter", f.kmeans.max_iter}, {"kmeans_tol", f.kmeans.tol}};
  j["training"] = ordered_json{{"epochs", c.epochs}, {"lr", c.lr}};
  j["output_dir"] = c.output_dir;
  if (c.data_dir) j["data_dir"] = *c.data_dir;
  return j.dump(2) + "\n";
}

}  // namespace fgr
