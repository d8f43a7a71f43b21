#include "fgr/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fgr {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("format_double: non-finite value");
  if (v == 0.0 && std::signbit(v)) return "-0.0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw FormatError("trailing characters in number: '" + s + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void put_vec(std::string& out, const Eigen::Ref<const Vec>& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  out += ']';
}

void put_tokens(std::string& out, const TokenSeq& t) {
  out += '[';
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(t[i]);
  }
  out += ']';
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed ") + what + ": " + e.what());
  }
}

const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const char* key, const char* what) {
  try {
    return field(j, key, what).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": bad value for '" + key + "': " + e.what());
  }
}

Vec to_vec(const json& arr, const char* what) {
  if (!arr.is_array()) throw FormatError(std::string(what) + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

TokenSeq to_tokens(const json& arr, const char* what) {
  try {
    return arr.get<TokenSeq>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": bad token list: " + e.what());
  }
}

}  // namespace

std::string slide_record(const Slide& slide, bool is_pseudo) {
  std::string out = "{\"domain_id\":" + std::to_string(slide.domain_id) + ",\"prompt\":";
  put_tokens(out, slide.prompt);
  out += ",\"report\":";
  put_tokens(out, slide.report);
  out += ",\"keywords\":[";
  for (std::size_t i = 0; i < slide.keywords.size(); ++i) {
    if (i) out += ',';
    put_tokens(out, slide.keywords[i]);
  }
  out += "],\"patches\":[";
  for (std::size_t i = 0; i < slide.patches.vectors.size(); ++i) {
    if (i) out += ',';
    put_vec(out, slide.patches.vectors[i]);
  }
  out += ']';
  if (is_pseudo) out += ",\"is_pseudo\":true";
  out += '}';
  return out;
}

Slide parse_slide_record(const std::string& line) {
  const json j = parse_json(line, "dataset record");
  Slide s;
  s.domain_id = get<int>(j, "domain_id", "dataset record");
  s.prompt = to_tokens(field(j, "prompt", "dataset record"), "prompt");
  s.report = to_tokens(field(j, "report", "dataset record"), "report");
  for (const auto& kw : field(j, "keywords", "dataset record")) s.keywords.push_back(to_tokens(kw, "keywords"));
  for (const auto& p : field(j, "patches", "dataset record")) s.patches.vectors.push_back(to_vec(p, "patches"));
  if (s.patches.vectors.empty()) throw FormatError("dataset record: empty patch set");
  for (const auto& v : s.patches.vectors)
    if (v.size() != s.patches.vectors.front().size()) throw FormatError("dataset record: ragged patch vectors");
  return s;
}

std::string dataset_text(std::span<const Slide> slides) {
  std::string out;
  for (const auto& s : slides) {
    out += slide_record(s);
    out += '\n';
  }
  return out;
}

std::vector<Slide> parse_dataset(const std::string& text) {
  std::vector<Slide> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(parse_slide_record(line));
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const Slide> slides) {
  write_text_file(path, dataset_text(slides));
}

std::vector<Slide> read_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

std::string footprint_text(const DomainFootprint& fp) {
  const auto& cw = fp.codebook.codewords;
  std::string out = "{\n";
  out += "\"format_version\": " + std::to_string(kFootprintFormatVersion) + ",\n";
  out += "\"domain_id\": " + std::to_string(fp.domain_id) + ",\n";
  out += "\"organ_token\": " + std::to_string(fp.organ_token) + ",\n";
  out += "\"D\": " + std::to_string(cw.rows()) + ",\n";
  out += "\"K\": " + std::to_string(cw.cols()) + ",\n";
  out += "\"H\": " + std::to_string(fp.histogram_bank.capacity) + ",\n";
  out += "\"codewords\": [";
  for (Eigen::Index k = 0; k < cw.cols(); ++k) {
    out += k ? ",\n  " : "\n  ";
    put_vec(out, cw.col(k));
  }
  out += "\n],\n\"histograms\": [";
  const auto& hs = fp.histogram_bank.histograms;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    out += i ? ",\n  " : "\n  ";
    put_vec(out, hs[i]);
  }
  out += hs.empty() ? "],\n" : "\n],\n";
  out += "\"mu_N\": " + format_double(fp.mu_n) + ",\n";
  out += "\"sigma_N\": " + format_double(fp.sigma_n) + ",\n";
  out += "\"style_prototype\": ";
  put_vec(out, fp.style.r);
  out += "\n}\n";
  return out;
}

DomainFootprint parse_footprint(const std::string& text) {
  constexpr const char* what = "footprint";
  const json j = parse_json(text, what);
  const int version = get<int>(j, "format_version", what);
  if (version != kFootprintFormatVersion)
    throw FormatError("footprint format_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kFootprintFormatVersion) + ")");
  DomainFootprint fp;
  fp.domain_id = get<int>(j, "domain_id", what);
  fp.organ_token = get<Token>(j, "organ_token", what);
  const int d = get<int>(j, "D", what);
  const int k = get<int>(j, "K", what);
  fp.histogram_bank.capacity = get<int>(j, "H", what);
  const auto& cws = field(j, "codewords", what);
  if (!cws.is_array() || static_cast<int>(cws.size()) != k || k < 1) throw FormatError("footprint: codewords do not match K");
  fp.codebook.codewords.resize(d, k);
  for (int r = 0; r < k; ++r) {
    const Vec row = to_vec(cws[static_cast<std::size_t>(r)], "codewords");
    if (row.size() != d) throw FormatError("footprint: codeword length does not match D");
    fp.codebook.codewords.col(r) = row;
  }
  for (const auto& h : field(j, "histograms", what)) fp.histogram_bank.histograms.push_back(to_vec(h, "histograms"));
  fp.mu_n = get<double>(j, "mu_N", what);
  fp.sigma_n = get<double>(j, "sigma_N", what);
  fp.style.r = to_vec(field(j, "style_prototype", what), "style_prototype");
  try {
    fp.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return fp;
}

void write_footprint(const std::filesystem::path& path, const DomainFootprint& fp) {
  write_text_file(path, footprint_text(fp));
}

DomainFootprint read_footprint(const std::filesystem::path& path) { return parse_footprint(read_text_file(path)); }

std::string checkpoint_text(const GeneratorModel& model) {
  const auto& c = model.config;
  std::string out = "{\n\"format_version\": " + std::to_string(kCheckpointFormatVersion) + ",\n";
  out += "\"config\": {\"vocab_size\": " + std::to_string(c.vocab_size) + ", \"embed_dim\": " + std::to_string(c.embed_dim) +
         ", \"window\": " + std::to_string(c.window) + ", \"cond_dim\": " + std::to_string(c.cond_dim) +
         ", \"style_slots\": " + std::to_string(c.style_slots) + ", \"slide_dim\": " + std::to_string(c.slide_dim) +
         ", \"text_dim\": " + std::to_string(c.text_dim) + ", \"max_decode_len\": " + std::to_string(c.max_decode_len) +
         "},\n\"params\": {";
  bool first = true;
  for_each_param(model.params, [&](const char* name, const auto& p) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "\"" + std::string(name) + "\": {\"rows\": " + std::to_string(p.rows()) + ", \"cols\": " +
           std::to_string(p.cols()) + ", \"data\": [";
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index col = 0; col < p.cols(); ++col) {
        if (r || col) out += ',';
        out += format_double(p(r, col));
      }
    out += "]}";
  });
  out += "\n}\n}\n";
  return out;
}

GeneratorModel parse_checkpoint(const std::string& text) {
  constexpr const char* what = "checkpoint";
  const json j = parse_json(text, what);
  const int version = get<int>(j, "format_version", what);
  if (version != kCheckpointFormatVersion)
    throw FormatError("checkpoint format_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointFormatVersion) + ")");
  const auto& cj = field(j, "config", what);
  GeneratorConfig c;
  c.vocab_size = get<int>(cj, "vocab_size", what);
  c.embed_dim = get<int>(cj, "embed_dim", what);
  c.window = get<int>(cj, "window", what);
  c.cond_dim = get<int>(cj, "cond_dim", what);
  c.style_slots = get<int>(cj, "style_slots", what);
  c.slide_dim = get<int>(cj, "slide_dim", what);
  c.text_dim = get<int>(cj, "text_dim", what);
  c.max_decode_len = get<int>(cj, "max_decode_len", what);
  GeneratorModel model;
  try {
    model = GeneratorModel::zeros(c);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  const auto& pj = field(j, "params", what);
  for_each_param(model.params, [&](const char* name, auto& p) {
    const auto& e = field(pj, name, what);
    const auto rows = get<Eigen::Index>(e, "rows", name);
    const auto cols = get<Eigen::Index>(e, "cols", name);
    if (rows != p.rows() || cols != p.cols())
      throw FormatError(std::string("checkpoint: shape of '") + name + "' does not match config");
    const Vec data = to_vec(field(e, "data", name), name);
    if (data.size() != rows * cols) throw FormatError(std::string("checkpoint: wrong element count for '") + name + "'");
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index col = 0; col < cols; ++col) p(r, col) = data(r * cols + col);
  });
  return model;
}

void write_checkpoint(const std::filesystem::path& path, const GeneratorModel& model) {
  write_text_file(path, checkpoint_text(model));
}

GeneratorModel read_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text_file(path)); }

}  // namespace fgr
