#include "fgr/vocab.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace fgr {

namespace {

struct StyleFamily {
  std::array<Word, 2> opening;
  std::array<Word, 2> closing;
  // organ phrase: organ token plus one word, organ first or second
  Word organ_word;
  bool organ_first;
  std::vector<Word> clause_lead;
  std::vector<Word> clause_tail;
  bool descending;
};

const StyleFamily& family(int style_id) {
  static const std::array<StyleFamily, kStyleFamilies> kFamilies = {{
      {{Word::sections, Word::show}, {Word::final_, Word::diagnosis}, Word::tissue, true, {Word::with}, {}, false},
      {{Word::specimen, Word::demonstrates}, {Word::see, Word::comment}, Word::from, false, {}, {Word::noted}, true},
      {{Word::report, Word::summary}, {Word::end_, Word::note}, Word::biopsy, true, {Word::features, Word::of}, {}, false},
  }};
  if (style_id < 0 || style_id >= kStyleFamilies)
    throw std::out_of_range("unknown style family " + std::to_string(style_id));
  return kFamilies[static_cast<std::size_t>(style_id)];
}

const char* word_text(Token t) {
  static const std::array<const char*, kSharedWords> kWords = {
      "sections", "show", "tissue", "with", "final", "diagnosis", "specimen", "demonstrates", "from", "noted",
      "see", "comment", "report", "summary", "biopsy", "features", "of", "end", "note"};
  return kWords[static_cast<std::size_t>(t - 2)];
}

}  // namespace

Vocabulary::Vocabulary(int domain_capacity, int components)
    : domain_capacity_(domain_capacity),
      components_(components),
      organ_base_(2 + kSharedWords),
      keyword_base_(2 + kSharedWords + domain_capacity) {
  if (domain_capacity < 1 || components < 1) throw std::invalid_argument("Vocabulary: capacity and components must be positive");
}

Token Vocabulary::organ(int domain) const {
  if (domain < 0 || domain >= domain_capacity_)
    throw std::out_of_range("domain " + std::to_string(domain) + " exceeds vocabulary capacity " +
                            std::to_string(domain_capacity_));
  return organ_base_ + domain;
}

Token Vocabulary::keyword(int domain, int component, int part) const {
  if (domain < 0 || domain >= domain_capacity_ || component < 0 || component >= components_ || part < 0 ||
      part >= kKeywordLength)
    throw std::out_of_range("keyword index out of range");
  return keyword_base_ + (domain * components_ + component) * kKeywordLength + part;
}

TokenSeq Vocabulary::keyword_entry(int domain, int component) const {
  TokenSeq kw;
  for (int p = 0; p < kKeywordLength; ++p) kw.push_back(keyword(domain, component, p));
  return kw;
}

std::vector<TokenSeq> Vocabulary::keyword_entries(int domain) const {
  std::vector<TokenSeq> out;
  for (int c = 0; c < components_; ++c) out.push_back(keyword_entry(domain, c));
  return out;
}

std::vector<TokenSeq> Vocabulary::all_keyword_entries(int domains) const {
  std::vector<TokenSeq> out;
  for (int d = 0; d < std::min(domains, domain_capacity_); ++d) {
    auto e = keyword_entries(d);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

std::string Vocabulary::text(Token t) const {
  if (t == kPad) return "<pad>";
  if (t == kEnd) return "<end>";
  if (t >= 2 && t < organ_base_) return word_text(t);
  if (is_organ(t)) return "organ" + std::to_string(t - organ_base_);
  if (t >= keyword_base_ && t < size()) {
    const int rel = t - keyword_base_;
    const int part = rel % kKeywordLength;
    const int comp = (rel / kKeywordLength) % components_;
    const int dom = rel / (kKeywordLength * components_);
    return "kw" + std::to_string(dom) + "." + std::to_string(comp) + (part == 0 ? "a" : "b");
  }
  return "<unk:" + std::to_string(t) + ">";
}

std::string Vocabulary::text(const TokenSeq& seq) const {
  std::string s;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) s += ' ';
    s += text(seq[i]);
  }
  return s;
}

TokenSeq render_report(int style_id, Token organ_token, const std::vector<TokenSeq>& findings) {
  const auto& f = family(style_id);
  TokenSeq out;
  auto put = [&out](Word w) { out.push_back(static_cast<Token>(w)); };
  for (Word w : f.opening) put(w);
  if (f.organ_first) {
    out.push_back(organ_token);
    put(f.organ_word);
  } else {
    put(f.organ_word);
    out.push_back(organ_token);
  }
  auto emit = [&](const TokenSeq& kw) {
    for (Word w : f.clause_lead) put(w);
    out.insert(out.end(), kw.begin(), kw.end());
    for (Word w : f.clause_tail) put(w);
  };
  if (f.descending) {
    for (auto it = findings.rbegin(); it != findings.rend(); ++it) emit(*it);
  } else {
    for (const auto& kw : findings) emit(kw);
  }
  for (Word w : f.closing) put(w);
  out.push_back(kEnd);
  return out;
}

std::optional<ParsedReport> parse_report(int style_id, const TokenSeq& tokens) {
  if (style_id < 0 || style_id >= kStyleFamilies) return std::nullopt;
  const auto& f = family(style_id);
  std::size_t i = 0;
  auto expect = [&](Word w) {
    if (i < tokens.size() && tokens[i] == static_cast<Token>(w)) {
      ++i;
      return true;
    }
    return false;
  };
  auto is_word = [](Token t) { return t >= 2 && t < 2 + kSharedWords; };
  for (Word w : f.opening)
    if (!expect(w)) return std::nullopt;
  ParsedReport parsed{};
  if (f.organ_first) {
    if (i >= tokens.size() || is_word(tokens[i]) || tokens[i] == kEnd || tokens[i] == kPad) return std::nullopt;
    parsed.organ_token = tokens[i++];
    if (!expect(f.organ_word)) return std::nullopt;
  } else {
    if (!expect(f.organ_word)) return std::nullopt;
    if (i >= tokens.size() || is_word(tokens[i]) || tokens[i] == kEnd || tokens[i] == kPad) return std::nullopt;
    parsed.organ_token = tokens[i++];
  }
  const std::size_t clause_len = f.clause_lead.size() + kKeywordLength + f.clause_tail.size();
  const std::size_t tail_len = f.closing.size() + 1;
  if (tokens.size() < i + tail_len) return std::nullopt;
  const std::size_t body = tokens.size() - tail_len - i;
  if (body == 0 || body % clause_len != 0) return std::nullopt;
  for (std::size_t c = 0; c < body / clause_len; ++c) {
    for (Word w : f.clause_lead)
      if (!expect(w)) return std::nullopt;
    TokenSeq kw(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + kKeywordLength));
    for (Token t : kw)
      if (is_word(t) || t == kEnd || t == kPad) return std::nullopt;
    i += kKeywordLength;
    for (Word w : f.clause_tail)
      if (!expect(w)) return std::nullopt;
    parsed.findings.push_back(std::move(kw));
  }
  for (Word w : f.closing)
    if (!expect(w)) return std::nullopt;
  if (i + 1 != tokens.size() || tokens[i] != kEnd) return std::nullopt;
  if (f.descending) std::reverse(parsed.findings.begin(), parsed.findings.end());
  return parsed;
}

TokenSeq strip_end(const TokenSeq& tokens) {
  TokenSeq out = tokens;
  while (!out.empty() && (out.back() == kEnd || out.back() == kPad)) out.pop_back();
  return out;
}

}  // namespace fgr
