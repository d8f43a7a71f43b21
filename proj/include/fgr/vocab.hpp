#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fgr {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

inline constexpr Token kPad = 0;
inline constexpr Token kEnd = 1;
inline constexpr int kKeywordLength = 2;
inline constexpr int kStyleFamilies = 3;

enum class Word : Token {
  sections = 2, show, tissue, with, final_, diagnosis,
  specimen, demonstrates, from, noted, see, comment,
  report, summary, biopsy, features, of, end_, note,
};
inline constexpr int kSharedWords = 19;

/// Token layout: [pad, end] [shared template words] [organ tokens per domain]
/// [keyword tokens: domain-major, then component, then part].
class Vocabulary {
 public:
  Vocabulary(int domain_capacity, int components);

  int size() const { return keyword_base_ + domain_capacity_ * components_ * kKeywordLength; }
  int domain_capacity() const { return domain_capacity_; }
  int components() const { return components_; }

  static Token word(Word w) { return static_cast<Token>(w); }
  Token organ(int domain) const;
  Token keyword(int domain, int component, int part) const;
  TokenSeq keyword_entry(int domain, int component) const;
  std::vector<TokenSeq> keyword_entries(int domain) const;
  /// Every keyword entry of domains [0, domains).
  std::vector<TokenSeq> all_keyword_entries(int domains) const;

  bool is_special(Token t) const { return t == kPad || t == kEnd; }
  bool is_organ(Token t) const { return t >= organ_base_ && t < keyword_base_; }
  std::string text(Token t) const;
  std::string text(const TokenSeq& seq) const;

 private:
  int domain_capacity_;
  int components_;
  Token organ_base_;
  Token keyword_base_;
};

/// Report text for one style family: opening, organ phrase, one finding
/// clause per component (ordered by the family's rule), closing, end token.
TokenSeq render_report(int style_id, Token organ_token, const std::vector<TokenSeq>& findings);

struct ParsedReport {
  Token organ_token;
  std::vector<TokenSeq> findings;
};

/// Inverse of render_report; nullopt when tokens do not follow the style's grammar.
std::optional<ParsedReport> parse_report(int style_id, const TokenSeq& tokens);

/// Tokens with trailing pad/end markers removed.
TokenSeq strip_end(const TokenSeq& tokens);

}  // namespace fgr
