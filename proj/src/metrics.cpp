#include "fgr/metrics.hpp"

#include "fgr/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fgr {

namespace {

std::map<TokenSeq, int> ngram_counts(const TokenSeq& s, std::size_t n) {
  std::map<TokenSeq, int> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[TokenSeq(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

bool contains(const TokenSeq& hay, const TokenSeq& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

double bleu4(const TokenSeq& candidate, const TokenSeq& reference) {
  if (reference.empty()) throw std::invalid_argument("bleu4: empty reference");
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    double matches = 0.0;
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    const double total = candidate.size() >= n ? static_cast<double>(candidate.size() - n + 1) : 0.0;
    log_sum += std::log(std::max(matches, kBleuEpsilon) / std::max(total, 1.0));
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(bp * std::exp(log_sum / 4.0), 0.0, 1.0);
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (reference.empty()) throw std::invalid_argument("rouge_l: empty reference");
  if (candidate.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2 * p * r / (p + r);
}

double key_score(const TokenSeq& candidate, const std::vector<TokenSeq>& gold,
                 const std::vector<TokenSeq>& keyword_vocabulary) {
  if (gold.empty()) throw std::invalid_argument("key_score: empty gold keyword set");
  std::vector<TokenSeq> found;
  for (const auto& kw : keyword_vocabulary)
    if (contains(candidate, kw) && std::find(found.begin(), found.end(), kw) == found.end()) found.push_back(kw);
  // gold keywords missing from the vocabulary still count when present
  for (const auto& kw : gold)
    if (contains(candidate, kw) && std::find(found.begin(), found.end(), kw) == found.end()) found.push_back(kw);
  if (found.empty()) return 0.0;
  std::vector<TokenSeq> gold_set;
  for (const auto& kw : gold)
    if (std::find(gold_set.begin(), gold_set.end(), kw) == gold_set.end()) gold_set.push_back(kw);
  double tp = 0;
  for (const auto& kw : gold_set)
    if (std::find(found.begin(), found.end(), kw) != found.end()) tp += 1;
  if (tp == 0) return 0.0;
  const double p = tp / static_cast<double>(found.size());
  const double r = tp / static_cast<double>(gold_set.size());
  return 2 * p * r / (p + r);
}

double emb_score(const TokenSeq& candidate, const TokenSeq& reference, const FrozenTextEncoder& encoder) {
  const Vec a = encoder.encode(candidate);
  const Vec b = encoder.encode(reference);
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0) || !(nb > 0)) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

double composite(double rouge, double bleu, double key, double emb) {
  for (double v : {rouge, bleu, key, emb})
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("composite: input " + format_double(v) + " outside [0, 1]");
  return CompositeWeights::text_overlap * (rouge + bleu) + CompositeWeights::key * key + CompositeWeights::emb * emb;
}

SlideScores score_report(const TokenSeq& candidate, const TokenSeq& reference, const std::vector<TokenSeq>& gold_keywords,
                         const std::vector<TokenSeq>& keyword_vocabulary, const FrozenTextEncoder& encoder) {
  const TokenSeq cand = strip_end(candidate);
  const TokenSeq ref = strip_end(reference);
  SlideScores s;
  s.bleu = bleu4(cand, ref);
  s.rouge = rouge_l(cand, ref);
  s.key = key_score(cand, gold_keywords, keyword_vocabulary);
  s.emb = emb_score(cand, ref, encoder);
  s.composite = composite(s.rouge, s.bleu, s.key, s.emb);
  return s;
}

ScoreMatrix::ScoreMatrix(int episodes) {
  if (episodes < 1) throw std::invalid_argument("ScoreMatrix: need at least one episode");
  r_ = Mat::Zero(episodes, episodes);
}

void ScoreMatrix::validate() const {
  if (!r_.allFinite() || (r_.array() < 0).any() || (r_.array() > 1).any())
    throw std::invalid_argument("ScoreMatrix: entries must be finite and in [0, 1]");
}

std::string ScoreMatrix::to_csv() const {
  std::ostringstream os;
  os << "episode";
  for (int j = 0; j < episodes(); ++j) os << ",domain_" << j;
  os << '\n';
  for (int t = 0; t < episodes(); ++t) {
    os << t;
    for (int j = 0; j < episodes(); ++j) os << ',' << format_double(r_(t, j));
    os << '\n';
  }
  return os.str();
}

ScoreMatrix ScoreMatrix::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  if (!std::getline(is, line)) throw std::invalid_argument("ScoreMatrix::from_csv: empty input");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(parse_double(cell));
    rows.push_back(std::move(row));
  }
  ScoreMatrix m(static_cast<int>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.size()) throw std::invalid_argument("ScoreMatrix::from_csv: matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) m(static_cast<int>(t), static_cast<int>(j)) = rows[t][j];
  }
  return m;
}

ClMetrics cl_metrics(const ScoreMatrix& r) {
  const int T = r.episodes();
  if (T < 2) throw std::invalid_argument("cl_metrics: need T >= 2");
  ClMetrics m;
  for (int j = 0; j < T; ++j) m.avg += r(T - 1, j);
  m.avg /= T;
  for (int j = 0; j < T - 1; ++j) m.bwt += r(T - 1, j) - r(j, j);
  m.bwt /= (T - 1);
  for (int t = 0; t < T; ++t) {
    double row = 0.0;
    for (int j = 0; j <= t; ++j) row += r(t, j);
    m.ilm += row / (t + 1);
  }
  m.ilm /= T;
  return m;
}

std::string cl_metrics_csv(const ClMetrics& m) {
  return "AVG,ILM,BWT\n" + format_double(m.avg) + "," + format_double(m.ilm) + "," + format_double(m.bwt) + "\n";
}

}  // namespace fgr
