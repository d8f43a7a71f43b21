#pragma once

#include "fgr/numeric.hpp"
#include "fgr/text_encoder.hpp"
#include "fgr/vocab.hpp"

#include <string>
#include <vector>

namespace fgr {

inline constexpr double kBleuEpsilon = 1e-9;

/// Sentence BLEU-4: clipped n-gram precisions for n = 1..4, geometric mean,
/// brevity penalty. Zero match counts are floored at kBleuEpsilon.
double bleu4(const TokenSeq& candidate, const TokenSeq& reference);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// ROUGE-L F1 from the longest common subsequence.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

/// F1 between the gold keyword set and the vocabulary keywords that occur
/// contiguously in the candidate.
double key_score(const TokenSeq& candidate, const std::vector<TokenSeq>& gold,
                 const std::vector<TokenSeq>& keyword_vocabulary);

/// Cosine of frozen bag-of-embedding encodings, clamped to [0, 1].
double emb_score(const TokenSeq& candidate, const TokenSeq& reference, const FrozenTextEncoder& encoder);

struct CompositeWeights {
  static constexpr double text_overlap = 0.15;
  static constexpr double key = 0.4;
  static constexpr double emb = 0.3;
};

/// 0.15 (rouge + bleu) + 0.4 key + 0.3 emb.
double composite(double rouge, double bleu, double key, double emb);

struct SlideScores {
  double bleu = 0.0;
  double rouge = 0.0;
  double key = 0.0;
  double emb = 0.0;
  double composite = 0.0;
};

/// All four metrics on end-stripped sequences, plus the composite.
SlideScores score_report(const TokenSeq& candidate, const TokenSeq& reference, const std::vector<TokenSeq>& gold_keywords,
                         const std::vector<TokenSeq>& keyword_vocabulary, const FrozenTextEncoder& encoder);

/// R(t, j): composite score on test split j after training episode t.
class ScoreMatrix {
 public:
  explicit ScoreMatrix(int episodes);

  int episodes() const { return static_cast<int>(r_.rows()); }
  double operator()(int t, int j) const { return r_(t, j); }
  double& operator()(int t, int j) { return r_(t, j); }
  const Mat& values() const { return r_; }
  void validate() const;

  /// Header "episode,domain_0,..."; one row per evaluation episode.
  std::string to_csv() const;
  static ScoreMatrix from_csv(const std::string& text);

 private:
  Mat r_;
};

struct ClMetrics {
  double avg = 0.0;
  double ilm = 0.0;
  double bwt = 0.0;
};

/// AVG: mean of the final row. ILM: mean over t of the mean of R(t, j<=t).
/// BWT: mean over j < T-1 of R(T-1, j) - R(j, j).
ClMetrics cl_metrics(const ScoreMatrix& r);

std::string cl_metrics_csv(const ClMetrics& m);

}  // namespace fgr
