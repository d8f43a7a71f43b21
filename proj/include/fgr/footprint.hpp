#pragma once

#include "fgr/numeric.hpp"
#include "fgr/rng.hpp"
#include "fgr/synthetic.hpp"
#include "fgr/text_encoder.hpp"

#include <span>
#include <vector>

namespace fgr {

/// K codewords stored as the columns of a D x K matrix.
struct Codebook {
  Mat codewords;

  int size() const { return static_cast<int>(codewords.cols()); }
  int dim() const { return static_cast<int>(codewords.rows()); }
  auto codeword(int k) const { return codewords.col(k); }
};

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-6;
};

struct KMeansResult {
  Codebook codebook;
  /// Mean squared distance to the nearest codeword after each assignment step.
  std::vector<double> objective;
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations. Stops when the relative
/// objective decrease drops below tol or after max_iter assignment steps.
/// Empty clusters are reseeded to the point farthest from its centroid.
KMeansResult kmeans_fit(const std::vector<Vec>& points, int k, RngStream& rng, const KMeansOptions& options = {});
Codebook kmeans(const std::vector<Vec>& points, int k, RngStream& rng, const KMeansOptions& options = {});

struct Quantized {
  int index = 0;
  double squared_distance = 0.0;
};

/// Nearest codeword by squared Euclidean distance; lowest index wins ties.
Quantized quantize(const Eigen::Ref<const Vec>& x, const Codebook& codebook);

/// Normalized code-assignment histogram of one slide.
Vec slide_histogram(const PatchSet& patches, const Codebook& codebook);

/// Mean over patches of the squared distance to the nearest codeword.
double qe_score(const PatchSet& patches, const Codebook& codebook);

struct HistogramBank {
  int capacity = 50;
  std::vector<Vec> histograms;
};

/// Unit-norm style vector in the frozen text-encoder space.
struct StylePrototype {
  Vec r;
};

StylePrototype style_prototype(const std::vector<TokenSeq>& reports, const FrozenTextEncoder& encoder);

struct DomainFootprint {
  int domain_id = 0;
  Token organ_token = 0;
  Codebook codebook;
  HistogramBank histogram_bank;
  double mu_n = 0.0;
  double sigma_n = 0.0;
  StylePrototype style;

  void validate() const;
};

struct FootprintConfig {
  int codewords = 64;
  int histograms = 50;
  int max_slides = 200;
  int max_patches = 512;
  KMeansOptions kmeans;
};

/// Codebook from a bounded subsample of slides/patches, histogram bank from
/// up to `histograms` slides, patch-count stats over every slide, style
/// prototype over every report.
DomainFootprint build_footprint(std::span<const Slide> slides, const FootprintConfig& config,
                                const FrozenTextEncoder& encoder, RngStream& rng);

/// Domain id whose codebook reconstructs the patches best; lowest id on ties.
int route_domain(const PatchSet& patches, std::span<const DomainFootprint> footprints);

}  // namespace fgr
