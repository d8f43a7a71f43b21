#include "fgr/footprint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fgr {

namespace {

Mat stack_columns(const std::vector<Vec>& points) {
  Mat x(points.front().size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != x.rows()) throw std::invalid_argument("kmeans: points differ in dimension");
    x.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return x;
}

// nearest column of `centers` to x; lowest index on ties
Quantized nearest(const Eigen::Ref<const Vec>& x, const Mat& centers) {
  Quantized best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index k = 0; k < centers.cols(); ++k) {
    const double d = (centers.col(k) - x).squaredNorm();
    if (d < best.squared_distance) best = {static_cast<int>(k), d};
  }
  return best;
}

Mat kmeans_pp_init(const Mat& x, int k, RngStream& rng) {
  const Eigen::Index n = x.cols();
  Mat centers(x.rows(), k);
  centers.col(0) = x.col(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Vec d2 = (x.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0 && d2(i) > 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    centers.col(c) = x.col(pick);
    const Vec to_new = (x.colwise() - centers.col(c)).colwise().squaredNorm().transpose();
    d2 = d2.cwiseMin(to_new);
  }
  return centers;
}

}  // namespace

KMeansResult kmeans_fit(const std::vector<Vec>& points, int k, RngStream& rng, const KMeansOptions& options) {
  if (k < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  if (points.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("kmeans: " + std::to_string(points.size()) + " points < K = " + std::to_string(k));
  if (options.max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
  const Mat x = stack_columns(points);
  if (!x.allFinite()) throw std::invalid_argument("kmeans: non-finite point");
  const Eigen::Index n = x.cols();

  KMeansResult result;
  Mat centers = kmeans_pp_init(x, k, rng);
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  Vec dist(n);

  const Eigen::RowVectorXd x_sq = x.colwise().squaredNorm();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    bool changed = false;
    double obj = 0.0;
    // candidate distances through one product; the chosen one is recomputed exactly
    Mat d2 = -2.0 * (centers.transpose() * x);
    const Vec c_sq = centers.colwise().squaredNorm().transpose();
    d2.colwise() += c_sq;
    d2.rowwise() += x_sq;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      d2.col(i).minCoeff(&best);
      const int a = static_cast<int>(best);
      changed |= assign[static_cast<std::size_t>(i)] != a;
      assign[static_cast<std::size_t>(i)] = a;
      dist(i) = (x.col(i) - centers.col(a)).squaredNorm();
      obj += dist(i);
    }
    obj /= static_cast<double>(n);
    result.iterations = iter + 1;
    const bool have_prev = !result.objective.empty();
    const double prev = have_prev ? result.objective.back() : 0.0;
    result.objective.push_back(obj);
    if (have_prev && (!changed || obj == 0.0 || (prev - obj) <= options.tol * prev)) break;

    Mat sums = Mat::Zero(x.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = assign[static_cast<std::size_t>(i)];
      sums.col(a) += x.col(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
    // distance of each point to its (updated) own centroid, for reseeding
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (x.col(i) - centers.col(assign[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      const int donor = assign[static_cast<std::size_t>(far)];
      centers.col(c) = x.col(far);
      assign[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      --counts[static_cast<std::size_t>(donor)];
    }
  }
  result.codebook.codewords = std::move(centers);
  return result;
}

Codebook kmeans(const std::vector<Vec>& points, int k, RngStream& rng, const KMeansOptions& options) {
  return kmeans_fit(points, k, rng, options).codebook;
}

Quantized quantize(const Eigen::Ref<const Vec>& x, const Codebook& codebook) {
  if (codebook.size() == 0) throw std::invalid_argument("quantize: empty codebook");
  if (x.size() != codebook.dim())
    throw std::invalid_argument("quantize: dimension " + std::to_string(x.size()) + " != codebook dimension " +
                                std::to_string(codebook.dim()));
  return nearest(x, codebook.codewords);
}

Vec slide_histogram(const PatchSet& patches, const Codebook& codebook) {
  if (patches.count() == 0) throw std::invalid_argument("slide_histogram: empty patch set");
  Vec h = Vec::Zero(codebook.size());
  for (const auto& x : patches.vectors) h(quantize(x, codebook).index) += 1.0;
  return h / static_cast<double>(patches.count());
}

double qe_score(const PatchSet& patches, const Codebook& codebook) {
  if (patches.count() == 0) throw std::invalid_argument("qe_score: empty patch set");
  double total = 0.0;
  for (const auto& x : patches.vectors) total += quantize(x, codebook).squared_distance;
  return total / static_cast<double>(patches.count());
}

StylePrototype style_prototype(const std::vector<TokenSeq>& reports, const FrozenTextEncoder& encoder) {
  if (reports.empty()) throw std::invalid_argument("style_prototype: no reports");
  Vec acc = Vec::Zero(encoder.dim());
  for (const auto& r : reports) acc += encoder.encode(r);
  acc /= static_cast<double>(reports.size());
  const double norm = acc.norm();
  if (!(norm > 0)) throw std::domain_error("style_prototype: zero-norm mean encoding");
  return {acc / norm};
}

void DomainFootprint::validate() const {
  if (codebook.size() < 1 || !codebook.codewords.allFinite()) throw std::invalid_argument("footprint: bad codebook");
  if (static_cast<int>(histogram_bank.histograms.size()) > histogram_bank.capacity)
    throw std::invalid_argument("footprint: histogram bank exceeds capacity");
  for (const auto& h : histogram_bank.histograms) {
    if (h.size() != codebook.size()) throw std::invalid_argument("footprint: histogram length != K");
    if ((h.array() < 0).any() || std::abs(h.sum() - 1.0) > 1e-9)
      throw std::invalid_argument("footprint: histogram is not a probability vector");
  }
  if (!(mu_n >= 1) || !(sigma_n >= 0)) throw std::invalid_argument("footprint: bad patch-count statistics");
  if (style.r.size() == 0 || std::abs(style.r.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("footprint: style prototype is not unit norm");
}

DomainFootprint build_footprint(std::span<const Slide> slides, const FootprintConfig& config,
                                const FrozenTextEncoder& encoder, RngStream& rng) {
  if (slides.empty()) throw std::invalid_argument("build_footprint: no training slides");
  if (config.max_slides < 1 || config.max_patches < 1 || config.histograms < 1)
    throw std::invalid_argument("build_footprint: bounds must be positive");
  const int domain = slides.front().domain_id;
  for (const auto& s : slides)
    if (s.domain_id != domain) throw std::invalid_argument("build_footprint: slides from several domains");

  RngStream subsample_rng = rng.fork(1);
  RngStream kmeans_rng = rng.fork(2);
  RngStream bank_rng = rng.fork(3);

  std::vector<Vec> pool;
  const auto chosen = subsample_rng.sample_without_replacement(
      slides.size(), std::min(slides.size(), static_cast<std::size_t>(config.max_slides)));
  for (std::size_t si : chosen) {
    const auto& vecs = slides[si].patches.vectors;
    const auto picks =
        subsample_rng.sample_without_replacement(vecs.size(), std::min(vecs.size(), static_cast<std::size_t>(config.max_patches)));
    for (std::size_t pi : picks) pool.push_back(vecs[pi]);
  }

  DomainFootprint fp;
  fp.domain_id = domain;
  fp.organ_token = slides.front().prompt.empty() ? 0 : slides.front().prompt.front();
  fp.codebook = kmeans(pool, config.codewords, kmeans_rng, config.kmeans);

  fp.histogram_bank.capacity = config.histograms;
  const auto bank_idx = bank_rng.sample_without_replacement(
      slides.size(), std::min(slides.size(), static_cast<std::size_t>(config.histograms)));
  for (std::size_t si : bank_idx) fp.histogram_bank.histograms.push_back(slide_histogram(slides[si].patches, fp.codebook));

  double sum = 0.0;
  for (const auto& s : slides) sum += static_cast<double>(s.patches.count());
  fp.mu_n = sum / static_cast<double>(slides.size());
  double var = 0.0;
  for (const auto& s : slides) {
    const double d = static_cast<double>(s.patches.count()) - fp.mu_n;
    var += d * d;
  }
  fp.sigma_n = std::sqrt(var / static_cast<double>(slides.size()));

  std::vector<TokenSeq> reports;
  reports.reserve(slides.size());
  for (const auto& s : slides) reports.push_back(s.report);
  fp.style = style_prototype(reports, encoder);
  return fp;
}

int route_domain(const PatchSet& patches, std::span<const DomainFootprint> footprints) {
  if (footprints.empty()) throw std::invalid_argument("route_domain: no footprints");
  int best_id = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& fp : footprints) {
    const double qe = qe_score(patches, fp.codebook);
    if (qe < best || (qe == best && fp.domain_id < best_id)) {
      best = qe;
      best_id = fp.domain_id;
    }
  }
  return best_id;
}

}  // namespace fgr
