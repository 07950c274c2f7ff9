#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace genolm {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Matthews correlation; 0 when any marginal of the table is empty.
double mcc(const ConfusionCounts& cc);

/// Row = true class, column = predicted class.
using ConfusionMatrix = std::vector<std::vector<std::uint64_t>>;

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

/// Support-weighted mean of per-class F1 (F1 = 0 when precision + recall = 0).
double weighted_f1(const ConfusionMatrix& m);

double accuracy(const ConfusionMatrix& m);

/// Sample Pearson correlation. Throws ConstantInput or InvalidArgument.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Area under the ROC curve for "higher score means positive", via the rank
/// statistic with average ranks for ties. Throws DegenerateLabels.
double auroc(std::span<const double> scores, const std::vector<bool>& positive);

/// Average precision: sum over distinct thresholds (high to low) of
/// (recall step) x precision. Throws DegenerateLabels.
double auprc(std::span<const double> scores, const std::vector<bool>& positive);

// ---------------------------------------------------------------- embeddings

/// Row-major n x d matrix with one label per row.
struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::string> labels;
  std::vector<std::string> ids;

  std::size_t rows() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return std::span(values).subspan(i * dim, dim); }
  void add(std::span<const double> v, std::string label, std::string id = {});
};

/// L1-normalized overlapping k-mer counts (4^k entries, lexicographic).
std::vector<double> profile_embedding(std::string_view bases, int k);

struct Projection {
  std::size_t dims = 0;
  std::vector<double> coords;            // n x dims, row-major
  std::vector<double> components;        // dims x d, row-major unit vectors
  std::vector<double> explained_variance;
  std::vector<double> explained_ratio;   // share of total variance
  std::size_t rank_deficit = 0;          // components zero-filled
  std::vector<std::size_t> iterations;
};

struct PcaOptions {
  double cosine_tolerance = 1e-10;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0;
};

/// Principal components by power iteration with deflation on the implicit
/// covariance, followed by a Rayleigh-Ritz rotation of the found subspace.
/// Each component's largest-magnitude entry is made positive. Components of
/// a rank-deficient covariance are zero-filled and counted in rank_deficit.
Projection pca_project(const EmbeddingSet& set, std::size_t dims = 2, const PcaOptions& options = {});

enum class Distance { Euclidean, Cosine };

/// Mean silhouette over all points; singleton clusters score 0.
double silhouette(const EmbeddingSet& set, Distance distance = Distance::Euclidean, unsigned threads = 0);

/// "#id\tlabel\tv1..vd"; read_embedding_tsv accepts the same layout.
void write_embedding_tsv(std::ostream& out, const EmbeddingSet& set);
EmbeddingSet read_embedding_tsv(std::istream& in);

/// "#id\tlabel\tx\ty..." with one column per component.
void write_projection_tsv(std::ostream& out, const EmbeddingSet& set, const Projection& p);

/// The rows of `p` as an embedding set carrying `set`'s labels and ids.
EmbeddingSet projected(const EmbeddingSet& set, const Projection& p);

}  // namespace genolm
