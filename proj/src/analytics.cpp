#include "genolm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/rng.hpp"
#include "genolm/seqcore.hpp"

namespace genolm {

double mcc(const ConfusionCounts& cc) {
  const double tp = static_cast<double>(cc.tp), tn = static_cast<double>(cc.tn);
  const double fp = static_cast<double>(cc.fp), fn = static_cast<double>(cc.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  ConfusionMatrix m(classes, std::vector<std::uint64_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes ||
        static_cast<std::size_t>(predicted[i]) >= classes) {
      throw Error(ErrorCode::InvalidArgument, "class index out of range");
    }
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return m;
}

double weighted_f1(const ConfusionMatrix& m) {
  const std::size_t c = m.size();
  std::uint64_t n = 0;
  for (const auto& row : m) {
    if (row.size() != c) throw Error(ErrorCode::InvalidArgument, "confusion matrix must be square");
    n += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "confusion matrix is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double support = static_cast<double>(std::accumulate(m[i].begin(), m[i].end(), std::uint64_t{0}));
    double predicted = 0.0;
    for (std::size_t r = 0; r < c; ++r) predicted += static_cast<double>(m[r][i]);
    const double tp = static_cast<double>(m[i][i]);
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    total += support / static_cast<double>(n) * f1;
  }
  return total;
}

double accuracy(const ConfusionMatrix& m) {
  std::uint64_t n = 0, hit = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    n += std::accumulate(m[i].begin(), m[i].end(), std::uint64_t{0});
    hit += m[i][i];
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "confusion matrix is empty");
  return static_cast<double>(hit) / static_cast<double>(n);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantInput, "a variable is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

void check_labels(std::span<const double> scores, const std::vector<bool>& positive, std::size_t& pos, std::size_t& neg) {
  if (scores.size() != positive.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  neg = positive.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::DegenerateLabels, "need at least one positive and one negative");
  for (const double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::InvalidArgument, "NaN score");
  }
}

}  // namespace

double auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  std::size_t pos = 0, neg = 0;
  check_labels(scores, positive, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1) / 2.0) / (p * q);
}

double auprc(std::span<const double> scores, const std::vector<bool>& positive) {
  std::size_t pos = 0, neg = 0;
  check_labels(scores, positive, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += positive[order[j]];
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

// ---------------------------------------------------------------- embeddings

void EmbeddingSet::add(std::span<const double> v, std::string label, std::string id) {
  if (labels.empty() && dim == 0) dim = v.size();
  if (v.size() != dim) throw Error(ErrorCode::InvalidArgument, "embedding dimension mismatch");
  for (const double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite embedding entry");
  }
  values.insert(values.end(), v.begin(), v.end());
  labels.push_back(std::move(label));
  ids.push_back(id.empty() ? "row" + std::to_string(labels.size() - 1) : std::move(id));
}

std::vector<double> profile_embedding(std::string_view bases, int k) {
  if (k < 1 || k > 8) throw Error(ErrorCode::InvalidArgument, "k must be in [1,8]");
  const std::size_t ku = static_cast<std::size_t>(k);
  if (bases.size() < ku) throw Error(ErrorCode::SequenceTooShort, std::to_string(bases.size()) + " < k");
  std::vector<double> counts(std::size_t{1} << (2 * k), 0.0);
  const std::size_t mask = counts.size() - 1;
  std::size_t code = 0;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const int b = base_index(bases[i]);
    if (b < 0) throw Error(ErrorCode::ContainsAmbiguousBase, "position " + std::to_string(i));
    code = ((code << 2) | static_cast<std::size_t>(b)) & mask;
    if (i + 1 >= ku) counts[code] += 1.0;
  }
  const double total = static_cast<double>(bases.size() - ku + 1);
  for (auto& c : counts) c /= total;
  return counts;
}

Projection pca_project(const EmbeddingSet& set, std::size_t dims, const PcaOptions& options) {
  const std::size_t n = set.rows(), d = set.dim;
  if (dims == 0) throw Error(ErrorCode::InvalidArgument, "dims must be positive");
  if (n < 2 || n < dims) throw Error(ErrorCode::TooFewSamples, "need at least max(2, dims) rows");
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat x = Eigen::Map<const Mat>(set.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  x.rowwise() -= x.colwise().mean();
  const double scale = 1.0 / static_cast<double>(n - 1);
  auto cov_times = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return scale * (x.transpose() * (x * v)); };
  const double total_variance = scale * x.squaredNorm();

  Projection out;
  out.dims = dims;
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(d), 0);
  Rng rng(options.seed);
  for (std::size_t c = 0; c < dims && c < d; ++c) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (auto& e : v) e = rng.uniform() - 0.5;
    auto deflate = [&](Eigen::VectorXd& w) {
      for (int pass = 0; pass < 2; ++pass) w -= basis * (basis.transpose() * w);
    };
    deflate(v);
    v.normalize();
    std::size_t it = 0;
    double lambda = 0.0;
    for (; it < options.max_iterations; ++it) {
      Eigen::VectorXd w = cov_times(v);
      deflate(w);
      lambda = w.norm();
      if (lambda <= 1e-300) break;
      w /= lambda;
      const double cosine = std::abs(w.dot(v));
      v = w;
      if (cosine > 1.0 - options.cosine_tolerance) {
        ++it;
        break;
      }
    }
    out.iterations.push_back(it);
    if (lambda <= 1e-12 * std::max(total_variance, 1e-300)) break;  // remaining directions carry no variance
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
  }

  // Rayleigh-Ritz: diagonalize the covariance inside the found subspace so
  // the projected coordinates are exactly uncorrelated.
  const Eigen::Index found = basis.cols();
  Eigen::MatrixXd comps = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(d));
  std::vector<double> variances(dims, 0.0);
  if (found > 0) {
    Eigen::MatrixXd cb(static_cast<Eigen::Index>(d), found);
    for (Eigen::Index c = 0; c < found; ++c) cb.col(c) = cov_times(basis.col(c));
    Eigen::MatrixXd small = basis.transpose() * cb;
    small = 0.5 * (small + small.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    for (Eigen::Index c = 0; c < found; ++c) {
      const Eigen::Index src = found - 1 - c;  // descending eigenvalues
      Eigen::VectorXd u = basis * es.eigenvectors().col(src);
      u.normalize();
      Eigen::Index arg = 0;
      u.cwiseAbs().maxCoeff(&arg);
      if (u(arg) < 0) u = -u;
      comps.row(c) = u.transpose();
      variances[static_cast<std::size_t>(c)] = std::max(0.0, es.eigenvalues()(src));
    }
  }
  out.rank_deficit = dims - static_cast<std::size_t>(found);
  const Mat coords = x * comps.transpose();
  out.coords.assign(coords.data(), coords.data() + coords.size());
  out.components.resize(dims * d);
  for (std::size_t c = 0; c < dims; ++c) {
    for (std::size_t j = 0; j < d; ++j) out.components[c * d + j] = comps(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
  }
  out.explained_variance = variances;
  for (const double v : variances) out.explained_ratio.push_back(total_variance > 0 ? v / total_variance : 0.0);
  return out;
}

EmbeddingSet projected(const EmbeddingSet& set, const Projection& p) {
  EmbeddingSet out;
  out.dim = p.dims;
  out.values = p.coords;
  out.labels = set.labels;
  out.ids = set.ids;
  return out;
}

namespace {

void put_number(std::ostream& out, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  out << buf;
}

}  // namespace

void write_embedding_tsv(std::ostream& out, const EmbeddingSet& set) {
  out << "#id\tlabel";
  for (std::size_t j = 0; j < set.dim; ++j) out << "\tv" << j + 1;
  out << '\n';
  for (std::size_t i = 0; i < set.rows(); ++i) {
    out << set.ids[i] << '\t' << set.labels[i];
    for (const double v : set.row(i)) {
      out << '\t';
      put_number(out, v);
    }
    out << '\n';
  }
}

EmbeddingSet read_embedding_tsv(std::istream& in) {
  EmbeddingSet set;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string id, label, field;
    std::getline(ss, id, '\t');
    if (!std::getline(ss, label, '\t')) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": missing label");
    row.clear();
    while (std::getline(ss, field, '\t')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != field.size()) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": bad value '" + field + "'");
      row.push_back(v);
    }
    if (row.empty()) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": no vector entries");
    try {
      set.add(row, label, id);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (set.rows() == 0) throw Error(ErrorCode::EmptyInput, "no embeddings");
  return set;
}

void write_projection_tsv(std::ostream& out, const EmbeddingSet& set, const Projection& p) {
  static const char* kAxis[] = {"x", "y", "z"};
  out << "#id\tlabel";
  for (std::size_t c = 0; c < p.dims; ++c) {
    if (c < 3) out << '\t' << kAxis[c];
    else out << "\tpc" << c + 1;
  }
  out << '\n';
  for (std::size_t i = 0; i < set.rows(); ++i) {
    out << set.ids[i] << '\t' << set.labels[i];
    for (std::size_t c = 0; c < p.dims; ++c) {
      out << '\t';
      put_number(out, p.coords[i * p.dims + c]);
    }
    out << '\n';
  }
}

double silhouette(const EmbeddingSet& set, Distance distance, unsigned threads) {
  const std::size_t n = set.rows();
  std::map<std::string, int> cluster_of;
  std::vector<int> cluster(n);
  for (std::size_t i = 0; i < n; ++i) cluster[i] = cluster_of.emplace(set.labels[i], static_cast<int>(cluster_of.size())).first->second;
  if (cluster_of.size() < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least two labels");
  const std::size_t k = cluster_of.size();
  std::vector<std::size_t> sizes(k, 0);
  for (const int c : cluster) ++sizes[static_cast<std::size_t>(c)];

  std::vector<double> norms(n, 0.0);
  if (distance == Distance::Cosine) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = set.row(i);
      norms[i] = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    }
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    const auto ra = set.row(a), rb = set.row(b);
    if (distance == Distance::Euclidean) {
      double s = 0.0;
      for (std::size_t j = 0; j < ra.size(); ++j) s += (ra[j] - rb[j]) * (ra[j] - rb[j]);
      return std::sqrt(s);
    }
    if (norms[a] == 0.0 || norms[b] == 0.0) return 1.0;
    return 1.0 - std::inner_product(ra.begin(), ra.end(), rb.begin(), 0.0) / (norms[a] * norms[b]);
  };

  std::vector<double> s(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const std::size_t own = static_cast<std::size_t>(cluster[i]);
    if (sizes[own] == 1) return;
    std::vector<double> sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(cluster[j])] += dist(i, j);
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    s[i] = m > 0 ? (b - a) / m : 0.0;
  });
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
}

}  // namespace genolm
