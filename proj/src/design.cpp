#include "genolm/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/rng.hpp"

namespace genolm {

std::string to_string(PromoterClass c) { return c == PromoterClass::Dev ? "dev" : "hk"; }

PromoterClass parse_promoter_class(std::string_view s) {
  if (s == "dev" || s == "Dev") return PromoterClass::Dev;
  if (s == "hk" || s == "Hk") return PromoterClass::Hk;
  throw Error(ErrorCode::InvalidArgument, "head must be dev or hk, got '" + std::string(s) + "'");
}

std::string to_string(ActivityLabel l) {
  switch (l) {
    case ActivityLabel::Low: return "low";
    case ActivityLabel::Mid: return "mid";
    case ActivityLabel::High: return "high";
  }
  return "mid";
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) out.push_back(f);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<StarrRow> read_starr_tsv(std::istream& in) {
  std::vector<StarrRow> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    if (f[0] == "sequence") continue;
    if (f.size() != 3 && f.size() != 4) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": expected 3 or 4 columns");
    StarrRow r;
    r.sequence = NucleotideSequence::validate(f[0]).bases();
    r.dev = parse_double(f[1], line_no);
    r.hk = parse_double(f[2], line_no);
    if (f.size() == 4) r.split = f[3];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StarrRow> read_starr_tsv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_starr_tsv(in);
}

std::vector<ActivityRecord> activity_records(const std::vector<StarrRow>& rows, PromoterClass head,
                                             std::string_view split) {
  std::vector<ActivityRecord> out;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    if (!split.empty() && r.split != split) continue;
    out.push_back({NucleotideSequence::trusted(r.sequence, "row" + std::to_string(n + 1)),
                   head == PromoterClass::Dev ? r.dev : r.hk, head});
  }
  return out;
}

QuantileThresholds activity_quartiles(std::span<const double> activities) {
  if (activities.size() < 4) throw Error(ErrorCode::TooFewSamples, "quantile labels need at least 4 activities");
  std::vector<double> s(activities.begin(), activities.end());
  for (const double a : s) {
    if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "non-finite activity");
  }
  std::sort(s.begin(), s.end());
  auto pct = [&](double p) {
    const double pos = p * static_cast<double>(s.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (s[hi] - s[lo]) * (pos - static_cast<double>(lo));
  };
  return {pct(0.25), pct(0.75)};
}

std::vector<ActivityLabel> quantile_labels(std::span<const double> activities) {
  const auto q = activity_quartiles(activities);
  std::vector<ActivityLabel> out;
  out.reserve(activities.size());
  for (const double a : activities) {
    out.push_back(a < q.q25 ? ActivityLabel::Low : (a > q.q75 ? ActivityLabel::High : ActivityLabel::Mid));
  }
  return out;
}

std::vector<std::vector<TokenId>> build_prefix_dataset(const std::vector<ActivityRecord>& records,
                                                       const std::vector<ActivityLabel>& labels,
                                                       const Tokenizer& tokenizer) {
  if (records.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "records and labels differ in length");
  const Vocabulary& vocab = tokenizer.vocabulary();
  std::vector<std::vector<TokenId>> out;
  out.reserve(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    std::vector<TokenId> ids{vocab.bos(), vocab.prefix_token(to_string(labels[n]))};
    const auto body = tokenizer.encode(records[n].sequence.view());
    ids.insert(ids.end(), body.begin(), body.end());
    ids.push_back(vocab.eos());
    out.push_back(std::move(ids));
  }
  return out;
}

std::vector<std::pair<std::uint32_t, double>> kmer_counts(std::string_view bases, int k) {
  if (k < 1 || k > 8) throw Error(ErrorCode::InvalidArgument, "k must be in [1,8]");
  std::vector<std::uint32_t> codes;
  const std::uint32_t mask = (std::uint32_t{1} << (2 * k)) - 1;
  std::uint32_t code = 0;
  int run = 0;
  for (const char c : bases) {
    const int b = base_index(c);
    if (b < 0) {
      run = 0;
      continue;
    }
    code = ((code << 2) | static_cast<std::uint32_t>(b)) & mask;
    if (++run >= k) codes.push_back(code);
  }
  std::sort(codes.begin(), codes.end());
  std::vector<std::pair<std::uint32_t, double>> out;
  for (const auto c : codes) {
    if (!out.empty() && out.back().first == c) out.back().second += 1.0;
    else out.emplace_back(c, 1.0);
  }
  return out;
}

KmerRidgePredictor::KmerRidgePredictor(int k, std::vector<double> weights, double intercept, double mu, std::string head)
    : k_(k), weights_(std::move(weights)), intercept_(intercept), mu_(mu), head_(std::move(head)) {
  if (k < 1 || k > 8) throw Error(ErrorCode::InvalidArgument, "k must be in [1,8]");
  if (weights_.size() != (std::size_t{1} << (2 * k))) throw Error(ErrorCode::InvalidArgument, "weight vector must have 4^k entries");
}

double KmerRidgePredictor::predict(std::string_view bases) const {
  double y = intercept_;
  for (const auto& [code, count] : kmer_counts(bases, k_)) y += weights_[code] * count;
  return y;
}

nlohmann::json KmerRidgePredictor::to_json() const {
  return {{"format", "genolm-kmer-ridge"}, {"version", 1}, {"k", k_},           {"mu", mu_},
          {"head", head_},                 {"intercept", intercept_}, {"weights", weights_}};
}

KmerRidgePredictor KmerRidgePredictor::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "genolm-kmer-ridge") throw Error(ErrorCode::Format, "not a k-mer ridge model");
    return KmerRidgePredictor(j.at("k").get<int>(), j.at("weights").get<std::vector<double>>(),
                              j.at("intercept").get<double>(), j.at("mu").get<double>(), j.value("head", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("predictor JSON: ") + e.what());
  }
}

void KmerRidgePredictor::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << to_json().dump() << '\n';
}

KmerRidgePredictor KmerRidgePredictor::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path + ": " + e.what());
  }
  return from_json(j);
}

KmerRidgePredictor fit_kmer_ridge(const std::vector<ActivityRecord>& records, int k, double mu) {
  if (records.size() < 2) throw Error(ErrorCode::TooFewSamples, "ridge fit needs at least 2 records");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "mu must be finite and >= 0");
  if (k < 1 || k > 8) throw Error(ErrorCode::InvalidArgument, "k must be in [1,8]");
  const Eigen::Index d = Eigen::Index{1} << (2 * k);
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    if (!std::isfinite(rec.activity)) throw Error(ErrorCode::InvalidArgument, "non-finite activity");
    y(r) = rec.activity;
    for (const auto& [code, count] : kmer_counts(rec.sequence.view(), k)) triplets.emplace_back(r, code, count);
  }
  Eigen::SparseMatrix<double> x(n, d);
  x.setFromTriplets(triplets.begin(), triplets.end());

  // Centering folds the intercept out of the penalized system.
  const double nn = static_cast<double>(n);
  const Eigen::VectorXd x_mean = Eigen::VectorXd(x.transpose() * Eigen::VectorXd::Ones(n)) / nn;
  const double y_mean = y.mean();
  Eigen::MatrixXd gram = Eigen::MatrixXd(x.transpose() * x);
  gram.noalias() -= nn * x_mean * x_mean.transpose();
  const Eigen::VectorXd rhs = x.transpose() * y - nn * y_mean * x_mean;

  Eigen::VectorXd w;
  if (mu > 0.0) {
    gram.diagonal().array() += mu;
    w = gram.ldlt().solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-10);
    if (qr.rank() < d) {
      throw Error(ErrorCode::SingularSystem, "rank " + std::to_string(qr.rank()) + " of " + std::to_string(d) +
                                                 " at mu=0; use mu > 0");
    }
    w = qr.solve(rhs);
  }
  if (!w.allFinite()) throw Error(ErrorCode::SingularSystem, "solve produced non-finite weights");
  const double intercept = y_mean - w.dot(x_mean);
  return KmerRidgePredictor(k, std::vector<double>(w.data(), w.data() + w.size()), intercept, mu,
                            to_string(records.front().promoter_class));
}

SelectionReport rank_and_select(const ActivityPredictor& predictor, const std::vector<Candidate>& candidates,
                                const SelectionPlan& plan) {
  std::vector<double> pred(candidates.size());
  parallel_for(candidates.size(), plan.threads, [&](std::size_t n) { pred[n] = predictor.predict(candidates[n].sequence); });

  auto pool_of = [&](const std::string& group) {
    std::vector<std::size_t> pool;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
      if (group == "*" || candidates[n].group == group) pool.push_back(n);
    }
    return pool;
  };
  std::vector<bool> taken(candidates.size(), false);
  SelectionReport report;
  report.candidates = candidates.size();

  auto take_sorted = [&](const std::string& group, std::size_t count, bool descending, const char* pick) {
    if (count == 0) return;
    auto pool = pool_of(group);
    std::erase_if(pool, [&](std::size_t n) { return taken[n]; });
    if (pool.size() < count) {
      throw Error(ErrorCode::PoolTooSmall, std::string(pick) + " needs " + std::to_string(count) + " from group '" + group +
                                               "', which has " + std::to_string(pool.size()));
    }
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
      if (pred[a] != pred[b]) return descending ? pred[a] > pred[b] : pred[a] < pred[b];
      if (candidates[a].sequence != candidates[b].sequence) return candidates[a].sequence < candidates[b].sequence;
      return a < b;
    });
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t n = pool[r];
      taken[n] = true;
      report.selected.push_back({candidates[n].id, candidates[n].sequence, candidates[n].group, pick, r + 1, pred[n]});
    }
  };
  take_sorted(plan.top_group, plan.top, true, "top");
  take_sorted(plan.bottom_group, plan.bottom, false, "bottom");

  if (plan.random > 0) {
    auto pool = pool_of(plan.random_group);
    std::erase_if(pool, [&](std::size_t n) { return taken[n]; });
    if (pool.size() < plan.random) {
      throw Error(ErrorCode::PoolTooSmall, "random needs " + std::to_string(plan.random) + " from group '" +
                                               plan.random_group + "', which has " + std::to_string(pool.size()));
    }
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
      return candidates[a].sequence != candidates[b].sequence ? candidates[a].sequence < candidates[b].sequence : a < b;
    });
    Rng rng(plan.seed);
    rng.shuffle(std::span(pool));
    for (std::size_t r = 0; r < plan.random; ++r) {
      const std::size_t n = pool[r];
      report.selected.push_back({candidates[n].id, candidates[n].sequence, candidates[n].group, "random", r + 1, pred[n]});
    }
  }
  return report;
}

void write_selection_fasta(std::ostream& out, const SelectionReport& report) {
  char buf[64];
  for (const auto& s : report.selected) {
    std::snprintf(buf, sizeof buf, "%.10g", s.predicted);
    const std::string header = s.id + " pick=" + s.pick + " rank=" + std::to_string(s.rank) +
                               " group=" + (s.group.empty() ? "." : s.group) + " predicted=" + buf;
    write_fasta_record(out, header, s.sequence);
  }
}

std::vector<double> contribution_scores(const ActivityPredictor& predictor, std::string_view bases, unsigned threads) {
  if (bases.empty()) throw Error(ErrorCode::InvalidArgument, "contribution scores need a non-empty sequence");
  const double base_value = predictor.predict(bases);
  std::vector<double> out(bases.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(bases.size(), threads, [&](std::size_t i) {
    const int own = base_index(bases[i]);
    if (own < 0) return;
    std::string mutant(bases);
    double sum = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == own) continue;
      mutant[i] = kBases[static_cast<std::size_t>(b)];
      sum += predictor.predict(mutant);
    }
    out[i] = base_value - sum / 3.0;
  });
  return out;
}

void write_contribution_tsv(std::ostream& out, std::string_view bases, std::span<const double> scores) {
  if (bases.size() != scores.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  out << "#pos\tbase\tC\n";
  char buf[64];
  for (std::size_t i = 0; i < bases.size(); ++i) {
    out << i + 1 << '\t' << bases[i] << '\t';
    if (std::isnan(scores[i])) {
      out << "NA\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.10g", scores[i]);
      out << buf << '\n';
    }
  }
}

}  // namespace genolm
