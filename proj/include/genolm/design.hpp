#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "genolm/tokenize.hpp"

namespace genolm {

enum class PromoterClass { Dev, Hk };

std::string to_string(PromoterClass c);
PromoterClass parse_promoter_class(std::string_view s);  // "dev" | "hk"

struct ActivityRecord {
  NucleotideSequence sequence;
  double activity = 0.0;  // log2 fold change
  PromoterClass promoter_class = PromoterClass::Dev;
};

/// One row of a DeepSTARR-style table: sequence, dev_activity, hk_activity, split.
struct StarrRow {
  std::string sequence;
  double dev = 0.0;
  double hk = 0.0;
  std::string split;
};

std::vector<StarrRow> read_starr_tsv(std::istream& in);
std::vector<StarrRow> read_starr_tsv_file(const std::string& path);

/// Records for one head, optionally restricted to a split ("" keeps all).
std::vector<ActivityRecord> activity_records(const std::vector<StarrRow>& rows, PromoterClass head,
                                             std::string_view split = {});

enum class ActivityLabel { Low, Mid, High };

std::string to_string(ActivityLabel l);  // "low" | "mid" | "high"

struct QuantileThresholds {
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linearly interpolated percentiles (the (n-1)p rank convention).
QuantileThresholds activity_quartiles(std::span<const double> activities);

/// low iff a < q25, high iff a > q75, mid otherwise. Throws TooFewSamples
/// for n < 4.
std::vector<ActivityLabel> quantile_labels(std::span<const double> activities);

/// [BOS, <label>, tokens(seq), EOS] per record.
std::vector<std::vector<TokenId>> build_prefix_dataset(const std::vector<ActivityRecord>& records,
                                                       const std::vector<ActivityLabel>& labels,
                                                       const Tokenizer& tokenizer);

class ActivityPredictor {
 public:
  virtual ~ActivityPredictor() = default;
  /// Positions holding N must be tolerated.
  virtual double predict(std::string_view bases) const = 0;
};

/// Overlapping k-mer counts; windows touching a non-ACGT symbol are skipped.
std::vector<std::pair<std::uint32_t, double>> kmer_counts(std::string_view bases, int k);

class KmerRidgePredictor final : public ActivityPredictor {
 public:
  KmerRidgePredictor(int k, std::vector<double> weights, double intercept, double mu, std::string head = {});

  double predict(std::string_view bases) const override;

  int k() const noexcept { return k_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double intercept() const noexcept { return intercept_; }
  double mu() const noexcept { return mu_; }
  const std::string& head() const noexcept { return head_; }

  nlohmann::json to_json() const;
  static KmerRidgePredictor from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static KmerRidgePredictor load(const std::string& path);

 private:
  int k_;
  std::vector<double> weights_;
  double intercept_;
  double mu_;
  std::string head_;
};

/// Ridge regression on raw k-mer counts with an unpenalized intercept.
/// Throws TooFewSamples (n < 2), InvalidArgument (mu < 0) and
/// SingularSystem (mu = 0 with a rank-deficient design).
KmerRidgePredictor fit_kmer_ridge(const std::vector<ActivityRecord>& records, int k = 5, double mu = 1.0);

struct Candidate {
  std::string id;
  std::string sequence;
  std::string group;  // e.g. "high"; empty when unlabeled
};

struct SelectionPlan {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t random = 0;
  std::uint64_t seed = 0;
  /// Pools each pick draws from; "*" means every candidate.
  std::string top_group = "high";
  std::string bottom_group = "low";
  std::string random_group = "mid";
  unsigned threads = 0;
};

struct Selected {
  std::string id;
  std::string sequence;
  std::string group;
  std::string pick;  // "top" | "bottom" | "random"
  std::size_t rank = 0;
  double predicted = 0.0;
};

struct SelectionReport {
  std::vector<Selected> selected;
  std::size_t candidates = 0;
};

/// Top picks sort by descending prediction, bottom picks by ascending;
/// equal predictions fall back to the lexicographically smaller sequence.
/// The random picks are a seeded draw from what remains of their pool.
SelectionReport rank_and_select(const ActivityPredictor& predictor, const std::vector<Candidate>& candidates,
                                const SelectionPlan& plan);

void write_selection_fasta(std::ostream& out, const SelectionReport& report);

/// C(i) = f(S) - mean over the three substitutions at i. Positions that are
/// not A/C/G/T yield NaN.
std::vector<double> contribution_scores(const ActivityPredictor& predictor, std::string_view bases, unsigned threads = 0);

/// "#pos\tbase\tC" with 1-based positions; NaN is written as NA.
void write_contribution_tsv(std::ostream& out, std::string_view bases, std::span<const double> scores);

}  // namespace genolm
