#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "genolm/ingest.hpp"
#include "genolm/lm.hpp"
#include "genolm/sample.hpp"
#include "genolm/tokenize.hpp"

namespace genolm {

struct RecoveryItem {
  NucleotideSequence prompt;
  NucleotideSequence reference;
  std::string taxon_group;
};

/// Fraction of the first L positions where generated matches reference.
/// Positions missing from a short `generated` count as mismatches.
double recovery_accuracy(std::string_view reference, std::string_view generated, std::size_t length);

enum class RecoveryAnchor {
  GeneStart,  // continuation starts at the first gene nucleotide
  Random,     // continuation starts uniformly inside the gene
};

struct RecoveryDatasetConfig {
  std::size_t prompt_len = 6144;
  std::size_t predict_len = 30;
  std::size_t per_group_n = 100;
  std::uint64_t seed = 0;
  RecoveryAnchor anchor = RecoveryAnchor::GeneStart;
};

/// Items whose continuation lies inside a functional region and whose
/// prompt is the prompt_len nucleotides before it, read on the region's
/// strand (so the prompt may cover intergenic context). Loci that are too
/// short, too close to a contig end, or touch N are not eligible. Groups are
/// balanced; throws InsufficientData when a group lacks eligible loci.
std::vector<RecoveryItem> build_recovery_dataset(const std::vector<FunctionalRegion>& regions,
                                                 const std::vector<NucleotideSequence>& genome,
                                                 const RecoveryDatasetConfig& config);

struct RecoveryRunConfig {
  std::vector<std::size_t> predict_lens = {30};
  SamplerConfig sampler = [] {
    SamplerConfig c;
    c.mode = DecodeMode::Greedy;
    return c;
  }();
  unsigned threads = 0;
};

struct RecoveryCell {
  std::string group;
  std::size_t prompt_len = 0;
  std::size_t predict_len = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryCell> cells;  // sorted by (group, prompt_len, predict_len)
  /// Unweighted mean of group means, keyed by (prompt_len, predict_len).
  std::map<std::pair<std::size_t, std::size_t>, double> overall;
  /// accuracy[item][length index]
  std::vector<std::vector<double>> item_accuracy;
};

/// Greedy (or sampled, per config) continuation of every item. K-mer
/// prompts are left-trimmed to a multiple of k so the continuation starts on
/// a token boundary; ceil(max L / k) tokens are generated.
RecoveryReport run_recovery(const CausalLm& lm, const Tokenizer& tokenizer, const std::vector<RecoveryItem>& items,
                            const RecoveryRunConfig& config);
RecoveryReport run_recovery(const MaskedLm& mlm, const Tokenizer& tokenizer, const std::vector<RecoveryItem>& items,
                            const RecoveryRunConfig& config);

void write_recovery_dataset(std::ostream& out, const std::vector<RecoveryItem>& items);
std::vector<RecoveryItem> read_recovery_dataset(std::istream& in);
void write_recovery_report_tsv(std::ostream& out, const RecoveryReport& report);
std::string recovery_report_json(const RecoveryReport& report);

}  // namespace genolm
