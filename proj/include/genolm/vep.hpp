#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "genolm/lm.hpp"
#include "genolm/sample.hpp"
#include "genolm/seqcore.hpp"
#include "genolm/tokenize.hpp"

namespace genolm {

using Genome = std::map<std::string, NucleotideSequence, std::less<>>;

Genome make_genome(std::vector<NucleotideSequence> records);

struct Variant {
  std::string seq_id;
  std::size_t pos = 0;  // 1-based
  char ref = 'N';
  char alt = 'N';
  std::optional<bool> pathogenic;
};

/// TSV: seq_id, pos, ref, alt, label (benign | pathogenic | . | empty).
/// Lines starting with '#' and a leading "seq_id" header are skipped.
std::vector<Variant> read_variants(std::istream& in);
std::vector<Variant> read_variants_file(const std::string& path);

/// Throws UnknownSequenceId, OffsetOutOfRange or RefMismatch.
void validate_variant(const Genome& genome, const Variant& v);

struct NucleotideMarginal {
  std::array<double, 4> probs{};  // A, C, G, T
  double operator[](char base) const;
};

/// Collapses a token distribution to the j-th nucleotide of the next token.
/// Specials (and tokens shorter than j+1) are dropped and the rest
/// renormalized.
NucleotideMarginal marginalize(const TokenDistribution& dist, const Vocabulary& vocab, std::size_t j);

/// Encodes `context_before` so it ends on a token boundary (k-mer contexts
/// lose their leading len mod k bases) and marginalizes the model's next
/// token at offset j.
NucleotideMarginal marginal_nucleotide_prob(const CausalLm& lm, const Tokenizer& tokenizer,
                                            std::string_view context_before, std::size_t j,
                                            std::size_t max_context_tokens = std::size_t{1} << 20);

inline constexpr double kProbabilityFloor = 1e-18;
inline constexpr double kScoreCap = 40.0;

/// log p(ref) - log p(alt) with the floor and cap applied.
double llr_score(const NucleotideMarginal& m, char ref, char alt);

enum class VepMode { Causal, Mlm };

struct VepOptions {
  VepMode mode = VepMode::Causal;
  /// Offset of the variant inside the predicted token; -1 means k-1 (and 0
  /// for variable-length tokens).
  int phase = -1;
  bool average_phases = false;
  /// Causal mode: nucleotides of left context.
  std::size_t context_nt = 6144;
  /// Masked mode: total flank, split evenly left and right of the token.
  std::size_t window_nt = 12288;
  unsigned threads = 0;
};

struct VepResult {
  double score = 0.0;
  /// The context window was cut by a contig edge or an N, or the phase had
  /// to move because the variant sits within k-1 bases of the contig start.
  bool truncated = false;
  std::size_t phases = 1;
};

VepResult vep_score(const CausalLm& lm, const Tokenizer& tokenizer, const Genome& genome, const Variant& v,
                    const VepOptions& options = {});

VepResult mlm_vep_score(const MaskedLm& mlm, const Tokenizer& tokenizer, const Genome& genome, const Variant& v,
                        const VepOptions& options = {});

/// Scores every variant in parallel. Masked mode needs `mlm`; causal mode
/// uses `lm`.
std::vector<VepResult> score_variants(const CausalLm* lm, const MaskedLm* mlm, const Tokenizer& tokenizer,
                                      const Genome& genome, const std::vector<Variant>& variants,
                                      const VepOptions& options);

struct VepMetrics {
  double auroc = 0.0;
  double auprc = 0.0;
  std::size_t n = 0;
  std::size_t positives = 0;
};

/// Pathogenic is the positive class; the statistic is vep_score as is, so a
/// larger score (reference more strongly preferred) ranks as more
/// pathogenic. Throws DegenerateLabels.
VepMetrics evaluate_vep(std::span<const double> scores, const std::vector<bool>& pathogenic);

void write_vep_tsv(std::ostream& out, const std::vector<Variant>& variants, const std::vector<VepResult>& results);

/// Reads a table written by write_vep_tsv (only labeled rows are kept).
void read_vep_tsv(std::istream& in, std::vector<double>& scores, std::vector<bool>& pathogenic);

nlohmann::json vep_metrics_json(const VepMetrics& m);

}  // namespace genolm
