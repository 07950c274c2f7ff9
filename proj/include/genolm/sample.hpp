#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "genolm/lm.hpp"
#include "genolm/rng.hpp"
#include "genolm/seqcore.hpp"
#include "genolm/tokenize.hpp"

namespace genolm {

enum class DecodeMode { Sample, Greedy };

struct SamplerConfig {
  double temperature = 1.0;  // > 0
  double top_p = 1.0;        // (0, 1]
  std::size_t max_new_tokens = 64;
  std::uint64_t seed = 0;
  DecodeMode mode = DecodeMode::Sample;  // greedy ignores temperature and top_p
  std::size_t max_context = std::size_t{1} << 20;

  void validate() const;
};

/// Grids swept for generation hyperparameters.
inline constexpr double kTemperatureGrid[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
inline constexpr double kTopPGrid[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

/// The distribution a single decoding step draws from: specials other than
/// EOS removed, probs^(1/T) renormalized, then truncated to the smallest
/// probability-sorted prefix (ties: lower id first) holding at least top_p
/// of the mass, and renormalized again. Greedy mode yields a point mass on
/// the arg-max (lowest id among ties).
std::vector<double> candidate_distribution(const TokenDistribution& dist, const Vocabulary& vocab,
                                           const SamplerConfig& config);

TokenId select_token(const TokenDistribution& dist, const Vocabulary& vocab, const SamplerConfig& config,
                     Rng& rng);

/// Autoregressive continuation of `prompt`. Returns the new tokens only; a
/// sampled EOS ends generation and is not included. `job` selects the
/// random stream, so parallel jobs under one seed stay independent.
std::vector<TokenId> generate(const CausalLm& lm, std::span<const TokenId> prompt, const SamplerConfig& config,
                              std::uint64_t job = 0);

/// Masked-LM contract: distribution for the single MASK token in `ids`.
class MaskedLm {
 public:
  virtual ~MaskedLm() = default;
  virtual TokenDistribution distribution_at_mask(std::span<const TokenId> ids_with_single_mask) const = 0;
  virtual const Vocabulary& vocabulary() const noexcept = 0;
};

/// Presents a causal model as a masked one by conditioning on the tokens
/// left of the mask; right context is ignored.
class CausalAsMaskedLm final : public MaskedLm {
 public:
  explicit CausalAsMaskedLm(const CausalLm& lm) : lm_(lm) {}
  TokenDistribution distribution_at_mask(std::span<const TokenId> ids) const override;
  const Vocabulary& vocabulary() const noexcept override { return lm_.vocabulary(); }

 private:
  const CausalLm& lm_;
};

/// Sequential decoding for masked models: append MASK, query it, replace it
/// with the selected token, repeat n_steps times (or until EOS).
std::vector<TokenId> mlm_sequential_decode(const MaskedLm& mlm, std::span<const TokenId> prompt,
                                           std::size_t n_steps, const SamplerConfig& config,
                                           std::uint64_t job = 0);

struct ConditionedRequest {
  std::string prefix;          // "high" | "mid" | "low" (or "<high>" ...)
  std::string seed_context;    // nucleotides placed after the prefix token
  std::size_t count = 1;
  /// When set, outputs equal to any of these or to an earlier output are
  /// dropped.
  const std::set<std::string>* dedup_against = nullptr;
  unsigned threads = 0;
};

struct ConditionedResult {
  std::vector<NucleotideSequence> sequences;
  std::size_t duplicates_removed = 0;
  bool exhausted = false;  // fewer unique sequences than requested
};

/// Prefix-conditioned generation: each job is primed with
/// [BOS, prefix] + tokens(seed_context) and decoded to nucleotides.
ConditionedResult conditioned_generate(const CausalLm& lm, const Tokenizer& tokenizer,
                                       const ConditionedRequest& request, const SamplerConfig& config);

/// Throws VocabularyMismatch unless both vocabularies are identical.
void require_same_vocabulary(const Vocabulary& model, const Vocabulary& tokenizer);

}  // namespace genolm
