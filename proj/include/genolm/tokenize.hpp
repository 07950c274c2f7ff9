#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "genolm/seqcore.hpp"
#include "genolm/vocabulary.hpp"

namespace genolm {

/// Sequence <-> token-id conversion shared by every model-facing workflow.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual const Vocabulary& vocabulary() const noexcept = 0;
  /// Nucleotides per token when constant (k-mer), 0 when variable (BPE).
  virtual std::size_t fixed_token_length() const noexcept = 0;
  /// Encodes N-free bases from position 0. For k-mers a trailing remainder
  /// shorter than k is dropped; use KmerTokenizer::encode for the residual.
  virtual std::vector<TokenId> encode(std::string_view bases) const = 0;
  virtual std::string decode(std::span<const TokenId> ids) const = 0;
  virtual std::string describe() const = 0;
};

struct FixedOffset {
  int offset = 0;
};
struct RandomOffset {
  std::uint64_t seed = 0;
};

struct KmerSpec {
  int k = 6;
  std::variant<FixedOffset, RandomOffset> offset_policy = FixedOffset{};
};

struct KmerEncoding {
  int offset_used = 0;
  std::vector<TokenId> ids;
  std::string head;  // the offset_used leading nucleotides
  std::string tail;  // trailing remainder shorter than k
};

class KmerTokenizer final : public Tokenizer {
 public:
  explicit KmerTokenizer(int k);

  int k() const noexcept { return k_; }
  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  std::size_t fixed_token_length() const noexcept override { return static_cast<std::size_t>(k_); }
  std::vector<TokenId> encode(std::string_view bases) const override;
  std::string decode(std::span<const TokenId> ids) const override;
  std::string describe() const override { return "kmer:" + std::to_string(k_); }

  /// Encodes with a phase offset. `offset_policy` must belong to a spec with
  /// the same k.
  KmerEncoding encode(const NucleotideSequence& seq, const KmerSpec& spec) const;
  KmerEncoding encode_with_offset(std::string_view bases, int offset) const;

  /// Rank of a k-mer in lexicographic order; bases must be ACGT.
  TokenId kmer_id(std::string_view kmer) const;

 private:
  int k_;
  Vocabulary vocab_;
};

struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  Vocabulary vocab;
  std::uint64_t seed = 0;

  /// Rebuilds the vocabulary from merges and checks it equals `vocab`.
  static BpeModel from_merges(std::vector<std::pair<std::string, std::string>> merges,
                              std::uint64_t seed = 0);
};

struct BpeTrainOptions {
  /// When non-zero and the corpus is larger, a seeded subset of sequences
  /// totalling about this many nucleotides is used for counting.
  std::size_t max_sample_nt = 0;
};

/// Greedy BPE: the most frequent adjacent pair is merged each round, ties
/// broken by the lexicographic order of the merged string and then of the
/// left token. Stops at target_vocab (specials included) or when no pair
/// occurs at least twice.
BpeModel bpe_train(const std::vector<NucleotideSequence>& corpus, std::size_t target_vocab,
                   std::uint64_t seed, const BpeTrainOptions& options = {});

class BpeTokenizer final : public Tokenizer {
 public:
  explicit BpeTokenizer(BpeModel model);

  const BpeModel& model() const noexcept { return model_; }
  const Vocabulary& vocabulary() const noexcept override { return model_.vocab; }
  std::size_t fixed_token_length() const noexcept override { return 0; }
  std::vector<TokenId> encode(std::string_view bases) const override;
  std::string decode(std::span<const TokenId> ids) const override;
  std::string describe() const override {
    return "bpe:" + std::to_string(model_.vocab.size());
  }

 private:
  struct PairHash {
    std::size_t operator()(std::uint64_t key) const noexcept { return key * 0x9E3779B97F4A7C15ULL; }
  };
  BpeModel model_;
  // (left << 32 | right) -> (rank, merged id)
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, TokenId>, PairHash> ranks_;
};

char token_char(const Vocabulary& vocab, TokenId id, std::size_t j);

/// JSON persistence: {"type":"kmer","k":..} or {"type":"bpe","merges":..},
/// both carrying "tokens" and "specials".
void save_tokenizer(const Tokenizer& tokenizer, const std::string& path);
std::unique_ptr<Tokenizer> load_tokenizer(const std::string& path);
std::string tokenizer_json(const Tokenizer& tokenizer);
std::unique_ptr<Tokenizer> tokenizer_from_json(std::string_view text);

/// "kmer:6" or a path to a saved tokenizer JSON.
std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec);

}  // namespace genolm
