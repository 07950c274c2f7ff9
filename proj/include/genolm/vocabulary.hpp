#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace genolm {

using TokenId = std::uint32_t;

/// Named special tokens. They occupy the first slots of the reserved block
/// that sits above every sequence token.
enum class Special : std::uint32_t { Bos = 0, Eos, Mask, Unk, Pad, High, Mid, Low };

inline constexpr std::size_t kSpecialSlots = 32;
inline constexpr std::size_t kNamedSpecials = 8;

std::string special_name(std::size_t slot);

/// Dense token <-> id mapping. Sequence tokens come first, the 32 reserved
/// special slots last.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// 4^k k-mers in A<C<G<T lexicographic order followed by the specials.
  static Vocabulary kmer(int k);

  /// Builds from an ordered token list. Tokens spelled "<...>" are special
  /// and must form one contiguous block at the end.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t sequence_token_count() const noexcept { return first_special_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id_of(std::string_view token) const;  // throws UnknownTokenId

  bool is_special(TokenId id) const noexcept { return id >= first_special_; }
  TokenId special(Special s) const noexcept {
    return static_cast<TokenId>(first_special_ + static_cast<std::uint32_t>(s));
  }
  TokenId bos() const noexcept { return special(Special::Bos); }
  TokenId eos() const noexcept { return special(Special::Eos); }
  TokenId mask() const noexcept { return special(Special::Mask); }

  /// Prefix tokens "<high>", "<mid>", "<low>"; throws UnknownPrefixToken.
  TokenId prefix_token(std::string_view label) const;

  /// j-th nucleotide of a sequence token; OffsetOutOfRange for specials or
  /// j past the token end.
  char token_char(TokenId id, std::size_t j) const;

  /// FNV-1a over the token list; two vocabularies match iff hashes match.
  std::uint64_t hash() const noexcept { return hash_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  nlohmann::json to_json() const;

 private:
  void rebuild_index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t first_special_ = 0;
  std::uint64_t hash_ = 0;
};

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace genolm
