#include "genolm/vocabulary.hpp"

#include <nlohmann/json.hpp>

#include "genolm/error.hpp"
#include "genolm/seqcore.hpp"

namespace genolm {

namespace {

constexpr std::string_view kSpecialNames[kNamedSpecials] = {
    "<bos>", "<eos>", "<mask>", "<unk>", "<pad>", "<high>", "<mid>", "<low>"};

bool spelled_special(std::string_view t) {
  return t.size() >= 2 && t.front() == '<' && t.back() == '>';
}

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string special_name(std::size_t slot) {
  if (slot < kNamedSpecials) return std::string(kSpecialNames[slot]);
  return "<reserved_" + std::to_string(slot) + ">";
}

Vocabulary Vocabulary::kmer(int k) {
  if (k < 1 || k > 8) throw Error(ErrorCode::InvalidArgument, "k must be in [1,8], got " + std::to_string(k));
  const std::size_t count = std::size_t{1} << (2 * k);
  Vocabulary v;
  v.tokens_.reserve(count + kSpecialSlots);
  std::string kmer(static_cast<std::size_t>(k), 'A');
  for (std::size_t id = 0; id < count; ++id) {
    std::size_t rest = id;
    for (int p = k - 1; p >= 0; --p) {
      kmer[static_cast<std::size_t>(p)] = kBases[rest & 3];
      rest >>= 2;
    }
    v.tokens_.push_back(kmer);
  }
  for (std::size_t s = 0; s < kSpecialSlots; ++s) v.tokens_.push_back(special_name(s));
  v.rebuild_index();
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.rebuild_index();
  return v;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(tokens_.size());
  first_special_ = tokens_.size();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (spelled_special(tokens_[i])) {
      if (first_special_ == tokens_.size()) first_special_ = i;
    } else {
      if (first_special_ != tokens_.size()) {
        throw Error(ErrorCode::Format, "sequence token '" + tokens_[i] + "' after special block");
      }
      for (const char c : tokens_[i]) {
        if (base_index(c) < 0) throw Error(ErrorCode::Format, "token '" + tokens_[i] + "' is not ACGT");
      }
    }
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::Format, "duplicate token '" + tokens_[i] + "'");
    }
  }
  if (tokens_.size() - first_special_ < kNamedSpecials) {
    throw Error(ErrorCode::Format, "vocabulary lacks the reserved special tokens");
  }
  for (std::size_t s = 0; s < kNamedSpecials; ++s) {
    if (tokens_[first_special_ + s] != kSpecialNames[s]) {
      throw Error(ErrorCode::Format, "special slot " + std::to_string(s) + " must be " +
                                         std::string(kSpecialNames[s]));
    }
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  hash_ = h;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(id));
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id_of(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw Error(ErrorCode::UnknownTokenId, "'" + std::string(token) + "'");
}

TokenId Vocabulary::prefix_token(std::string_view label) const {
  std::string spelled(label);
  if (!spelled_special(spelled)) spelled = "<" + spelled + ">";
  if (spelled != "<high>" && spelled != "<mid>" && spelled != "<low>") {
    throw Error(ErrorCode::UnknownPrefixToken, "'" + std::string(label) + "'");
  }
  if (auto id = find(spelled)) return *id;
  throw Error(ErrorCode::UnknownPrefixToken, "'" + spelled + "' not in vocabulary");
}

char Vocabulary::token_char(TokenId id, std::size_t j) const {
  if (id >= tokens_.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(id));
  if (is_special(id)) throw Error(ErrorCode::OffsetOutOfRange, "special token " + tokens_[id]);
  const std::string& t = tokens_[id];
  if (j >= t.size()) {
    throw Error(ErrorCode::OffsetOutOfRange,
                "offset " + std::to_string(j) + " in token of length " + std::to_string(t.size()));
  }
  return t[j];
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json specials = nlohmann::json::object();
  for (std::size_t s = 0; s < kNamedSpecials; ++s) specials[std::string(kSpecialNames[s])] = first_special_ + s;
  return {{"tokens", tokens_}, {"specials", specials}};
}

}  // namespace genolm
