#include "genolm/tokenize.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "genolm/error.hpp"
#include "genolm/rng.hpp"

namespace genolm {

namespace {

void require_unambiguous(std::string_view bases) {
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (base_index(bases[i]) < 0) {
      throw Error(ErrorCode::ContainsAmbiguousBase, "position " + std::to_string(i) + " '" +
                                                        std::string(1, bases[i]) + "'");
    }
  }
}

constexpr std::uint64_t pair_key(TokenId a, TokenId b) noexcept {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<std::string> bpe_sequence_tokens(
    const std::vector<std::pair<std::string, std::string>>& merges) {
  std::vector<std::string> tokens = {"A", "C", "G", "T"};
  tokens.reserve(4 + merges.size() + kSpecialSlots);
  for (const auto& [l, r] : merges) tokens.push_back(l + r);
  return tokens;
}

}  // namespace

// ---------------------------------------------------------------- k-mer

KmerTokenizer::KmerTokenizer(int k) : k_(k), vocab_(Vocabulary::kmer(k)) {}

TokenId KmerTokenizer::kmer_id(std::string_view kmer) const {
  if (kmer.size() != static_cast<std::size_t>(k_)) {
    throw Error(ErrorCode::InvalidArgument, "k-mer '" + std::string(kmer) + "' has wrong length");
  }
  TokenId id = 0;
  for (const char c : kmer) {
    const int b = base_index(c);
    if (b < 0) throw Error(ErrorCode::ContainsAmbiguousBase, "k-mer '" + std::string(kmer) + "'");
    id = (id << 2) | static_cast<TokenId>(b);
  }
  return id;
}

KmerEncoding KmerTokenizer::encode_with_offset(std::string_view bases, int offset) const {
  if (offset < 0 || offset >= k_) {
    throw Error(ErrorCode::InvalidArgument,
                "offset " + std::to_string(offset) + " outside [0," + std::to_string(k_ - 1) + "]");
  }
  require_unambiguous(bases);
  KmerEncoding out;
  out.offset_used = offset;
  const std::size_t off = std::min<std::size_t>(static_cast<std::size_t>(offset), bases.size());
  out.head = std::string(bases.substr(0, off));
  const std::size_t k = static_cast<std::size_t>(k_);
  const std::size_t m = (bases.size() - off) / k;
  out.ids.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    TokenId id = 0;
    for (std::size_t p = off + t * k; p < off + (t + 1) * k; ++p) {
      id = (id << 2) | static_cast<TokenId>(base_index(bases[p]));
    }
    out.ids.push_back(id);
  }
  out.tail = std::string(bases.substr(off + m * k));
  return out;
}

KmerEncoding KmerTokenizer::encode(const NucleotideSequence& seq, const KmerSpec& spec) const {
  if (spec.k != k_) throw Error(ErrorCode::InvalidArgument, "KmerSpec k does not match tokenizer");
  int offset = 0;
  if (const auto* fixed = std::get_if<FixedOffset>(&spec.offset_policy)) {
    offset = fixed->offset;
  } else {
    Rng rng(std::get<RandomOffset>(spec.offset_policy).seed);
    offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(k_)));
  }
  return encode_with_offset(seq.view(), offset);
}

std::vector<TokenId> KmerTokenizer::encode(std::string_view bases) const {
  return encode_with_offset(bases, 0).ids;
}

std::string KmerTokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  out.reserve(ids.size() * static_cast<std::size_t>(k_));
  for (const TokenId id : ids) {
    if (id >= vocab_.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(id));
    if (vocab_.is_special(id)) {
      throw Error(ErrorCode::SpecialTokenInStream, std::to_string(id) + " " + vocab_.token(id));
    }
    out += vocab_.token(id);
  }
  return out;
}

// ---------------------------------------------------------------- BPE

BpeModel BpeModel::from_merges(std::vector<std::pair<std::string, std::string>> merges,
                               std::uint64_t seed) {
  auto tokens = bpe_sequence_tokens(merges);
  // Every merge must combine tokens that already exist.
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < 4; ++i) seen.emplace(tokens[i], i);
  for (std::size_t r = 0; r < merges.size(); ++r) {
    const auto& [l, rt] = merges[r];
    if (!seen.contains(l) || !seen.contains(rt)) {
      throw Error(ErrorCode::Format, "merge " + std::to_string(r) + " uses an unknown token");
    }
    if (!seen.emplace(l + rt, 4 + r).second) {
      throw Error(ErrorCode::Format, "merge " + std::to_string(r) + " duplicates token " + l + rt);
    }
  }
  for (std::size_t s = 0; s < kSpecialSlots; ++s) tokens.push_back(special_name(s));
  BpeModel model;
  model.merges = std::move(merges);
  model.vocab = Vocabulary::from_tokens(std::move(tokens));
  model.seed = seed;
  return model;
}

BpeModel bpe_train(const std::vector<NucleotideSequence>& corpus, std::size_t target_vocab,
                   std::uint64_t seed, const BpeTrainOptions& options) {
  if (target_vocab < 4 + kSpecialSlots) {
    throw Error(ErrorCode::InvalidArgument, "target_vocab must be at least " +
                                                std::to_string(4 + kSpecialSlots) +
                                                " (4 bases + reserved specials)");
  }
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no sequences");
  for (const auto& s : corpus) require_unambiguous(s.view());

  std::vector<std::size_t> chosen(corpus.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  if (options.max_sample_nt > 0) {
    Rng rng(seed);
    rng.shuffle(std::span(chosen));
    std::size_t total = 0, keep = 0;
    while (keep < chosen.size() && total < options.max_sample_nt) total += corpus[chosen[keep++]].size();
    chosen.resize(keep);
    std::sort(chosen.begin(), chosen.end());
  }

  // Identical sequences are counted once with a multiplicity.
  std::map<std::string, std::uint64_t> distinct;
  for (const std::size_t i : chosen) ++distinct[corpus[i].bases()];
  std::vector<std::vector<TokenId>> words;
  std::vector<std::uint64_t> weight;
  words.reserve(distinct.size());
  for (const auto& [bases, count] : distinct) {
    std::vector<TokenId> w(bases.size());
    std::transform(bases.begin(), bases.end(), w.begin(),
                   [](char c) { return static_cast<TokenId>(base_index(c)); });
    words.push_back(std::move(w));
    weight.push_back(count);
  }

  std::vector<std::string> strings = {"A", "C", "G", "T"};
  std::unordered_map<std::string, TokenId> known = {{"A", 0}, {"C", 1}, {"G", 2}, {"T", 3}};
  std::vector<std::pair<std::string, std::string>> merges;
  const std::size_t max_sequence_tokens = target_vocab - kSpecialSlots;

  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  while (strings.size() < max_sequence_tokens) {
    counts.clear();
    for (std::size_t w = 0; w < words.size(); ++w) {
      const auto& word = words[w];
      for (std::size_t i = 0; i + 1 < word.size(); ++i) counts[pair_key(word[i], word[i + 1])] += weight[w];
    }
    bool found = false;
    std::uint64_t best_key = 0, best_count = 0;
    std::string best_merged, best_left;
    for (const auto& [key, count] : counts) {
      if (count < 2) continue;
      const auto& left = strings[key >> 32];
      const auto& right = strings[key & 0xffffffffu];
      std::string merged = left + right;
      if (known.contains(merged)) continue;
      const bool better = !found || count > best_count ||
                          (count == best_count &&
                           std::tie(merged, left) < std::tie(best_merged, best_left));
      if (better) {
        found = true;
        best_key = key;
        best_count = count;
        best_merged = std::move(merged);
        best_left = left;
      }
    }
    if (!found) break;

    const TokenId left = static_cast<TokenId>(best_key >> 32);
    const TokenId right = static_cast<TokenId>(best_key & 0xffffffffu);
    const TokenId fresh = static_cast<TokenId>(strings.size());
    merges.emplace_back(strings[left], strings[right]);
    strings.push_back(best_merged);
    known.emplace(best_merged, fresh);

    for (auto& word : words) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < word.size();) {
        if (i + 1 < word.size() && word[i] == left && word[i + 1] == right) {
          word[out++] = fresh;
          i += 2;
        } else {
          word[out++] = word[i++];
        }
      }
      word.resize(out);
    }
  }
  return BpeModel::from_merges(std::move(merges), seed);
}

BpeTokenizer::BpeTokenizer(BpeModel model) : model_(std::move(model)) {
  const Vocabulary& v = model_.vocab;
  for (std::uint32_t r = 0; r < model_.merges.size(); ++r) {
    const auto& [l, rt] = model_.merges[r];
    ranks_.emplace(pair_key(v.id_of(l), v.id_of(rt)), std::pair{r, v.id_of(l + rt)});
  }
}

std::vector<TokenId> BpeTokenizer::encode(std::string_view bases) const {
  require_unambiguous(bases);
  const std::size_t n = bases.size();
  std::vector<TokenId> sym(n);
  std::vector<std::int64_t> prev(n), next(n);
  std::vector<char> alive(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    sym[i] = static_cast<TokenId>(base_index(bases[i]));
    prev[i] = static_cast<std::int64_t>(i) - 1;
    next[i] = i + 1 < n ? static_cast<std::int64_t>(i + 1) : -1;
  }

  // (rank, left position, left id, right id); lowest rank first, then leftmost.
  using Candidate = std::tuple<std::uint32_t, std::int64_t, TokenId, TokenId>;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  auto offer = [&](std::int64_t pos) {
    if (pos < 0) return;
    const std::int64_t q = next[static_cast<std::size_t>(pos)];
    if (q < 0) return;
    const TokenId a = sym[static_cast<std::size_t>(pos)], b = sym[static_cast<std::size_t>(q)];
    if (auto it = ranks_.find(pair_key(a, b)); it != ranks_.end()) heap.emplace(it->second.first, pos, a, b);
  };
  for (std::size_t i = 0; i + 1 < n; ++i) offer(static_cast<std::int64_t>(i));

  while (!heap.empty()) {
    const auto [rank, pos, a, b] = heap.top();
    heap.pop();
    const std::size_t p = static_cast<std::size_t>(pos);
    if (!alive[p] || sym[p] != a) continue;
    const std::int64_t q = next[p];
    if (q < 0 || sym[static_cast<std::size_t>(q)] != b) continue;
    sym[p] = ranks_.at(pair_key(a, b)).second;
    alive[static_cast<std::size_t>(q)] = 0;
    next[p] = next[static_cast<std::size_t>(q)];
    if (next[p] >= 0) prev[static_cast<std::size_t>(next[p])] = pos;
    offer(prev[p]);
    offer(pos);
  }

  std::vector<TokenId> ids;
  for (std::int64_t i = n ? 0 : -1; i >= 0; i = next[static_cast<std::size_t>(i)]) {
    ids.push_back(sym[static_cast<std::size_t>(i)]);
  }
  return ids;
}

std::string BpeTokenizer::decode(std::span<const TokenId> ids) const {
  const Vocabulary& v = model_.vocab;
  std::string out;
  for (const TokenId id : ids) {
    if (id >= v.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(id));
    if (v.is_special(id)) throw Error(ErrorCode::SpecialTokenInStream, std::to_string(id) + " " + v.token(id));
    out += v.token(id);
  }
  return out;
}

char token_char(const Vocabulary& vocab, TokenId id, std::size_t j) { return vocab.token_char(id, j); }

// ---------------------------------------------------------------- persistence

std::string tokenizer_json(const Tokenizer& tokenizer) {
  nlohmann::json j = tokenizer.vocabulary().to_json();
  j["format"] = "genolm-tokenizer";
  j["version"] = 1;
  if (const auto* km = dynamic_cast<const KmerTokenizer*>(&tokenizer)) {
    j["type"] = "kmer";
    j["k"] = km->k();
  } else if (const auto* bpe = dynamic_cast<const BpeTokenizer*>(&tokenizer)) {
    j["type"] = "bpe";
    j["seed"] = bpe->model().seed;
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : bpe->model().merges) merges.push_back({l, r});
    j["merges"] = std::move(merges);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unsupported tokenizer type");
  }
  return j.dump();
}

std::unique_ptr<Tokenizer> tokenizer_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("tokenizer JSON: ") + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    std::unique_ptr<Tokenizer> tok;
    if (type == "kmer") {
      tok = std::make_unique<KmerTokenizer>(j.at("k").get<int>());
    } else if (type == "bpe") {
      std::vector<std::pair<std::string, std::string>> merges;
      for (const auto& m : j.at("merges")) merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
      tok = std::make_unique<BpeTokenizer>(BpeModel::from_merges(std::move(merges), j.value("seed", std::uint64_t{0})));
    } else {
      throw Error(ErrorCode::Format, "unknown tokenizer type '" + type + "'");
    }
    if (j.contains("tokens") && j.at("tokens").get<std::vector<std::string>>() != tok->vocabulary().tokens()) {
      throw Error(ErrorCode::Format, "stored token list disagrees with the tokenizer definition");
    }
    return tok;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("tokenizer JSON: ") + e.what());
  }
}

void save_tokenizer(const Tokenizer& tokenizer, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << tokenizer_json(tokenizer) << '\n';
}

std::unique_ptr<Tokenizer> load_tokenizer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return tokenizer_from_json(ss.str());
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& spec) {
  if (spec.rfind("kmer:", 0) == 0) {
    try {
      return std::make_unique<KmerTokenizer>(std::stoi(spec.substr(5)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "bad tokenizer spec '" + spec + "'");
    }
  }
  return load_tokenizer(spec);
}

}  // namespace genolm
