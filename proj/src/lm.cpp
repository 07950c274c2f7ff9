#include "genolm/lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genolm/error.hpp"

namespace genolm {

namespace {

std::string history_key(std::span<const TokenId> history) {
  std::string key(history.size() * sizeof(TokenId), '\0');
  for (std::size_t i = 0; i < history.size(); ++i) {
    const TokenId v = history[i];
    for (std::size_t b = 0; b < sizeof(TokenId); ++b) key[i * sizeof(TokenId) + b] = static_cast<char>((v >> (8 * b)) & 0xff);
  }
  return key;
}

TokenId key_token(const std::string& key, std::size_t i) {
  TokenId v = 0;
  for (std::size_t b = 0; b < sizeof(TokenId); ++b) {
    v |= static_cast<TokenId>(static_cast<unsigned char>(key[i * sizeof(TokenId) + b])) << (8 * b);
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(ErrorCode::Format, "truncated model file");
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return static_cast<T>(v);
}

constexpr char kMagic[4] = {'G', 'M', 'L', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

TokenDistribution TokenDistribution::from_probs(std::vector<double> probs) {
  if (probs.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  double sum = 0.0;
  for (const double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::InvalidArgument, "negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw Error(ErrorCode::InvalidArgument, "probabilities sum to " + std::to_string(sum));
  }
  TokenDistribution d;
  d.probs_ = std::move(probs);
  return d;
}

TokenDistribution TokenDistribution::uniform(std::size_t size) {
  if (size == 0) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  TokenDistribution d;
  d.probs_.assign(size, 1.0 / static_cast<double>(size));
  return d;
}

TokenDistribution UniformLm::next_distribution(std::span<const TokenId> context) const {
  for (const TokenId t : context) {
    if (t >= vocab_.size()) throw Error(ErrorCode::UnknownTokenId, std::to_string(t));
  }
  return TokenDistribution::uniform(vocab_.size());
}

double sequence_logprob(const CausalLm& model, std::span<const TokenId> ids) {
  if (ids.empty()) throw Error(ErrorCode::InvalidArgument, "sequence_logprob needs at least one token");
  const std::size_t v = model.vocabulary().size();
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= v) throw Error(ErrorCode::UnknownTokenId, std::to_string(ids[i]));
    const TokenDistribution d = model.next_distribution(ids.first(i));
    total += std::log(d[ids[i]]);
  }
  return total;
}

// ---------------------------------------------------------------- MarkovLm

MarkovLm::MarkovLm(Vocabulary vocab, const MarkovConfig& config) : vocab_(std::move(vocab)) {
  if (config.order < 0) throw Error(ErrorCode::BadSmoothing, "order must be >= 0");
  order_ = config.order;
  const std::size_t orders = static_cast<std::size_t>(order_) + 1;
  if (config.alpha.size() == 1) {
    alpha_.assign(orders, config.alpha.front());
  } else if (config.alpha.size() == orders) {
    alpha_ = config.alpha;
  } else {
    throw Error(ErrorCode::BadSmoothing, "alpha needs 1 or order+1 values");
  }
  for (const double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::BadSmoothing, "alpha must be positive");
  }
  if (config.lambda.empty()) {
    lambda_.assign(orders, 1.0 / static_cast<double>(orders));
  } else {
    if (config.lambda.size() != orders) throw Error(ErrorCode::BadSmoothing, "lambda needs order+1 values");
    double sum = 0.0;
    for (const double l : config.lambda) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorCode::BadSmoothing, "lambda must be non-negative");
      sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::BadSmoothing, "lambda must sum to 1");
    lambda_ = config.lambda;
  }
  tables_.resize(orders);
}

MarkovLm MarkovLm::untrained(const Vocabulary& vocab, const MarkovConfig& config) {
  return MarkovLm(vocab, config);
}

MarkovLm MarkovLm::train(const Vocabulary& vocab, const std::vector<std::vector<TokenId>>& corpus,
                         const MarkovConfig& config) {
  MarkovLm model(vocab, config);
  std::size_t tokens = 0;
  for (const auto& seq : corpus) tokens += seq.size();
  if (tokens == 0) throw Error(ErrorCode::EmptyCorpus, "no tokens to count");
  const std::size_t v = vocab.size();
  for (const auto& seq : corpus) {
    for (const TokenId t : seq) {
      if (t >= v) throw Error(ErrorCode::UnknownTokenId, std::to_string(t));
    }
    const std::span<const TokenId> s(seq);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t m = 0; m <= static_cast<std::size_t>(model.order_) && m <= i; ++m) {
        auto& hc = model.tables_[m][history_key(s.subspan(i - m, m))];
        ++hc.total;
        ++hc.next[s[i]];
      }
    }
  }
  return model;
}

const MarkovLm::HistoryCounts* MarkovLm::lookup(std::span<const TokenId> history) const {
  const auto& table = tables_[history.size()];
  auto it = table.find(history_key(history));
  if (it == table.end() || it->second.total == 0) return nullptr;
  return &it->second;
}

std::uint64_t MarkovLm::history_count(std::span<const TokenId> history) const {
  if (history.size() > static_cast<std::size_t>(order_)) return 0;
  const auto* hc = lookup(history);
  return hc ? hc->total : 0;
}

std::uint64_t MarkovLm::transition_count(std::span<const TokenId> history, TokenId next) const {
  if (history.size() > static_cast<std::size_t>(order_)) return 0;
  const auto* hc = lookup(history);
  if (!hc) return 0;
  auto it = hc->next.find(next);
  return it == hc->next.end() ? 0 : it->second;
}

TokenDistribution MarkovLm::next_distribution(std::span<const TokenId> context) const {
  const std::size_t v = vocab_.size();
  for (const TokenId t : context) {
    if (t >= v) throw Error(ErrorCode::UnknownTokenId, std::to_string(t));
  }
  std::vector<double> weight = lambda_;
  std::vector<const HistoryCounts*> found(weight.size(), nullptr);
  for (std::size_t m = weight.size(); m-- > 0;) {
    if (m <= context.size()) found[m] = lookup(context.last(m));
    if (m > 0 && !found[m]) {
      weight[m - 1] += weight[m];
      weight[m] = 0.0;
    }
  }

  std::vector<double> probs(v, 0.0);
  double base = 0.0;
  for (std::size_t m = 0; m < weight.size(); ++m) {
    if (weight[m] == 0.0) continue;
    const double total = found[m] ? static_cast<double>(found[m]->total) : 0.0;
    const double denom = total + alpha_[m] * static_cast<double>(v);
    base += weight[m] * alpha_[m] / denom;
    if (found[m]) {
      for (const auto& [t, c] : found[m]->next) probs[t] += weight[m] * static_cast<double>(c) / denom;
    }
  }
  double sum = 0.0;
  for (auto& p : probs) {
    p += base;
    sum += p;
  }
  for (auto& p : probs) p /= sum;
  return TokenDistribution::from_probs(std::move(probs));
}

std::optional<std::vector<double>> MarkovLm::embed(std::span<const TokenId> context) const {
  return next_distribution(context).probs();
}

void MarkovLm::save(std::ostream& out) const {
  nlohmann::json header = {{"format", "genolm-markov"},
                           {"version", kFormatVersion},
                           {"order", order_},
                           {"alpha", alpha_},
                           {"lambda", lambda_},
                           {"vocab_hash", hex64(vocab_.hash())},
                           {"tokens", vocab_.tokens()}};
  const std::string text = header.dump();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t m = 0; m < tables_.size(); ++m) {
    std::vector<const std::pair<const std::string, HistoryCounts>*> rows;
    rows.reserve(tables_[m].size());
    for (const auto& row : tables_[m]) rows.push_back(&row);
    std::sort(rows.begin(), rows.end(), [m](auto* a, auto* b) {
      for (std::size_t i = 0; i < m; ++i) {
        const TokenId x = key_token(a->first, i), y = key_token(b->first, i);
        if (x != y) return x < y;
      }
      return false;
    });
    put<std::uint64_t>(out, rows.size());
    for (const auto* row : rows) {
      for (std::size_t i = 0; i < m; ++i) put<std::uint32_t>(out, key_token(row->first, i));
      put<std::uint64_t>(out, row->second.total);
      std::vector<std::pair<TokenId, std::uint64_t>> next(row->second.next.begin(), row->second.next.end());
      std::sort(next.begin(), next.end());
      put<std::uint32_t>(out, static_cast<std::uint32_t>(next.size()));
      for (const auto& [t, c] : next) {
        put<std::uint32_t>(out, t);
        put<std::uint64_t>(out, c);
      }
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed");
}

void MarkovLm::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  save(out);
}

MarkovLm MarkovLm::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::Format, "not a genolm Markov model");
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) throw Error(ErrorCode::Format, "unsupported model version " + std::to_string(version));
  const auto header_size = get<std::uint64_t>(in);
  if (header_size > (std::uint64_t{1} << 32)) throw Error(ErrorCode::Format, "implausible header size");
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) throw Error(ErrorCode::Format, "truncated header");

  nlohmann::json header;
  MarkovConfig config;
  Vocabulary vocab;
  try {
    header = nlohmann::json::parse(text);
    config.order = header.at("order").get<int>();
    config.alpha = header.at("alpha").get<std::vector<double>>();
    config.lambda = header.at("lambda").get<std::vector<double>>();
    vocab = Vocabulary::from_tokens(header.at("tokens").get<std::vector<std::string>>());
    if (header.at("vocab_hash").get<std::string>() != hex64(vocab.hash())) {
      throw Error(ErrorCode::Format, "vocabulary hash mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("model header: ") + e.what());
  }
  MarkovLm model(std::move(vocab), config);
  const std::size_t v = model.vocab_.size();
  std::vector<TokenId> history;
  for (std::size_t m = 0; m < model.tables_.size(); ++m) {
    const auto rows = get<std::uint64_t>(in);
    for (std::uint64_t r = 0; r < rows; ++r) {
      history.assign(m, 0);
      for (std::size_t i = 0; i < m; ++i) history[i] = get<std::uint32_t>(in);
      HistoryCounts hc;
      hc.total = get<std::uint64_t>(in);
      const auto n = get<std::uint32_t>(in);
      std::uint64_t sum = 0;
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto t = get<std::uint32_t>(in);
        const auto c = get<std::uint64_t>(in);
        if (t >= v) throw Error(ErrorCode::Format, "token id out of range in count table");
        hc.next[t] = c;
        sum += c;
      }
      if (sum != hc.total) throw Error(ErrorCode::Format, "count table totals disagree");
      model.tables_[m].emplace(history_key(history), std::move(hc));
    }
  }
  return model;
}

MarkovLm MarkovLm::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return load(in);
}

// ---------------------------------------------------------------- bridge server

void serve_bridge(const CausalLm& model, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json reply;
    try {
      const auto req = nlohmann::json::parse(line);
      const std::string op = req.at("op").get<std::string>();
      if (op == "vocab") {
        reply = {{"tokens", model.vocabulary().tokens()}};
      } else if (op == "next") {
        const auto ctx = req.at("context").get<std::vector<TokenId>>();
        reply = {{"probs", model.next_distribution(ctx).probs()}};
      } else if (op == "embed") {
        const auto ctx = req.at("context").get<std::vector<TokenId>>();
        auto vec = model.embed(ctx);
        if (vec) reply = {{"vec", *vec}};
        else reply = {{"error", "embed not supported"}};
      } else {
        reply = {{"error", "unknown op '" + op + "'"}};
      }
    } catch (const std::exception& e) {
      reply = {{"error", e.what()}};
    }
    out << reply.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    out.flush();
  }
}

}  // namespace genolm
