#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "genolm/vocabulary.hpp"

namespace genolm {

/// Probability vector over a vocabulary: non-negative, sums to 1 (1e-9).
class TokenDistribution {
 public:
  TokenDistribution() = default;

  /// Takes ownership after checking the invariants; throws InvalidArgument.
  static TokenDistribution from_probs(std::vector<double> probs);
  static TokenDistribution uniform(std::size_t size);

  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

inline constexpr double kDistributionTolerance = 1e-9;

/// Anything that predicts the next token from a left context. Implementations
/// must be pure in the context and safe to call from several threads.
class CausalLm {
 public:
  virtual ~CausalLm() = default;
  virtual TokenDistribution next_distribution(std::span<const TokenId> context) const = 0;
  virtual const Vocabulary& vocabulary() const noexcept = 0;
  /// Fixed-length summary of a context, when the model offers one.
  virtual std::optional<std::vector<double>> embed(std::span<const TokenId>) const { return std::nullopt; }
};

/// Uniform next-token distribution over the whole vocabulary; the random
/// guessing baseline.
class UniformLm final : public CausalLm {
 public:
  explicit UniformLm(Vocabulary vocab) : vocab_(std::move(vocab)) {}
  TokenDistribution next_distribution(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const noexcept override { return vocab_; }

 private:
  Vocabulary vocab_;
};

/// Base-e log probability of `ids` under the model, starting from an empty
/// context. Throws InvalidArgument for an empty list.
double sequence_logprob(const CausalLm& model, std::span<const TokenId> ids);

struct MarkovConfig {
  int order = 2;
  /// Add-alpha constant per order; a single value is used for every order.
  std::vector<double> alpha = {1.0};
  /// Interpolation weights for orders 0..order; empty means uniform.
  std::vector<double> lambda;
};

/// Interpolated add-alpha n-gram model.
///
/// For order m with history h, p_m(t) = (c(h,t) + a_m) / (c(h) + a_m |V|).
/// The prediction is sum_m w_m p_m(t), where w starts as lambda and the
/// weight of every order whose history is unseen (or longer than the
/// context) is handed down to the next lower order. Order 0 is always
/// available, so every token keeps positive mass.
class MarkovLm final : public CausalLm {
 public:
  static MarkovLm train(const Vocabulary& vocab, const std::vector<std::vector<TokenId>>& corpus,
                        const MarkovConfig& config);
  /// Model with no counts; predicts uniformly.
  static MarkovLm untrained(const Vocabulary& vocab, const MarkovConfig& config);

  TokenDistribution next_distribution(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  /// The next-token distribution, as a context summary.
  std::optional<std::vector<double>> embed(std::span<const TokenId> context) const override;

  int order() const noexcept { return order_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  const std::vector<double>& lambda() const noexcept { return lambda_; }
  std::uint64_t history_count(std::span<const TokenId> history) const;
  std::uint64_t transition_count(std::span<const TokenId> history, TokenId next) const;

  /// Versioned binary: "GMLM", u32 version, u64 header size, JSON header,
  /// then per-order count tables sorted by history. Little-endian.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static MarkovLm load(std::istream& in);
  static MarkovLm load(const std::string& path);

 private:
  struct HistoryCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };
  using Table = std::unordered_map<std::string, HistoryCounts>;

  MarkovLm(Vocabulary vocab, const MarkovConfig& config);
  const HistoryCounts* lookup(std::span<const TokenId> history) const;

  Vocabulary vocab_;
  int order_ = 0;
  std::vector<double> alpha_;
  std::vector<double> lambda_;
  std::vector<Table> tables_;
};

/// Serves the bridge protocol for `model`: one JSON request per input line,
/// one JSON reply per output line, until end of input.
void serve_bridge(const CausalLm& model, std::istream& in, std::ostream& out);

}  // namespace genolm
