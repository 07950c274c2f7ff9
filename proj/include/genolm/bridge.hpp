#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "genolm/lm.hpp"

namespace genolm {

struct BridgeOptions {
  std::chrono::milliseconds timeout{30000};
  /// Accepted deviation of a reply's total mass from 1 before it is
  /// rejected; accepted replies are renormalized exactly.
  double mass_tolerance = 1e-6;
};

/// CausalLm backed by an external peer speaking JSON lines:
///   {"op":"vocab"}             -> {"tokens":[...]}
///   {"op":"next","context":[]} -> {"probs":[...]} | {"top":[[id,logprob],...],"rest_mass":r}
///   {"op":"embed","context":[]}-> {"vec":[...]}
/// Calls are serialized over one connection. A timeout or malformed reply
/// raises an error and poisons the connection; nothing is fabricated.
class BridgeModel final : public CausalLm {
 public:
  /// `endpoint` is "tcp:HOST:PORT", "exec:COMMAND", or a bare command line
  /// (run through /bin/sh with the protocol on its stdin/stdout).
  static std::unique_ptr<BridgeModel> connect(const std::string& endpoint, BridgeOptions options = {});

  ~BridgeModel() override;
  BridgeModel(const BridgeModel&) = delete;
  BridgeModel& operator=(const BridgeModel&) = delete;

  TokenDistribution next_distribution(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  std::optional<std::vector<double>> embed(std::span<const TokenId> context) const override;

 private:
  BridgeModel(int read_fd, int write_fd, int pid, BridgeOptions options);
  nlohmann::json roundtrip(const nlohmann::json& request) const;

  int read_fd_;
  int write_fd_;
  int pid_;
  BridgeOptions options_;
  Vocabulary vocab_;
  mutable std::mutex mutex_;
  mutable std::string buffer_;
  mutable bool broken_ = false;
};

std::unique_ptr<CausalLm> bridge_model(const std::string& endpoint, BridgeOptions options = {});

/// Validates a "next" reply against a vocabulary size and converts it into
/// a distribution. Throws ProtocolViolation.
TokenDistribution parse_next_reply(const nlohmann::json& reply, std::size_t vocab_size,
                                   double mass_tolerance = 1e-6);

}  // namespace genolm
