#include "genolm/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genolm/error.hpp"
#include "genolm/parallel.hpp"

namespace genolm {

void SamplerConfig::validate() const {
  if (mode == DecodeMode::Greedy) return;
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  }
  if (!(top_p > 0.0) || top_p > 1.0) throw Error(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
}

void require_same_vocabulary(const Vocabulary& model, const Vocabulary& tokenizer) {
  if (model.hash() != tokenizer.hash() || !(model == tokenizer)) {
    throw Error(ErrorCode::VocabularyMismatch, "model vocabulary (" + std::to_string(model.size()) +
                                                   " tokens) differs from tokenizer vocabulary (" +
                                                   std::to_string(tokenizer.size()) + " tokens)");
  }
}

std::vector<double> candidate_distribution(const TokenDistribution& dist, const Vocabulary& vocab,
                                           const SamplerConfig& config) {
  if (dist.size() != vocab.size()) throw Error(ErrorCode::VocabularyMismatch, "distribution size differs from vocabulary");
  config.validate();
  const std::size_t v = dist.size();
  std::vector<double> p(dist.probs());
  for (std::size_t i = vocab.sequence_token_count(); i < v; ++i) {
    if (i != vocab.eos()) p[i] = 0.0;
  }
  const auto best = std::max_element(p.begin(), p.end());  // first maximum = lowest id
  if (*best <= 0.0) throw Error(ErrorCode::InvalidArgument, "model assigns no mass to any allowed token");

  if (config.mode == DecodeMode::Greedy) {
    std::vector<double> point(v, 0.0);
    point[static_cast<std::size_t>(best - p.begin())] = 1.0;
    return point;
  }

  const double log_max = std::log(*best);
  double total = 0.0;
  for (auto& x : p) {
    x = x > 0.0 ? std::exp((std::log(x) - log_max) / config.temperature) : 0.0;
    total += x;
  }
  for (auto& x : p) x /= total;

  if (config.top_p < 1.0) {
    std::vector<TokenId> order(v);
    std::iota(order.begin(), order.end(), TokenId{0});
    std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) { return p[a] > p[b]; });
    double cumulative = 0.0;
    std::size_t keep = 0;
    while (keep < v && p[order[keep]] > 0.0) {
      cumulative += p[order[keep++]];
      if (cumulative >= config.top_p - 1e-12) break;
    }
    std::vector<double> kept(v, 0.0);
    double kept_mass = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
      kept[order[i]] = p[order[i]];
      kept_mass += p[order[i]];
    }
    for (auto& x : kept) x /= kept_mass;
    p = std::move(kept);
  }
  return p;
}

TokenId select_token(const TokenDistribution& dist, const Vocabulary& vocab, const SamplerConfig& config,
                     Rng& rng) {
  const std::vector<double> p = candidate_distribution(dist, vocab, config);
  if (config.mode == DecodeMode::Greedy) {
    return static_cast<TokenId>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  TokenId last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    cumulative += p[i];
    last = static_cast<TokenId>(i);
    if (u < cumulative) return last;
  }
  return last;  // u within rounding of 1
}

std::vector<TokenId> generate(const CausalLm& lm, std::span<const TokenId> prompt, const SamplerConfig& config,
                              std::uint64_t job) {
  config.validate();
  if (prompt.size() > config.max_context) {
    throw Error(ErrorCode::ContextOverflow, "prompt of " + std::to_string(prompt.size()) +
                                                " tokens exceeds context budget " + std::to_string(config.max_context));
  }
  const Vocabulary& vocab = lm.vocabulary();
  Rng rng = Rng::for_job(config.seed, job);
  std::vector<TokenId> context(prompt.begin(), prompt.end());
  std::vector<TokenId> produced;
  produced.reserve(config.max_new_tokens);
  for (std::size_t step = 0; step < config.max_new_tokens; ++step) {
    const std::size_t start = context.size() > config.max_context ? context.size() - config.max_context : 0;
    const TokenDistribution d = lm.next_distribution(std::span(context).subspan(start));
    const TokenId t = select_token(d, vocab, config, rng);
    if (t == vocab.eos()) break;
    produced.push_back(t);
    context.push_back(t);
  }
  return produced;
}

TokenDistribution CausalAsMaskedLm::distribution_at_mask(std::span<const TokenId> ids) const {
  const TokenId mask = lm_.vocabulary().mask();
  const auto it = std::find(ids.begin(), ids.end(), mask);
  if (it == ids.end()) throw Error(ErrorCode::InvalidArgument, "no MASK token in input");
  if (std::find(it + 1, ids.end(), mask) != ids.end()) throw Error(ErrorCode::InvalidArgument, "more than one MASK token");
  return lm_.next_distribution(ids.first(static_cast<std::size_t>(it - ids.begin())));
}

std::vector<TokenId> mlm_sequential_decode(const MaskedLm& mlm, std::span<const TokenId> prompt,
                                           std::size_t n_steps, const SamplerConfig& config, std::uint64_t job) {
  if (n_steps == 0) throw Error(ErrorCode::InvalidArgument, "n_steps must be at least 1");
  config.validate();
  if (prompt.size() + 1 > config.max_context) {
    throw Error(ErrorCode::ContextOverflow, "prompt exceeds context budget");
  }
  const Vocabulary& vocab = mlm.vocabulary();
  Rng rng = Rng::for_job(config.seed, job);
  std::vector<TokenId> ids(prompt.begin(), prompt.end());
  std::vector<TokenId> produced;
  for (std::size_t step = 0; step < n_steps; ++step) {
    ids.push_back(vocab.mask());
    const std::size_t start = ids.size() > config.max_context ? ids.size() - config.max_context : 0;
    const TokenDistribution d = mlm.distribution_at_mask(std::span(ids).subspan(start));
    const TokenId t = select_token(d, vocab, config, rng);
    if (t == vocab.eos()) break;
    ids.back() = t;
    produced.push_back(t);
  }
  return produced;
}

ConditionedResult conditioned_generate(const CausalLm& lm, const Tokenizer& tokenizer,
                                       const ConditionedRequest& request, const SamplerConfig& config) {
  const Vocabulary& vocab = lm.vocabulary();
  require_same_vocabulary(vocab, tokenizer.vocabulary());
  const TokenId prefix = vocab.prefix_token(request.prefix);
  std::vector<TokenId> prompt = {vocab.bos(), prefix};
  if (!request.seed_context.empty()) {
    const auto seed_ids = tokenizer.encode(NucleotideSequence::validate(request.seed_context).view());
    prompt.insert(prompt.end(), seed_ids.begin(), seed_ids.end());
  }

  std::vector<std::string> outputs(request.count);
  parallel_for(request.count, request.threads, [&](std::size_t job) {
    outputs[job] = tokenizer.decode(generate(lm, prompt, config, job));
  });

  ConditionedResult result;
  std::set<std::string> seen;
  for (std::size_t job = 0; job < outputs.size(); ++job) {
    const bool dedup = request.dedup_against != nullptr;
    if (dedup && (request.dedup_against->contains(outputs[job]) || !seen.insert(outputs[job]).second)) {
      ++result.duplicates_removed;
      continue;
    }
    result.sequences.push_back(NucleotideSequence::trusted(outputs[job], "gen" + std::to_string(job))
                                   .with_meta("prefix", request.prefix));
  }
  result.exhausted = result.sequences.size() < request.count;
  return result;
}

}  // namespace genolm
