#include "genolm/recover.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/rng.hpp"

namespace genolm {

double recovery_accuracy(std::string_view reference, std::string_view generated, std::size_t length) {
  if (length == 0) throw Error(ErrorCode::InvalidArgument, "length must be positive");
  if (reference.size() < length) {
    throw Error(ErrorCode::ReferenceTooShort, "reference has " + std::to_string(reference.size()) +
                                                  " nt, need " + std::to_string(length));
  }
  std::size_t hits = 0;
  const std::size_t upto = std::min(length, generated.size());
  for (std::size_t p = 0; p < upto; ++p) hits += generated[p] == reference[p];
  return static_cast<double>(hits) / static_cast<double>(length);
}

std::vector<RecoveryItem> build_recovery_dataset(const std::vector<FunctionalRegion>& regions,
                                                 const std::vector<NucleotideSequence>& genome,
                                                 const RecoveryDatasetConfig& config) {
  if (config.predict_len == 0) throw Error(ErrorCode::InvalidArgument, "predict_len must be positive");
  if (config.per_group_n == 0) return {};
  std::unordered_map<std::string, const NucleotideSequence*> by_id;
  for (const auto& s : genome) by_id.emplace(s.id(), &s);

  struct Locus {
    const FunctionalRegion* region;
    const NucleotideSequence* contig;
  };
  std::map<std::string, std::vector<Locus>> eligible;
  for (const auto& r : regions) {
    auto it = by_id.find(r.source.seq_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownSequenceId, "'" + r.source.seq_id + "'");
    const std::size_t gene_len = r.source.end - r.source.start + 1;
    if (gene_len < config.predict_len) continue;
    const std::size_t contig_len = it->second->size();
    // Room for the prompt on the region's upstream side.
    const std::size_t upstream = r.source.strand == Strand::Plus ? r.source.start - 1 : contig_len - r.source.end;
    if (config.anchor == RecoveryAnchor::GeneStart && upstream < config.prompt_len) continue;
    if (config.anchor == RecoveryAnchor::Random && upstream + gene_len - config.predict_len < config.prompt_len) continue;
    const std::string group = r.source.taxon_group ? std::string(to_string(*r.source.taxon_group)) : "unknown";
    eligible[group].push_back({&r, it->second});
  }

  std::vector<RecoveryItem> items;
  std::uint64_t job = 0;
  for (auto& [group, loci] : eligible) {
    Rng rng = Rng::for_job(config.seed, job++);
    std::vector<std::size_t> order(loci.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    std::size_t taken = 0;
    for (const std::size_t idx : order) {
      if (taken == config.per_group_n) break;
      const auto& [region, contig] = loci[idx];
      const auto& src = region->source;
      const std::size_t gene_len = src.end - src.start + 1;
      // Offset of the continuation inside the gene, in transcript orientation.
      std::size_t shift = 0;
      if (config.anchor == RecoveryAnchor::Random) {
        const std::size_t upstream = src.strand == Strand::Plus ? src.start - 1 : contig->size() - src.end;
        const std::size_t min_shift = upstream >= config.prompt_len ? 0 : config.prompt_len - upstream;
        const std::size_t max_shift = gene_len - config.predict_len;
        shift = min_shift + rng.below(max_shift - min_shift + 1);
      }
      std::string prompt, reference;
      const std::string_view g = contig->view();
      if (src.strand == Strand::Plus) {
        const std::size_t cont = src.start - 1 + shift;  // 0-based continuation start
        prompt = std::string(g.substr(cont - config.prompt_len, config.prompt_len));
        reference = std::string(g.substr(cont, config.predict_len));
      } else {
        const std::size_t cont_end = src.end - shift;  // 0-based exclusive end of the continuation
        prompt = reverse_complement(g.substr(cont_end, config.prompt_len));
        reference = reverse_complement(g.substr(cont_end - config.predict_len, config.predict_len));
      }
      if (prompt.find('N') != std::string::npos || reference.find('N') != std::string::npos) continue;
      items.push_back({NucleotideSequence::trusted(std::move(prompt), region->sequence.id()),
                       NucleotideSequence::trusted(std::move(reference), region->sequence.id()), group});
      ++taken;
    }
    if (taken < config.per_group_n) {
      throw Error(ErrorCode::InsufficientData, group + " needed " + std::to_string(config.per_group_n) +
                                                   " available " + std::to_string(taken));
    }
  }
  return items;
}

namespace {

using Continuation = std::function<std::vector<TokenId>(const std::vector<TokenId>& prompt, std::size_t tokens,
                                                        std::uint64_t job)>;

RecoveryReport run_with(const Vocabulary& model_vocab, const Tokenizer& tokenizer,
                        const std::vector<RecoveryItem>& items, const RecoveryRunConfig& config,
                        const Continuation& continue_prompt) {
  require_same_vocabulary(model_vocab, tokenizer.vocabulary());
  if (config.predict_lens.empty()) throw Error(ErrorCode::InvalidArgument, "no prediction lengths");
  const std::size_t max_len = *std::max_element(config.predict_lens.begin(), config.predict_lens.end());
  if (max_len == 0) throw Error(ErrorCode::InvalidArgument, "prediction length must be positive");
  const std::size_t k = tokenizer.fixed_token_length();
  const std::size_t new_tokens = k ? (max_len + k - 1) / k : max_len;

  RecoveryReport report;
  report.item_accuracy.assign(items.size(), std::vector<double>(config.predict_lens.size(), 0.0));
  parallel_for(items.size(), config.threads, [&](std::size_t i) {
    const RecoveryItem& item = items[i];
    std::string_view prompt = item.prompt.view();
    if (k) prompt.remove_prefix(prompt.size() % k);
    const std::vector<TokenId> ids = tokenizer.encode(prompt);
    const std::string generated = tokenizer.decode(continue_prompt(ids, new_tokens, i));
    for (std::size_t l = 0; l < config.predict_lens.size(); ++l) {
      report.item_accuracy[i][l] = recovery_accuracy(item.reference.view(), generated, config.predict_lens[l]);
    }
  });

  struct Acc {
    std::size_t n = 0;
    double sum = 0.0, sum_sq = 0.0;
  };
  std::map<std::tuple<std::string, std::size_t, std::size_t>, Acc> acc;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t l = 0; l < config.predict_lens.size(); ++l) {
      auto& a = acc[{items[i].taxon_group, items[i].prompt.size(), config.predict_lens[l]}];
      const double x = report.item_accuracy[i][l];
      ++a.n;
      a.sum += x;
      a.sum_sq += x * x;
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> group_means;
  for (const auto& [key, a] : acc) {
    RecoveryCell c;
    std::tie(c.group, c.prompt_len, c.predict_len) = key;
    c.n = a.n;
    c.mean = a.sum / static_cast<double>(a.n);
    if (a.n > 1) {
      const double var = std::max(0.0, (a.sum_sq - a.sum * c.mean) / static_cast<double>(a.n - 1));
      c.std_error = std::sqrt(var / static_cast<double>(a.n));
    }
    auto& gm = group_means[{c.prompt_len, c.predict_len}];
    gm.first += c.mean;
    ++gm.second;
    report.cells.push_back(std::move(c));
  }
  for (const auto& [key, gm] : group_means) report.overall[key] = gm.first / static_cast<double>(gm.second);
  return report;
}

}  // namespace

RecoveryReport run_recovery(const CausalLm& lm, const Tokenizer& tokenizer, const std::vector<RecoveryItem>& items,
                            const RecoveryRunConfig& config) {
  return run_with(lm.vocabulary(), tokenizer, items, config,
                  [&](const std::vector<TokenId>& prompt, std::size_t tokens, std::uint64_t job) {
                    SamplerConfig c = config.sampler;
                    c.max_new_tokens = tokens;
                    return generate(lm, prompt, c, job);
                  });
}

RecoveryReport run_recovery(const MaskedLm& mlm, const Tokenizer& tokenizer, const std::vector<RecoveryItem>& items,
                            const RecoveryRunConfig& config) {
  return run_with(mlm.vocabulary(), tokenizer, items, config,
                  [&](const std::vector<TokenId>& prompt, std::size_t tokens, std::uint64_t job) {
                    return mlm_sequential_decode(mlm, prompt, tokens, config.sampler, job);
                  });
}

void write_recovery_dataset(std::ostream& out, const std::vector<RecoveryItem>& items) {
  out << "#prompt\treference\ttaxon\n";
  for (const auto& it : items) out << it.prompt.bases() << '\t' << it.reference.bases() << '\t' << it.taxon_group << '\n';
}

std::vector<RecoveryItem> read_recovery_dataset(std::istream& in) {
  std::vector<RecoveryItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    if (cols.size() != 3) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": expected prompt, reference, taxon");
    try {
      items.push_back({NucleotideSequence::validate(cols[0]), NucleotideSequence::validate(cols[1]), cols[2]});
    } catch (const Error& e) {
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_recovery_report_tsv(std::ostream& out, const RecoveryReport& report) {
  out << "#group\tprompt_len\tpredict_len\tn\tmean_accuracy\tstd_error\n";
  for (const auto& c : report.cells) {
    out << c.group << '\t' << c.prompt_len << '\t' << c.predict_len << '\t' << c.n << '\t' << fixed(c.mean) << '\t'
        << fixed(c.std_error) << '\n';
  }
  for (const auto& [key, mean] : report.overall) {
    out << "overall\t" << key.first << '\t' << key.second << "\t-\t" << fixed(mean) << "\t-\n";
  }
}

std::string recovery_report_json(const RecoveryReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"group", c.group},
                     {"prompt_len", c.prompt_len},
                     {"predict_len", c.predict_len},
                     {"n", c.n},
                     {"mean_accuracy", c.mean},
                     {"std_error", c.std_error}});
  }
  nlohmann::json overall = nlohmann::json::array();
  for (const auto& [key, mean] : report.overall) {
    overall.push_back({{"prompt_len", key.first}, {"predict_len", key.second}, {"mean_accuracy", mean}});
  }
  return nlohmann::json{{"cells", cells}, {"overall", overall}}.dump(2);
}

}  // namespace genolm
