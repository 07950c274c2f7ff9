#include "genolm/vep.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genolm/analytics.hpp"
#include "genolm/error.hpp"
#include "genolm/parallel.hpp"

namespace genolm {

Genome make_genome(std::vector<NucleotideSequence> records) {
  Genome g;
  for (auto& r : records) {
    std::string id = r.id();
    if (!g.emplace(id, std::move(r)).second) throw Error(ErrorCode::InvalidArgument, "duplicate sequence id " + id);
  }
  return g;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

char parse_allele(const std::string& s, std::size_t line_no, const char* what) {
  if (s.size() != 1 || base_index(static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])))) < 0) {
    throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": " + what + " allele must be one of ACGT");
  }
  return static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
}

}  // namespace

std::vector<Variant> read_variants(std::istream& in) {
  std::vector<Variant> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    if (f[0] == "seq_id") continue;
    if (f.size() < 4 || f.size() > 5) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": expected 4 or 5 columns");
    Variant v;
    v.seq_id = f[0];
    try {
      std::size_t used = 0;
      const long long p = std::stoll(f[1], &used);
      if (used != f[1].size() || p < 1) throw std::invalid_argument("pos");
      v.pos = static_cast<std::size_t>(p);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": pos must be a positive integer");
    }
    v.ref = parse_allele(f[2], line_no, "ref");
    v.alt = parse_allele(f[3], line_no, "alt");
    if (v.ref == v.alt) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": ref equals alt");
    if (f.size() == 5) {
      const std::string& l = f[4];
      if (l == "pathogenic") v.pathogenic = true;
      else if (l == "benign") v.pathogenic = false;
      else if (!l.empty() && l != "." && l != "NA") {
        throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": unknown label '" + l + "'");
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Variant> read_variants_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_variants(in);
}

void validate_variant(const Genome& genome, const Variant& v) {
  const auto it = genome.find(v.seq_id);
  if (it == genome.end()) throw Error(ErrorCode::UnknownSequenceId, v.seq_id);
  if (v.pos < 1 || v.pos > it->second.size()) {
    throw Error(ErrorCode::OffsetOutOfRange, v.seq_id + ":" + std::to_string(v.pos));
  }
  const char found = it->second.view()[v.pos - 1];
  if (found != v.ref) {
    throw Error(ErrorCode::RefMismatch, v.seq_id + ":" + std::to_string(v.pos) + " expected " + std::string(1, v.ref) +
                                            " found " + std::string(1, found));
  }
  if (v.ref == v.alt) throw Error(ErrorCode::InvalidArgument, "ref equals alt");
}

double NucleotideMarginal::operator[](char base) const {
  const int b = base_index(base);
  if (b < 0) throw Error(ErrorCode::InvalidSymbol, std::string(1, base));
  return probs[static_cast<std::size_t>(b)];
}

namespace {

// k when the sequence tokens are exactly the 4^k k-mers in rank order.
std::size_t canonical_k(const Vocabulary& vocab) {
  const std::size_t n = vocab.sequence_token_count();
  if (n < 4) return 0;
  const std::size_t k = vocab.token(0).size();
  if (k == 0 || k > 8 || n != (std::size_t{1} << (2 * k))) return 0;
  if (vocab.token(static_cast<TokenId>(n - 1)) != std::string(k, 'T')) return 0;
  if (vocab.token(1).size() != k) return 0;
  return k;
}

}  // namespace

NucleotideMarginal marginalize(const TokenDistribution& dist, const Vocabulary& vocab, std::size_t j) {
  if (dist.size() != vocab.size()) {
    throw Error(ErrorCode::VocabularyMismatch, "distribution over " + std::to_string(dist.size()) +
                                                   " tokens, vocabulary has " + std::to_string(vocab.size()));
  }
  NucleotideMarginal m;
  const std::size_t n = vocab.sequence_token_count();
  const auto& p = dist.probs();
  if (const std::size_t k = canonical_k(vocab); k > 0) {
    if (j >= k) throw Error(ErrorCode::OffsetOutOfRange, "j=" + std::to_string(j) + " with k=" + std::to_string(k));
    const unsigned shift = static_cast<unsigned>(2 * (k - 1 - j));
    for (std::size_t id = 0; id < n; ++id) m.probs[(id >> shift) & 3U] += p[id];
  } else {
    for (std::size_t id = 0; id < n; ++id) {
      const std::string& t = vocab.token(static_cast<TokenId>(id));
      if (t.size() > j) m.probs[static_cast<std::size_t>(base_index(t[j]))] += p[id];
    }
  }
  const double total = m.probs[0] + m.probs[1] + m.probs[2] + m.probs[3];
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "no probability mass on tokens covering offset " + std::to_string(j));
  for (auto& x : m.probs) x /= total;
  return m;
}

namespace {

std::vector<TokenId> encode_left_context(const Tokenizer& tokenizer, std::string_view bases) {
  const std::size_t k = tokenizer.fixed_token_length();
  if (k > 0) bases.remove_prefix(bases.size() % k);
  return tokenizer.encode(bases);
}

std::vector<TokenId> encode_right_context(const Tokenizer& tokenizer, std::string_view bases) {
  const std::size_t k = tokenizer.fixed_token_length();
  if (k > 0) bases.remove_suffix(bases.size() % k);
  return tokenizer.encode(bases);
}

}  // namespace

NucleotideMarginal marginal_nucleotide_prob(const CausalLm& lm, const Tokenizer& tokenizer,
                                            std::string_view context_before, std::size_t j,
                                            std::size_t max_context_tokens) {
  require_same_vocabulary(lm.vocabulary(), tokenizer.vocabulary());
  const auto ids = encode_left_context(tokenizer, context_before);
  if (ids.size() > max_context_tokens) {
    throw Error(ErrorCode::ContextOverflow, std::to_string(ids.size()) + " > " + std::to_string(max_context_tokens));
  }
  return marginalize(lm.next_distribution(ids), lm.vocabulary(), j);
}

double llr_score(const NucleotideMarginal& m, char ref, char alt) {
  const double pr = std::max(m[ref], kProbabilityFloor);
  const double pa = std::max(m[alt], kProbabilityFloor);
  return std::clamp(std::log(pr) - std::log(pa), -kScoreCap, kScoreCap);
}

namespace {

struct Placement {
  std::vector<std::size_t> phases;
  bool moved = false;
};

// Offsets j at which the variant can sit inside the predicted token.
Placement phases_for(const Tokenizer& tokenizer, const VepOptions& o, std::size_t i, std::size_t contig_len,
                     bool need_token_inside) {
  const std::size_t k = tokenizer.fixed_token_length();
  Placement pl;
  if (k == 0) {
    if (o.phase > 0) throw Error(ErrorCode::InvalidArgument, "variable-length tokens only support phase 0");
    pl.phases = {0};
    return pl;
  }
  if (o.phase >= static_cast<int>(k)) throw Error(ErrorCode::InvalidArgument, "phase must be below k");
  std::size_t lo = 0, hi = std::min(k - 1, i);
  if (need_token_inside && i + k > contig_len) lo = i + k - contig_len;
  if (lo > hi) throw Error(ErrorCode::SequenceTooShort, "contig shorter than one token");
  if (o.average_phases) {
    for (std::size_t j = lo; j <= hi; ++j) pl.phases.push_back(j);
    pl.moved = hi - lo + 1 < k;
    return pl;
  }
  const std::size_t want = o.phase < 0 ? k - 1 : static_cast<std::size_t>(o.phase);
  const std::size_t j = std::clamp(want, lo, hi);
  pl.phases = {j};
  pl.moved = j != want;
  return pl;
}

const NucleotideSequence& contig_of(const Genome& genome, const Variant& v) {
  validate_variant(genome, v);
  return genome.find(v.seq_id)->second;
}

// Start of the N-free stretch ending at `end`, no further back than `begin`.
std::size_t clean_begin(std::string_view s, std::size_t begin, std::size_t end) {
  for (std::size_t p = end; p > begin; --p) {
    if (base_index(s[p - 1]) < 0) return p;
  }
  return begin;
}

std::size_t clean_end(std::string_view s, std::size_t begin, std::size_t end) {
  for (std::size_t p = begin; p < end; ++p) {
    if (base_index(s[p]) < 0) return p;
  }
  return end;
}

}  // namespace

VepResult vep_score(const CausalLm& lm, const Tokenizer& tokenizer, const Genome& genome, const Variant& v,
                    const VepOptions& options) {
  require_same_vocabulary(lm.vocabulary(), tokenizer.vocabulary());
  const auto& contig = contig_of(genome, v);
  const std::string_view s = contig.view();
  const std::size_t i = v.pos - 1;
  const auto pl = phases_for(tokenizer, options, i, s.size(), false);
  VepResult r;
  r.truncated = pl.moved;
  r.phases = pl.phases.size();
  double total = 0.0;
  for (const std::size_t j : pl.phases) {
    const std::size_t token_start = i - j;
    const std::size_t want = token_start >= options.context_nt ? token_start - options.context_nt : 0;
    const std::size_t begin = clean_begin(s, want, token_start);
    if (token_start - want < options.context_nt || begin != want) r.truncated = true;
    const auto m = marginal_nucleotide_prob(lm, tokenizer, s.substr(begin, token_start - begin), j);
    total += llr_score(m, v.ref, v.alt);
  }
  r.score = total / static_cast<double>(pl.phases.size());
  return r;
}

VepResult mlm_vep_score(const MaskedLm& mlm, const Tokenizer& tokenizer, const Genome& genome, const Variant& v,
                        const VepOptions& options) {
  require_same_vocabulary(mlm.vocabulary(), tokenizer.vocabulary());
  const auto& contig = contig_of(genome, v);
  const std::string_view s = contig.view();
  const std::size_t i = v.pos - 1;
  const std::size_t k = tokenizer.fixed_token_length();
  const auto pl = phases_for(tokenizer, options, i, s.size(), true);
  const std::size_t half = options.window_nt / 2;
  VepResult r;
  r.truncated = pl.moved;
  r.phases = pl.phases.size();
  double total = 0.0;
  for (const std::size_t j : pl.phases) {
    const std::size_t token_start = i - j;
    const std::size_t token_end = k > 0 ? token_start + k : i + 1;
    const std::size_t want_left = token_start >= half ? token_start - half : 0;
    const std::size_t want_right = std::min(s.size(), token_end + half);
    const std::size_t left = clean_begin(s, want_left, token_start);
    const std::size_t right = clean_end(s, token_end, want_right);
    if (token_start - want_left < half || left != want_left || want_right - token_end < half || right != want_right) {
      r.truncated = true;
    }
    auto ids = encode_left_context(tokenizer, s.substr(left, token_start - left));
    ids.push_back(mlm.vocabulary().mask());
    const auto rhs = encode_right_context(tokenizer, s.substr(token_end, right - token_end));
    ids.insert(ids.end(), rhs.begin(), rhs.end());
    const auto m = marginalize(mlm.distribution_at_mask(ids), mlm.vocabulary(), j);
    total += llr_score(m, v.ref, v.alt);
  }
  r.score = total / static_cast<double>(pl.phases.size());
  return r;
}

std::vector<VepResult> score_variants(const CausalLm* lm, const MaskedLm* mlm, const Tokenizer& tokenizer,
                                      const Genome& genome, const std::vector<Variant>& variants,
                                      const VepOptions& options) {
  for (const auto& v : variants) validate_variant(genome, v);
  if (options.mode == VepMode::Causal && lm == nullptr) throw Error(ErrorCode::InvalidArgument, "causal mode needs a causal model");
  if (options.mode == VepMode::Mlm && mlm == nullptr) throw Error(ErrorCode::InvalidArgument, "masked mode needs a masked model");
  std::vector<VepResult> out(variants.size());
  parallel_for(variants.size(), options.threads, [&](std::size_t n) {
    out[n] = options.mode == VepMode::Causal ? vep_score(*lm, tokenizer, genome, variants[n], options)
                                             : mlm_vep_score(*mlm, tokenizer, genome, variants[n], options);
  });
  return out;
}

VepMetrics evaluate_vep(std::span<const double> scores, const std::vector<bool>& pathogenic) {
  VepMetrics m;
  m.auroc = auroc(scores, pathogenic);
  m.auprc = auprc(scores, pathogenic);
  m.n = scores.size();
  m.positives = static_cast<std::size_t>(std::count(pathogenic.begin(), pathogenic.end(), true));
  return m;
}

namespace {

std::string format_score(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

void write_vep_tsv(std::ostream& out, const std::vector<Variant>& variants, const std::vector<VepResult>& results) {
  if (variants.size() != results.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  out << "#seq_id\tpos\tref\talt\tlabel\tvep_score\ttruncated\n";
  for (std::size_t n = 0; n < variants.size(); ++n) {
    const auto& v = variants[n];
    const char* label = !v.pathogenic ? "." : (*v.pathogenic ? "pathogenic" : "benign");
    out << v.seq_id << '\t' << v.pos << '\t' << v.ref << '\t' << v.alt << '\t' << label << '\t'
        << format_score(results[n].score) << '\t' << (results[n].truncated ? 1 : 0) << '\n';
  }
}

void read_vep_tsv(std::istream& in, std::vector<double>& scores, std::vector<bool>& pathogenic) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() < 6) throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": expected score table");
    if (f[4] != "pathogenic" && f[4] != "benign") continue;
    double s = 0.0;
    try {
      s = std::stod(f[5]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": bad score");
    }
    scores.push_back(s);
    pathogenic.push_back(f[4] == "pathogenic");
  }
}

nlohmann::json vep_metrics_json(const VepMetrics& m) {
  return {{"auroc", m.auroc},
          {"auprc", m.auprc},
          {"n", m.n},
          {"positives", m.positives},
          {"positive_class", "pathogenic"},
          {"statistic", "vep_score (higher = reference preferred = ranked more pathogenic)"}};
}

}  // namespace genolm
