// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "genolm/analytics.hpp"
#include "genolm/design.hpp"
#include "genolm/ingest.hpp"
#include "genolm/lm.hpp"
#include "genolm/recover.hpp"
#include "genolm/rng.hpp"
#include "genolm/sample.hpp"
#include "genolm/tokenize.hpp"
#include "genolm/vep.hpp"

using namespace genolm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string random_bases(Rng& rng, std::size_t n) {
  std::string s(n, 'A');
  for (auto& c : s) c = "ACGT"[rng.below(4)];
  return s;
}

class FixedLm final : public CausalLm {
 public:
  FixedLm(const Vocabulary& v, TokenDistribution d) : vocab_(v), dist_(std::move(d)) {}
  TokenDistribution next_distribution(std::span<const TokenId>) const override { return dist_; }
  const Vocabulary& vocabulary() const noexcept override { return vocab_; }

 private:
  const Vocabulary& vocab_;
  TokenDistribution dist_;
};

// ------------------------------------------------------------------ 1
Outcome tokenizer_round_trip() {
  Rng rng(101);
  std::vector<std::string> seqs(1000);
  for (auto& s : seqs) s = random_bases(rng, 1 + rng.below(10000));
  std::size_t failures = 0, checks = 0;
  for (int k = 1; k <= 8; ++k) {
    const KmerTokenizer tok(k);
    for (const auto& s : seqs) {
      for (int off = 0; off < k; ++off) {
        ++checks;
        const auto enc = tok.encode_with_offset(s, off);
        const std::size_t o = std::min<std::size_t>(static_cast<std::size_t>(off), s.size());
        const std::size_t body = (s.size() - o) / static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
        const std::string decoded = tok.decode(enc.ids);
        if (decoded != s.substr(o, body) || enc.head + decoded + enc.tail != s) ++failures;
      }
    }
  }
  std::vector<NucleotideSequence> corpus;
  for (int i = 0; i < 40; ++i) corpus.push_back(NucleotideSequence::trusted(random_bases(rng, 2000)));
  const BpeTokenizer bpe(bpe_train(corpus, 300, 5));
  for (const auto& s : seqs) {
    ++checks;
    if (bpe.decode(bpe.encode(s)) != s) ++failures;
  }
  return {failures == 0, std::to_string(checks) + " round trips, " + std::to_string(failures) + " failures"};
}

// ------------------------------------------------------------------ 2
Outcome vocabulary_shape() {
  bool ok = true;
  for (int k = 1; k <= 8; ++k) {
    const auto v = Vocabulary::kmer(k);
    ok = ok && v.sequence_token_count() == (std::size_t{1} << (2 * k)) && v.size() == v.sequence_token_count() + 32;
  }
  const auto v6 = Vocabulary::kmer(6);
  ok = ok && v6.sequence_token_count() == 4096 && v6.size() == 4128;
  return {ok, "k=6: " + std::to_string(v6.sequence_token_count()) + " + " +
                  std::to_string(v6.size() - v6.sequence_token_count()) + " = " + std::to_string(v6.size())};
}

// ------------------------------------------------------------------ 3
Outcome marginalization_oracle() {
  const KmerTokenizer tok(6);
  const auto& v = tok.vocabulary();
  Rng rng(303);
  double max_delta = 0.0, max_sum_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(v.size());
    for (auto& x : p) x = -std::log(1.0 - rng.uniform());  // exponential weights
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= total;
    const FixedLm lm(v, TokenDistribution::from_probs(p));
    const std::string ctx = random_bases(rng, 30);
    for (std::size_t j = 0; j < 6; ++j) {
      const auto m = marginal_nucleotide_prob(lm, tok, ctx, j);
      std::array<double, 4> brute{};
      double seq_mass = 0.0;
      for (TokenId id = 0; id < 4096; ++id) {
        const std::string& t = v.token(id);
        brute[std::string("ACGT").find(t[j])] += p[id];
        seq_mass += p[id];
      }
      double sum = 0.0;
      for (std::size_t b = 0; b < 4; ++b) {
        max_delta = std::max(max_delta, std::abs(m.probs[b] - brute[b] / seq_mass));
        sum += m.probs[b];
      }
      max_sum_err = std::max(max_sum_err, std::abs(sum - 1.0));
    }
  }
  return {max_delta < 1e-12 && max_sum_err < 1e-9,
          "max |delta| " + fmt("%.3g", max_delta) + ", max |sum-1| " + fmt("%.3g", max_sum_err)};
}

// ------------------------------------------------------------------ 4
Outcome random_baseline_recovery() {
  Rng rng(404);
  std::vector<RecoveryItem> items;
  items.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    items.push_back({NucleotideSequence::trusted(random_bases(rng, 60)), NucleotideSequence::trusted(random_bases(rng, 30)),
                     "all"});
  }
  const KmerTokenizer tok(6);
  const UniformLm lm(tok.vocabulary());
  RecoveryRunConfig cfg;
  cfg.predict_lens = {30};
  cfg.sampler.mode = DecodeMode::Sample;
  cfg.sampler.seed = 4;
  const auto report = run_recovery(lm, tok, items, cfg);
  const double mean = report.overall.begin()->second;
  return {std::abs(mean - 0.25) <= 0.013, "mean accuracy " + fmt("%.4f", mean) + " (target 0.25 +/- 0.013)"};
}

// ------------------------------------------------------------------ 5
Outcome markov_oracle_recovery() {
  constexpr int kOrder = 5;
  constexpr std::size_t kStates = 1 << (2 * kOrder);
  constexpr std::size_t kL = 30;
  Rng rng(505);
  // Each history gets a shuffled copy of a fixed profile, so the arg-max is
  // unique and well separated.
  std::vector<std::array<double, 4>> T(kStates);
  for (auto& row : T) {
    std::array<std::size_t, 4> perm{0, 1, 2, 3};
    rng.shuffle(std::span<std::size_t>(perm));
    const double profile[4] = {0.55, 0.25, 0.12, 0.08};
    for (std::size_t b = 0; b < 4; ++b) row[perm[b]] = profile[b];
  }
  auto step = [&](std::size_t state, std::size_t base) { return (state * 4 + base) % kStates; };
  auto draw = [&](std::size_t state) {
    const double u = rng.uniform();
    double c = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
      c += T[state][b];
      if (u < c) return b;
    }
    return std::size_t{3};
  };

  // Training stream: 1M tokens (k=1).
  const KmerTokenizer tok(1);
  std::size_t state = 0;
  for (int i = 0; i < 1000; ++i) state = step(state, draw(state));  // burn in
  std::vector<TokenId> stream(1000000);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const std::size_t b = draw(state);
    stream[i] = static_cast<TokenId>(b);
    state = step(state, b);
  }
  MarkovConfig mc;
  mc.order = kOrder;
  mc.alpha = {0.01};
  mc.lambda = {0, 0, 0, 0, 0, 1};
  const auto lm = MarkovLm::train(tok.vocabulary(), {stream}, mc);

  // Held-out items continue the chain.
  std::vector<RecoveryItem> items;
  for (int i = 0; i < 3000; ++i) {
    std::string seg(20 + kL, 'A');
    for (int s = 0; s < 50; ++s) state = step(state, draw(state));  // decorrelate
    for (auto& c : seg) {
      const std::size_t b = draw(state);
      c = "ACGT"[b];
      state = step(state, b);
    }
    items.push_back({NucleotideSequence::trusted(seg.substr(0, 20)), NucleotideSequence::trusted(seg.substr(20)), "chain"});
  }
  RecoveryRunConfig cfg;
  cfg.predict_lens = {kL};
  const double empirical = run_recovery(lm, tok, items, cfg).overall.begin()->second;

  // Analytic: stationary distribution over histories, then for each history
  // the exact probability that the chain's t-th base equals the t-th base of
  // the chain's own greedy path.
  std::vector<double> pi(kStates, 1.0 / kStates), next(kStates);
  for (int it = 0; it < 5000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < kStates; ++s)
      for (std::size_t b = 0; b < 4; ++b) next[step(s, b)] += pi[s] * T[s][b];
    double diff = 0.0;
    for (std::size_t s = 0; s < kStates; ++s) diff += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  double analytic = 0.0;
  std::vector<double> dist(kStates), nd(kStates);
  for (std::size_t h = 0; h < kStates; ++h) {
    std::size_t g = h;
    std::fill(dist.begin(), dist.end(), 0.0);
    dist[h] = 1.0;
    double acc = 0.0;
    for (std::size_t t = 0; t < kL; ++t) {
      const std::size_t best = static_cast<std::size_t>(std::max_element(T[g].begin(), T[g].end()) - T[g].begin());
      std::fill(nd.begin(), nd.end(), 0.0);
      for (std::size_t s = 0; s < kStates; ++s) {
        if (dist[s] == 0.0) continue;
        acc += dist[s] * T[s][best];
        for (std::size_t b = 0; b < 4; ++b) nd[step(s, b)] += dist[s] * T[s][b];
      }
      dist.swap(nd);
      g = step(g, best);
    }
    analytic += pi[h] * acc / kL;
  }
  return {std::abs(empirical - analytic) <= 0.02,
          "greedy " + fmt("%.4f", empirical) + " vs analytic " + fmt("%.4f", analytic) + " (tolerance 0.02)"};
}

// ------------------------------------------------------------------ 6
Outcome vep_properties() {
  Rng rng(606);
  const std::string g = random_bases(rng, 20000);
  const Genome genome = make_genome({NucleotideSequence::trusted(g, "chr")});
  const KmerTokenizer tok(1);
  MarkovConfig mc;
  mc.order = 3;
  const auto lm = MarkovLm::train(tok.vocabulary(), {tok.encode(random_bases(rng, 50000))}, mc);
  const UniformLm uniform(tok.vocabulary());
  VepOptions opt;
  opt.context_nt = 64;

  std::vector<Variant> vars;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t pos = 1 + rng.below(g.size());
    const char ref = g[pos - 1];
    char alt = ref;
    while (alt == ref) alt = "ACGT"[rng.below(4)];
    vars.push_back({"chr", pos, ref, alt, i % 2 == 0});
  }
  const auto res = score_variants(&lm, nullptr, tok, genome, vars, opt);

  bool antisym = true;
  for (std::size_t n = 0; n < 200; ++n) {
    const auto& v = vars[n];
    std::string mutated = g;
    mutated[v.pos - 1] = v.alt;
    const Genome g2 = make_genome({NucleotideSequence::trusted(mutated, "chr")});
    antisym = antisym && vep_score(lm, tok, g2, {"chr", v.pos, v.alt, v.ref, {}}, opt).score == -res[n].score;
  }
  bool zero = true;
  for (const auto& r : score_variants(&uniform, nullptr, tok, genome, vars, opt)) zero = zero && r.score == 0.0;

  const std::vector<double> hs{0.9, 0.1, 0.4, 0.35, 0.8, 0.05};
  const std::vector<bool> hl{true, false, false, true, true, false};
  double wins = 0.0, pairs = 0.0;
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b)
      if (hl[a] && !hl[b]) pairs += 1.0, wins += hs[a] > hs[b] ? 1.0 : (hs[a] == hs[b] ? 0.5 : 0.0);
  // Precision at each positive, ranking by descending score.
  std::vector<std::size_t> order(6);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return hs[a] > hs[b]; });
  double ap = 0.0, tp = 0.0;
  for (std::size_t r = 0; r < 6; ++r) {
    if (hl[order[r]]) tp += 1.0, ap += tp / static_cast<double>(r + 1);
  }
  ap /= 3.0;
  const auto hm = evaluate_vep(hs, hl);
  const bool fixture = std::abs(hm.auroc - wins / pairs) < 1e-12 && std::abs(hm.auprc - ap) < 1e-12;

  std::vector<bool> labels;
  std::vector<double> scores;
  for (std::size_t n = 0; n < vars.size(); ++n) labels.push_back(*vars[n].pathogenic), scores.push_back(res[n].score);
  for (std::size_t i = labels.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    const bool t = labels[i - 1];
    labels[i - 1] = labels[j];
    labels[j] = t;
  }
  const double shuffled = evaluate_vep(scores, labels).auroc;
  const bool null_ok = std::abs(shuffled - 0.5) <= 0.02;
  return {antisym && zero && fixture && null_ok,
          std::string("antisymmetry ") + (antisym ? "exact" : "broken") + ", uniform " + (zero ? "all 0" : "nonzero") +
              ", fixture AUROC " + fmt("%.4f", hm.auroc) + " AUPRC " + fmt("%.4f", hm.auprc) + ", shuffled AUROC " +
              fmt("%.4f", shuffled)};
}

// ------------------------------------------------------------------ 7
Outcome quantile_labeling() {
  Rng rng(707);
  std::size_t mismatches = 0;
  bool sizes = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> a(100);
    for (auto& x : a) x = rng.uniform() * 10.0 - 5.0;
    const auto labels = quantile_labels(a);
    std::vector<std::size_t> idx(100);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return a[x] < a[y]; });
    std::array<std::size_t, 3> count{};
    for (std::size_t r = 0; r < 100; ++r) {
      const auto want = r < 25 ? ActivityLabel::Low : (r >= 75 ? ActivityLabel::High : ActivityLabel::Mid);
      mismatches += labels[idx[r]] != want;
      ++count[static_cast<std::size_t>(labels[idx[r]])];
    }
    sizes = sizes && count[0] == 25 && count[1] == 50 && count[2] == 25;
  }
  return {sizes && mismatches == 0, "1000 inputs, " + std::to_string(mismatches) + " label mismatches"};
}

// ------------------------------------------------------------------ 8
Outcome contribution_oracle() {
  Rng rng(808);
  std::vector<ActivityRecord> train;
  for (int i = 0; i < 300; ++i) {
    train.push_back({NucleotideSequence::trusted(random_bases(rng, 100 + rng.below(50))), rng.uniform() * 4.0 - 2.0});
  }
  const auto model = fit_kmer_ridge(train, 5, 1.0);
  const KmerRidgePredictor constant(5, std::vector<double>(1024, 0.0), 1.25, 1.0);
  double max_delta = 0.0;
  bool zeros = true;
  for (int n = 0; n < 50; ++n) {
    const std::string s = random_bases(rng, 100);
    const auto c = contribution_scores(model, s);
    const double f = model.predict(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      double alt = 0.0;
      for (const char b : {'A', 'C', 'G', 'T'}) {
        if (b == s[i]) continue;
        std::string m = s;
        m[i] = b;
        alt += model.predict(m);
      }
      max_delta = std::max(max_delta, std::abs(c[i] - (f - alt / 3.0)));
    }
    for (const double x : contribution_scores(constant, s)) zeros = zeros && x == 0.0;
  }
  return {max_delta < 1e-10 && zeros, "max |delta| " + fmt("%.3g", max_delta) + (zeros ? ", constant all 0" : ", constant nonzero")};
}

// ------------------------------------------------------------------ 9
Outcome metric_fixtures() {
  const double m = mcc({3, 4, 1, 2});
  const std::vector<int> truth{0, 0, 0, 1, 1, 1};
  const std::vector<int> pred{0, 0, 1, 1, 1, 0};
  const double f1 = weighted_f1(confusion_matrix(truth, pred, 2));
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> up{3, 5, 7, 9, 11}, down{-1, -3, -5, -7, -9};
  const double rp = pearson_r(x, up), rn = pearson_r(x, down);
  const bool ok = std::abs(m - 10.0 / std::sqrt(600.0)) < 1e-12 && std::abs(f1 - 2.0 / 3.0) < 1e-12 &&
                  std::abs(rp - 1.0) < 1e-12 && std::abs(rn + 1.0) < 1e-12;
  return {ok, "MCC " + fmt("%.15f", m) + ", F1 " + fmt("%.15f", f1) + ", r " + fmt("%+.12f", rp) + "/" + fmt("%+.12f", rn)};
}

// ------------------------------------------------------------------ 10
Outcome conditioned_separation() {
  Rng rng(1010);
  const KmerTokenizer tok(6);
  std::vector<ActivityRecord> recs;
  std::vector<ActivityLabel> labels;
  for (int i = 0; i < 600; ++i) {
    const bool high = i % 2 == 0;
    std::string s(300, 'A');
    for (auto& c : s) c = rng.uniform() < 0.8 ? (high ? 'A' : 'T') : (high ? "CGT" : "ACG")[rng.below(3)];
    recs.push_back({NucleotideSequence::trusted(s), 0.0});
    labels.push_back(high ? ActivityLabel::High : ActivityLabel::Low);
  }
  MarkovConfig mc;
  // Light smoothing: with |V| = 4128 a larger alpha spreads most of the mass
  // of sparse histories uniformly and the prefix signal washes out.
  mc.order = 2;
  mc.alpha = {1e-4};
  mc.lambda = {0.02, 0.18, 0.8};
  const auto lm = MarkovLm::train(tok.vocabulary(), build_prefix_dataset(recs, labels, tok), mc);
  SamplerConfig sc;
  sc.seed = 10;
  sc.max_new_tokens = 10;
  auto a_fraction = [&](const char* prefix) {
    ConditionedRequest req;
    req.prefix = prefix;
    req.count = 1000;
    const auto res = conditioned_generate(lm, tok, req, sc);
    double a = 0.0, n = 0.0;
    for (const auto& s : res.sequences) {
      a += static_cast<double>(std::count(s.view().begin(), s.view().end(), 'A'));
      n += static_cast<double>(s.size());
    }
    return n > 0 ? a / n : 0.0;
  };
  const double hi = a_fraction("high"), lo = a_fraction("low");
  return {hi - lo > 0.3, "A fraction <high> " + fmt("%.3f", hi) + " vs <low> " + fmt("%.3f", lo)};
}

// ------------------------------------------------------------------ 11
Outcome ingestion_exactness() {
  std::ifstream in(std::string(GENOLM_TEST_DATA) + "/genes.gb");
  if (!in) return {false, "fixture missing"};
  const auto entries = parse_genbank(in);
  if (entries.size() != 1) return {false, "expected one record"};
  const auto& e = entries.front();
  const std::string& g = e.sequence.bases();
  struct Want {
    std::size_t start, end;
    Strand strand;
    FeatureType type;
  };
  const Want want[] = {{11, 70, Strand::Plus, FeatureType::CDS},
                       {101, 150, Strand::Minus, FeatureType::TRNA},
                       {171, 230, Strand::Plus, FeatureType::NcRNA}};
  bool ok = e.genes.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) {
    const auto& r = e.genes[i];
    ok = r.start == want[i].start && r.end == want[i].end && r.strand == want[i].strand && r.feature_type == want[i].type;
  }
  const auto regions = extract_functional_regions({e.sequence}, e.genes);
  ok = ok && regions.size() == 3;
  if (ok) {
    const std::string minus = g.substr(100, 50);
    std::string rc(minus.rbegin(), minus.rend());
    for (auto& c : rc) c = c == 'A' ? 'T' : c == 'C' ? 'G' : c == 'G' ? 'C' : 'A';
    ok = regions[0].sequence.bases() == g.substr(10, 60) && regions[1].sequence.bases() == rc &&
         regions[2].sequence.bases() == g.substr(170, 60);
  }
  const auto stats = corpus_stats(regions);
  ok = ok && stats.total().genes == 3 && stats.total().nucleotides == 170 &&
       stats.cells.at({"mammalian", "CDS"}).nucleotides == 60 && stats.cells.at({"mammalian", "tRNA"}).nucleotides == 50 &&
       stats.cells.at({"mammalian", "ncRNA"}).nucleotides == 60;
  return {ok, "3 genes (one complement, one join), " + std::to_string(stats.total().nucleotides) + " nt"};
}

// ------------------------------------------------------------------ 12
Outcome embedding_separation() {
  Rng rng(1212);
  EmbeddingSet set;
  set.dim = 64;
  for (const double gc : {0.3, 0.7}) {
    for (int i = 0; i < 50; ++i) {
      std::string s(5000, 'A');
      for (auto& c : s) c = rng.uniform() < gc ? "GC"[rng.below(2)] : "AT"[rng.below(2)];
      set.add(profile_embedding(s, 3), gc < 0.5 ? "gc30" : "gc70");
    }
  }
  const auto p = pca_project(set, 2);
  const double s = silhouette(projected(set, p));
  return {s > 0.5, "silhouette " + fmt("%.4f", s)};
}

// ------------------------------------------------------------------ 13
std::string run_cli(const std::string& args, int& status) {
  const std::string cmd = std::string("\"") + GENOLM_CLI + "\" " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  if (!p) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int st = ::pclose(p);
  status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "genolm_acceptance";
  fs::create_directories(dir);
  Rng rng(1313);
  {
    std::ofstream fa(dir / "corpus.fa");
    for (int i = 0; i < 20; ++i) fa << ">s" << i << "\n" << random_bases(rng, 600) << "\n";
    std::vector<RecoveryItem> items;
    for (int i = 0; i < 50; ++i) {
      items.push_back({NucleotideSequence::trusted(random_bases(rng, 120)), NucleotideSequence::trusted(random_bases(rng, 30)),
                       i % 2 ? "plant" : "fungi"});
    }
    std::ofstream ds(dir / "recovery.tsv");
    write_recovery_dataset(ds, items);
  }
  const std::string model = (dir / "model.gmlm").string();
  int st = 0;
  run_cli("train-markov --in " + (dir / "corpus.fa").string() + " --tokenizer kmer:3 --order 2 --out " + model, st);
  if (st != 0) return {false, "train-markov exited " + std::to_string(st)};

  const std::string gen = "--seed 13 --threads 2 generate --model " + model +
                          " --tokenizer kmer:3 --count 20 --max-new-tokens 40 --temperature 0.8 --top-p 0.9";
  const std::string rec = "--seed 13 --threads 2 recover run --dataset " + (dir / "recovery.tsv").string() +
                          " --model " + model + " --tokenizer kmer:3 --predict-lens 10 30 --sample";
  int s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  const std::string g1 = run_cli(gen, s1), g2 = run_cli(gen, s2);
  const std::string r1 = run_cli(rec, s3), r2 = run_cli(rec, s4);
  fs::remove_all(dir);
  const bool ok = s1 == 0 && s2 == 0 && s3 == 0 && s4 == 0 && !g1.empty() && !r1.empty() && g1 == g2 && r1 == r2;
  return {ok, "generate " + std::to_string(g1.size()) + " bytes " + (g1 == g2 ? "identical" : "differ") +
                  ", recover run " + std::to_string(r1.size()) + " bytes " + (r1 == r2 ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"tokenizer round trip", tokenizer_round_trip},
      {"vocabulary shape", vocabulary_shape},
      {"marginalization oracle", marginalization_oracle},
      {"random baseline recovery", random_baseline_recovery},
      {"markov oracle recovery", markov_oracle_recovery},
      {"vep properties", vep_properties},
      {"quantile labeling", quantile_labeling},
      {"contribution score oracle", contribution_oracle},
      {"metric fixtures", metric_fixtures},
      {"conditioned generation separation", conditioned_separation},
      {"ingestion exactness", ingestion_exactness},
      {"embedding separation", embedding_separation},
      {"determinism", determinism},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << n << " " << name << ": " << o.detail << " [" << fmt("%.1f", secs)
              << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
