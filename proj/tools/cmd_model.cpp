// train-markov, generate, recover, bridge-serve
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/recover.hpp"
#include "genolm/rng.hpp"
#include "genolm/sample.hpp"

namespace genolm::cli {

namespace {

struct SamplerOpts {
  double temperature = 1.0;
  double top_p = 1.0;
  bool greedy = false;
  bool sample = false;

  void add(CLI::App* app, bool greedy_default) {
    app->add_option("--temperature", temperature, "Softmax temperature (> 0)");
    app->add_option("--top-p", top_p, "Nucleus mass in (0,1]");
    if (greedy_default) app->add_flag("--sample", sample, "Sample instead of greedy decoding");
    else app->add_flag("--greedy", greedy, "Greedy decoding (ignores temperature and top-p)");
  }

  SamplerConfig config(std::uint64_t seed, bool greedy_default) const {
    SamplerConfig c;
    c.temperature = temperature;
    c.top_p = top_p;
    c.seed = seed;
    c.mode = (greedy_default ? !sample : greedy) ? DecodeMode::Greedy : DecodeMode::Sample;
    return c;
  }
};

std::vector<std::vector<TokenId>> labeled_corpus(const std::string& path, const Tokenizer& tok) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  const Vocabulary& vocab = tok.vocabulary();
  std::vector<std::vector<TokenId>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto first = line.find('\t');
    const auto last = line.rfind('\t');
    if (first == std::string::npos) throw Error(ErrorCode::BadRow, path + " line " + std::to_string(line_no) + ": expected sequence<TAB>...<TAB>label");
    const auto seq = NucleotideSequence::validate(line.substr(0, first));
    std::vector<TokenId> ids{vocab.bos(), vocab.prefix_token(line.substr(last + 1))};
    const auto body = tok.encode(seq.view());
    ids.insert(ids.end(), body.begin(), body.end());
    ids.push_back(vocab.eos());
    out.push_back(std::move(ids));
  }
  return out;
}

void add_train_markov(Context& ctx) {
  struct Opts {
    std::vector<std::string> in;
    std::string labeled;
    std::string tokenizer = "kmer:6";
    MarkovConfig config;
    bool random_offset = false;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("train-markov", "Train the interpolated Markov language model");
  app->add_option("--in", o->in, "Corpus FASTA file(s); each N-free piece becomes [BOS] tokens [EOS]")->delimiter(',');
  app->add_option("--labeled", o->labeled, "TSV of sequence ... label rows; each becomes [BOS, <label>] tokens [EOS]");
  app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec or JSON path");
  app->add_option("--order", o->config.order, "Markov order in tokens")->check(CLI::Range(0, 32));
  app->add_option("--alpha", o->config.alpha, "Add-alpha constant (one, or one per order 0..order)")->delimiter(',');
  app->add_option("--lambda", o->config.lambda, "Interpolation weights for orders 0..order")->delimiter(',');
  app->add_flag("--random-offset", o->random_offset, "Random phase offset in [0,k-1] per training sequence (uses --seed)");
  auto* out_opt = app->add_option("--out", o->out, "Model path (.gmlm)");
  ctx.registry.add(app, [&ctx, o, out_opt] {
    require(out_opt);
    if (o->in.empty() && o->labeled.empty()) throw UsageError("need --in or --labeled");
    const auto tok = make_tokenizer(o->tokenizer);
    const Vocabulary& vocab = tok->vocabulary();
    const auto* kmer = dynamic_cast<const KmerTokenizer*>(tok.get());
    if (o->random_offset && kmer == nullptr) throw UsageError("--random-offset needs a k-mer tokenizer");
    std::vector<std::vector<TokenId>> corpus;
    std::size_t n = 0;
    for (const auto& path : o->in) {
      for (const auto& rec : read_sequences(path)) {
        for (const auto& piece : n_free_pieces(rec.view())) {
          std::vector<TokenId> ids{vocab.bos()};
          std::vector<TokenId> body;
          if (o->random_offset) {
            const int offset = static_cast<int>(Rng::for_job(ctx.globals.seed, n).below(static_cast<std::uint64_t>(kmer->k())));
            body = kmer->encode_with_offset(piece, offset).ids;
          } else {
            body = tok->encode(piece);
          }
          ++n;
          ids.insert(ids.end(), body.begin(), body.end());
          ids.push_back(vocab.eos());
          corpus.push_back(std::move(ids));
        }
      }
    }
    if (!o->labeled.empty()) {
      auto extra = labeled_corpus(o->labeled, *tok);
      corpus.insert(corpus.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
    }
    const auto model = MarkovLm::train(vocab, corpus, o->config);
    model.save(o->out);
    std::cerr << "train-markov: " << corpus.size() << " sequences, order " << model.order() << "\n";
  });
}

void add_generate(Context& ctx) {
  struct Opts {
    std::string model;
    std::string tokenizer = "kmer:6";
    std::string prefix = "none";
    std::string seed_context;
    std::size_t count = 1;
    std::size_t max_new_tokens = 64;
    SamplerOpts sampler;
    std::string dedup_against;
    std::string out;
    bool json = false;
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("generate", "Generate sequences, optionally prefix-conditioned");
  auto* model_opt = app->add_option("--model", o->model, "Model: .gmlm path, 'uniform', exec:CMD or tcp:HOST:PORT");
  app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec or JSON path");
  app->add_option("--prefix", o->prefix, "Conditioning prefix")->check(CLI::IsMember({"none", "high", "mid", "low"}));
  app->add_option("--seed-context", o->seed_context, "Nucleotides placed after the prefix");
  app->add_option("--count", o->count, "Number of sequences");
  app->add_option("--max-new-tokens", o->max_new_tokens, "Tokens generated per sequence");
  o->sampler.add(app, false);
  app->add_option("--dedup-against", o->dedup_against, "FASTA of sequences to exclude; also drops repeats within the batch");
  app->add_option("--out", o->out, "FASTA output (default stdout)");
  app->add_flag("--json", o->json, "JSON output");
  ctx.registry.add(app, [&ctx, app, o, model_opt] {
    require(model_opt);
    const auto tok = make_tokenizer(o->tokenizer);
    const auto lm = load_model(o->model, *tok);
    auto cfg = o->sampler.config(ctx.globals.seed, false);
    cfg.max_new_tokens = o->max_new_tokens;
    cfg.validate();

    std::vector<NucleotideSequence> seqs;
    std::size_t removed = 0;
    bool exhausted = false;
    if (o->prefix == "none") {
      require_same_vocabulary(lm->vocabulary(), tok->vocabulary());
      std::vector<TokenId> prompt{lm->vocabulary().bos()};
      const auto ctx_ids = tok->encode(NucleotideSequence::validate(o->seed_context).view());
      prompt.insert(prompt.end(), ctx_ids.begin(), ctx_ids.end());
      std::vector<std::string> outs(o->count);
      parallel_for(o->count, ctx.threads(), [&](std::size_t job) { outs[job] = tok->decode(generate(*lm, prompt, cfg, job)); });
      std::set<std::string> exclude, seen;
      if (!o->dedup_against.empty()) {
        for (const auto& r : read_sequences(o->dedup_against)) exclude.insert(r.bases());
      }
      for (std::size_t job = 0; job < outs.size(); ++job) {
        if (!o->dedup_against.empty() && (exclude.contains(outs[job]) || !seen.insert(outs[job]).second)) {
          ++removed;
          continue;
        }
        seqs.push_back(NucleotideSequence::trusted(outs[job], "gen" + std::to_string(job)).with_meta("prefix", "none"));
      }
      exhausted = seqs.size() < o->count;
    } else {
      std::set<std::string> exclude;
      ConditionedRequest req;
      req.prefix = o->prefix;
      req.seed_context = o->seed_context;
      req.count = o->count;
      req.threads = ctx.threads();
      if (!o->dedup_against.empty()) {
        for (const auto& r : read_sequences(o->dedup_against)) exclude.insert(r.bases());
        req.dedup_against = &exclude;
      }
      auto res = conditioned_generate(*lm, *tok, req, cfg);
      seqs = std::move(res.sequences);
      removed = res.duplicates_removed;
      exhausted = res.exhausted;
    }
    if (exhausted) std::cerr << "generate: only " << seqs.size() << " of " << o->count << " sequences were unique\n";

    Output out(o->out);
    if (o->json) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& s : seqs) rows.push_back({{"id", s.id()}, {"prefix", s.meta().at("prefix")}, {"sequence", s.bases()}});
      print_json(out.stream(), {{"config", effective_config(ctx.root, app)},
                                {"duplicates_removed", removed},
                                {"exhausted", exhausted},
                                {"sequences", rows}});
    } else {
      for (const auto& s : seqs) write_fasta_record(out.stream(), s.id() + " prefix=" + s.meta().at("prefix"), s.view());
    }
    out.close();
  });
}

void add_recover(Context& ctx) {
  auto* recover = ctx.root.add_subcommand("recover", "Sequence recovery benchmark");
  recover->require_subcommand(1);
  {
    struct Opts {
      GenomeInputs inputs;
      RecoveryDatasetConfig config;
      std::string anchor = "gene-start";
      std::size_t min_length = 8;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = recover->add_subcommand("build", "Sample (prompt, reference) pairs from annotated genomes");
    o->inputs.add_options(app);
    app->add_option("--prompt-len", o->config.prompt_len, "Prompt length in nucleotides");
    app->add_option("--predict-len", o->config.predict_len, "Reference length in nucleotides");
    app->add_option("--per-group", o->config.per_group_n, "Items per taxon group");
    app->add_option("--anchor", o->anchor, "Where the continuation starts")->check(CLI::IsMember({"gene-start", "random"}));
    app->add_option("--min-length", o->min_length, "Drop N-free pieces shorter than this");
    app->add_option("--out", o->out, "Dataset TSV (default stdout)");
    ctx.registry.add(app, [&ctx, app, o] {
      const auto g = o->inputs.load();
      const auto regions = extract_functional_regions(g.contigs, g.annotations, {o->min_length, ctx.threads()});
      auto cfg = o->config;
      cfg.seed = ctx.globals.seed;
      cfg.anchor = o->anchor == "random" ? RecoveryAnchor::Random : RecoveryAnchor::GeneStart;
      const auto items = build_recovery_dataset(regions, g.contigs, cfg);
      Output out(o->out);
      write_metadata(out.stream(), ctx.root, app);
      write_recovery_dataset(out.stream(), items);
      out.close();
      std::cerr << "recover build: " << items.size() << " items\n";
    });
  }
  {
    struct Opts {
      std::string dataset;
      std::string model;
      std::string tokenizer = "kmer:6";
      std::vector<std::size_t> predict_lens = {30};
      SamplerOpts sampler;
      bool mlm = false;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = recover->add_subcommand("run", "Score a model on a recovery dataset");
    auto* ds_opt = app->add_option("--dataset", o->dataset, "Dataset TSV from 'recover build'");
    auto* model_opt = app->add_option("--model", o->model, "Model: .gmlm path, 'uniform', exec:CMD or tcp:HOST:PORT");
    app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec or JSON path");
    app->add_option("--predict-lens", o->predict_lens, "Scored continuation lengths")->delimiter(',');
    o->sampler.add(app, true);
    app->add_flag("--mlm", o->mlm, "Decode through the masked-model sequential protocol");
    app->add_option("--out", o->out, "Report TSV (default stdout)");
    app->add_flag("--json", o->json, "JSON report");
    ctx.registry.add(app, [&ctx, app, o, ds_opt, model_opt] {
      require(ds_opt);
      require(model_opt);
      const auto tok = make_tokenizer(o->tokenizer);
      const auto lm = load_model(o->model, *tok);
      require_same_vocabulary(lm->vocabulary(), tok->vocabulary());
      std::ifstream in(o->dataset);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + o->dataset);
      const auto items = read_recovery_dataset(in);
      RecoveryRunConfig cfg;
      cfg.predict_lens = o->predict_lens;
      cfg.sampler = o->sampler.config(ctx.globals.seed, true);
      cfg.sampler.validate();
      cfg.threads = ctx.threads();
      const auto report = o->mlm ? run_recovery(CausalAsMaskedLm(*lm), *tok, items, cfg) : run_recovery(*lm, *tok, items, cfg);
      Output out(o->out);
      if (o->json) {
        auto j = nlohmann::json::parse(recovery_report_json(report));
        j["config"] = effective_config(ctx.root, app);
        print_json(out.stream(), j);
      } else {
        write_metadata(out.stream(), ctx.root, app);
        write_recovery_report_tsv(out.stream(), report);
      }
      out.close();
    });
  }
}

void add_bridge_serve(Context& ctx) {
  struct Opts {
    std::string model;
    std::string tokenizer = "kmer:6";
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("bridge-serve", "Serve a model over the JSON-lines bridge protocol on stdin/stdout");
  auto* model_opt = app->add_option("--model", o->model, "Model: .gmlm path or 'uniform'");
  app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec or JSON path (for 'uniform')");
  ctx.registry.add(app, [o, model_opt] {
    require(model_opt);
    const auto tok = make_tokenizer(o->tokenizer);
    const auto lm = load_model(o->model, *tok);
    serve_bridge(*lm, std::cin, std::cout);
  });
}

}  // namespace

void register_model_commands(Context& ctx) {
  add_train_markov(ctx);
  add_generate(ctx);
  add_recover(ctx);
  add_bridge_serve(ctx);
}

}  // namespace genolm::cli
