// tokenize, bpe-train, ingest, translate
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "genolm/error.hpp"
#include "genolm/rng.hpp"

namespace genolm::cli {

namespace {

std::string join_ids(const std::vector<TokenId>& ids) {
  std::string s;
  for (const auto id : ids) {
    if (!s.empty()) s += ' ';
    s += std::to_string(id);
  }
  return s;
}

void add_tokenize(Context& ctx) {
  struct Opts {
    int k = 6;
    std::string tokenizer;
    int offset = 0;
    bool random_offset = false;
    bool decode = false;
    std::string in;
    std::vector<std::string> inputs;
    std::string out;
    bool json = false;
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("tokenize", "Encode sequences to token ids (or decode ids)");
  app->add_option("--k", o->k, "k-mer length")->check(CLI::Range(1, 8));
  app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec (kmer:K) or saved tokenizer JSON; overrides --k");
  app->add_option("--offset", o->offset, "Phase offset: nucleotides skipped before the first k-mer");
  app->add_flag("--random-offset", o->random_offset, "Draw the offset uniformly in [0,k-1] per record (uses --seed)");
  app->add_flag("--decode", o->decode, "Inputs are space-separated token ids; print nucleotides");
  app->add_option("--in", o->in, "FASTA input ('-' for stdin)");
  app->add_option("inputs", o->inputs, "Sequences (or id lists with --decode)");
  app->add_option("--out", o->out, "Output path (default stdout)");
  app->add_flag("--json", o->json, "JSON output with offsets and residuals");
  ctx.registry.add(app, [&ctx, app, o] {
    auto tok = o->tokenizer.empty() ? make_tokenizer("kmer:" + std::to_string(o->k)) : make_tokenizer(o->tokenizer);
    Output out(o->out);
    nlohmann::json records = nlohmann::json::array();
    if (o->decode) {
      for (const auto& line : o->inputs) {
        std::vector<TokenId> ids;
        std::stringstream ss(line);
        std::string f;
        while (ss >> f) {
          try {
            ids.push_back(static_cast<TokenId>(std::stoul(f)));
          } catch (const std::exception&) {
            throw Error(ErrorCode::UnknownTokenId, "'" + f + "'");
          }
        }
        const std::string bases = tok->decode(ids);
        if (o->json) records.push_back({{"ids", ids}, {"sequence", bases}});
        else out.stream() << bases << '\n';
      }
    } else {
      std::vector<NucleotideSequence> seqs;
      if (!o->in.empty()) seqs = read_sequences(o->in);
      for (std::size_t n = 0; n < o->inputs.size(); ++n) {
        seqs.push_back(NucleotideSequence::validate(o->inputs[n], "arg" + std::to_string(n + 1)));
      }
      if (seqs.empty()) throw UsageError("no input sequences");
      const auto* kmer = dynamic_cast<const KmerTokenizer*>(tok.get());
      if (kmer == nullptr && (o->offset != 0 || o->random_offset)) throw UsageError("offsets apply to k-mer tokenizers only");
      for (std::size_t n = 0; n < seqs.size(); ++n) {
        nlohmann::json rec = {{"id", seqs[n].id()}};
        std::vector<TokenId> ids;
        if (kmer != nullptr) {
          KmerSpec spec{kmer->k(), FixedOffset{o->offset}};
          if (o->random_offset) spec.offset_policy = RandomOffset{Rng::for_job(ctx.globals.seed, n).next()};
          auto enc = kmer->encode(seqs[n], spec);
          rec["offset"] = enc.offset_used;
          rec["head"] = enc.head;
          rec["tail"] = enc.tail;
          ids = std::move(enc.ids);
        } else {
          ids = tok->encode(seqs[n].view());
        }
        if (o->json) {
          rec["ids"] = ids;
          records.push_back(std::move(rec));
        } else {
          out.stream() << join_ids(ids) << '\n';
        }
      }
    }
    if (o->json) {
      print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"tokenizer", tok->describe()}, {"records", records}});
    }
    out.close();
  });
}

void add_bpe_train(Context& ctx) {
  struct Opts {
    std::vector<std::string> in;
    std::size_t vocab_size = 0;
    std::size_t max_sample_nt = 0;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("bpe-train", "Train a BPE tokenizer on FASTA sequences");
  auto* in = app->add_option("--in", o->in, "Corpus FASTA file(s)")->delimiter(',');
  auto* vs = app->add_option("--vocab-size", o->vocab_size, "Target vocabulary size, specials included (>= 36)");
  app->add_option("--max-sample-nt", o->max_sample_nt, "Count pairs on a seeded subset of about this many nucleotides (0 = all)");
  app->add_option("--out", o->out, "Tokenizer JSON path (default stdout)");
  ctx.registry.add(app, [&ctx, o, in, vs] {
    require(in);
    require(vs);
    std::vector<NucleotideSequence> corpus;
    for (const auto& path : o->in) {
      for (const auto& rec : read_sequences(path)) {
        for (auto& piece : n_free_pieces(rec.view())) corpus.push_back(NucleotideSequence::trusted(std::move(piece)));
      }
    }
    BpeTrainOptions opts;
    opts.max_sample_nt = o->max_sample_nt;
    const BpeTokenizer tok(bpe_train(corpus, o->vocab_size, ctx.globals.seed, opts));
    Output out(o->out);
    out.stream() << tokenizer_json(tok) << '\n';
    out.close();
    std::cerr << "bpe-train: " << tok.vocabulary().size() << " tokens (" << tok.model().merges.size() << " merges)\n";
  });
}

void add_ingest(Context& ctx) {
  auto* ingest = ctx.root.add_subcommand("ingest", "Annotated genome ingestion");
  ingest->require_subcommand(1);

  {
    struct Opts {
      GenomeInputs inputs;
      std::size_t min_length = 8;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = ingest->add_subcommand("extract", "Write the functional-region corpus as FASTA");
    o->inputs.add_options(app);
    app->add_option("--min-length", o->min_length, "Drop N-free pieces shorter than this");
    app->add_option("--out", o->out, "FASTA output (default stdout)");
    ctx.registry.add(app, [&ctx, o] {
      const auto g = o->inputs.load();
      const auto regions = extract_functional_regions(g.contigs, g.annotations, {o->min_length, ctx.threads()});
      Output out(o->out);
      write_corpus_fasta(out.stream(), regions);
      out.close();
      std::cerr << "ingest extract: " << regions.size() << " regions\n";
    });
  }
  {
    struct Opts {
      GenomeInputs inputs;
      std::size_t min_length = 8;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = ingest->add_subcommand("stats", "Gene and nucleotide counts per taxon group and feature type");
    o->inputs.add_options(app);
    app->add_option("--min-length", o->min_length, "Drop N-free pieces shorter than this");
    app->add_option("--out", o->out, "TSV output (default stdout)");
    app->add_flag("--json", o->json, "JSON output");
    ctx.registry.add(app, [&ctx, app, o] {
      const auto g = o->inputs.load();
      const auto stats = corpus_stats(extract_functional_regions(g.contigs, g.annotations, {o->min_length, ctx.threads()}));
      Output out(o->out);
      if (o->json) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& [key, cell] : stats.cells) {
          cells.push_back({{"taxon", key.first}, {"feature", key.second}, {"genes", cell.genes}, {"nucleotides", cell.nucleotides}});
        }
        const auto t = stats.total();
        print_json(out.stream(), {{"config", effective_config(ctx.root, app)},
                                  {"cells", cells},
                                  {"total", {{"genes", t.genes}, {"nucleotides", t.nucleotides}}}});
      } else {
        write_metadata(out.stream(), ctx.root, app);
        write_stats_tsv(out.stream(), stats);
      }
      out.close();
    });
  }
  {
    struct Opts {
      GenomeInputs inputs;
      GeneTaskConfig gene;
      TaxonTaskConfig taxon;
      std::string gene_out = "gene_classification.tsv";
      std::string taxon_out = "taxonomic_classification.tsv";
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = ingest->add_subcommand("gener-tasks", "Build gene and taxonomic classification datasets");
    o->inputs.add_options(app);
    app->add_option("--per-class", o->gene.per_class, "Gene-classification items per class");
    app->add_option("--min-length", o->gene.min_length, "Minimum gene length");
    app->add_option("--max-length", o->gene.max_length, "Maximum gene length");
    app->add_option("--control-margin", o->gene.control_margin, "Distance kept between control windows and genes");
    app->add_flag("!--no-control", o->gene.include_control, "Omit the intergenic control class");
    app->add_option("--per-group", o->taxon.per_group, "Taxonomic-classification items per group");
    app->add_option("--window", o->taxon.window, "Taxonomic window length");
    app->add_option("--gene-out", o->gene_out, "Gene classification TSV");
    app->add_option("--taxon-out", o->taxon_out, "Taxonomic classification TSV");
    app->add_flag("--json", o->json, "Print a JSON summary");
    ctx.registry.add(app, [&ctx, app, o] {
      const auto g = o->inputs.load();
      const auto regions = extract_functional_regions(g.contigs, g.annotations, {8, ctx.threads()});
      const auto ds = build_gener_task_datasets(regions, g.contigs, g.annotations, o->gene, o->taxon, ctx.globals.seed);
      {
        Output out(o->gene_out);
        write_metadata(out.stream(), ctx.root, app);
        write_labeled_tsv(out.stream(), ds.gene_classification);
        out.close();
      }
      {
        Output out(o->taxon_out);
        write_metadata(out.stream(), ctx.root, app);
        write_labeled_tsv(out.stream(), ds.taxonomic_classification);
        out.close();
      }
      for (const auto& [group, n] : ds.contigs_too_short_by_group) {
        std::cerr << "gener-tasks: " << n << " " << group << " contig(s) shorter than the window were skipped\n";
      }
      if (o->json) {
        print_json(std::cout, {{"config", effective_config(ctx.root, app)},
                               {"gene_items", ds.gene_classification.size()},
                               {"taxon_items", ds.taxonomic_classification.size()},
                               {"contigs_too_short", ds.contigs_too_short}});
      }
    });
  }
}

void add_translate(Context& ctx) {
  struct Opts {
    std::string in;
    std::vector<std::string> inputs;
    int frame = 0;
    int table = 1;
    std::string out;
    bool json = false;
  };
  auto o = std::make_shared<Opts>();
  auto* app = ctx.root.add_subcommand("translate", "Translate sequences and check protein validity");
  app->add_option("--in", o->in, "FASTA input ('-' for stdin)");
  app->add_option("inputs", o->inputs, "Sequences");
  app->add_option("--frame", o->frame, "Reading frame")->check(CLI::Range(0, 2));
  app->add_option("--table", o->table, "NCBI genetic code id");
  app->add_option("--out", o->out, "TSV output (default stdout)");
  app->add_flag("--json", o->json, "JSON output");
  ctx.registry.add(app, [&ctx, app, o] {
    std::vector<NucleotideSequence> seqs;
    if (!o->in.empty()) seqs = read_sequences(o->in);
    for (std::size_t n = 0; n < o->inputs.size(); ++n) {
      seqs.push_back(NucleotideSequence::validate(o->inputs[n], "arg" + std::to_string(n + 1)));
    }
    if (seqs.empty()) throw UsageError("no input sequences");
    const auto& code = genetic_code(o->table);
    Output out(o->out);
    nlohmann::json rows = nlohmann::json::array();
    if (!o->json) write_metadata(out.stream(), ctx.root, app);
    if (!o->json) out.stream() << "#id\tprotein\tcomplete\tpremature_stop\tstarts_with_met\n";
    for (const auto& s : seqs) {
      const auto r = translate(s, o->frame, code);
      if (o->json) {
        rows.push_back({{"id", s.id()},
                        {"protein", r.protein.residues()},
                        {"complete", r.complete},
                        {"premature_stop", r.premature_stop},
                        {"starts_with_met", r.starts_with_met}});
      } else {
        out.stream() << s.id() << '\t' << r.protein.residues() << '\t' << r.complete << '\t' << r.premature_stop << '\t'
                     << r.starts_with_met << '\n';
      }
    }
    if (o->json) print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"records", rows}});
    out.close();
  });
}

}  // namespace

void register_data_commands(Context& ctx) {
  add_tokenize(ctx);
  add_bpe_train(ctx);
  add_ingest(ctx);
  add_translate(ctx);
}

}  // namespace genolm::cli
