// vep, design, embed
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "genolm/analytics.hpp"
#include "genolm/design.hpp"
#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/sample.hpp"
#include "genolm/vep.hpp"

namespace genolm::cli {

namespace {

void add_vep(Context& ctx) {
  auto* vep = ctx.root.add_subcommand("vep", "Variant effect prediction");
  vep->require_subcommand(1);
  {
    struct Opts {
      std::string genome;
      std::string variants;
      std::string model;
      std::string tokenizer = "kmer:6";
      std::string mode = "causal";
      VepOptions options;
      std::string out;
      std::string metrics;
    };
    auto o = std::make_shared<Opts>();
    auto* app = vep->add_subcommand("score", "Log-likelihood-ratio scores for variants");
    auto* g_opt = app->add_option("--genome", o->genome, "Reference FASTA");
    auto* v_opt = app->add_option("--variants", o->variants, "TSV: seq_id, pos (1-based), ref, alt[, label]");
    auto* m_opt = app->add_option("--model", o->model, "Model: .gmlm path, 'uniform', exec:CMD or tcp:HOST:PORT");
    app->add_option("--tokenizer", o->tokenizer, "Tokenizer spec or JSON path");
    app->add_option("--mode", o->mode, "causal: left context only; mlm: masked token with both flanks")
        ->check(CLI::IsMember({"causal", "mlm"}));
    app->add_option("--phase", o->options.phase, "Offset of the variant in the predicted token (-1 = k-1)");
    app->add_flag("--average-phases", o->options.average_phases, "Average the score over all token alignments");
    app->add_option("--context", o->options.context_nt, "Causal mode: nucleotides of left context");
    app->add_option("--window", o->options.window_nt, "Masked mode: total flank nucleotides");
    app->add_option("--out", o->out, "Score TSV (default stdout)");
    app->add_option("--metrics", o->metrics, "Also write AUROC/AUPRC JSON here when labels allow");
    ctx.registry.add(app, [&ctx, app, o, g_opt, v_opt, m_opt] {
      require(g_opt);
      require(v_opt);
      require(m_opt);
      const auto tok = make_tokenizer(o->tokenizer);
      const auto lm = load_model(o->model, *tok);
      const Genome genome = make_genome(read_sequences(o->genome));
      const auto variants = read_variants_file(o->variants);
      auto opts = o->options;
      opts.mode = o->mode == "mlm" ? VepMode::Mlm : VepMode::Causal;
      opts.threads = ctx.threads();
      const CausalAsMaskedLm mlm(*lm);
      const auto results = score_variants(lm.get(), &mlm, *tok, genome, variants, opts);
      Output out(o->out);
      write_metadata(out.stream(), ctx.root, app);
      write_vep_tsv(out.stream(), variants, results);
      out.close();
      const auto truncated = std::count_if(results.begin(), results.end(), [](const VepResult& r) { return r.truncated; });
      if (truncated > 0) std::cerr << "vep score: " << truncated << " variant(s) scored with a truncated window\n";
      if (!o->metrics.empty()) {
        std::vector<double> scores;
        std::vector<bool> labels;
        for (std::size_t n = 0; n < variants.size(); ++n) {
          if (!variants[n].pathogenic) continue;
          scores.push_back(results[n].score);
          labels.push_back(*variants[n].pathogenic);
        }
        auto j = vep_metrics_json(evaluate_vep(scores, labels));
        j["config"] = effective_config(ctx.root, app);
        j["truncated"] = truncated;
        Output m(o->metrics);
        print_json(m.stream(), j);
        m.close();
      }
    });
  }
  {
    struct Opts {
      std::string scores;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = vep->add_subcommand("eval", "AUROC/AUPRC of a labeled score table");
    auto* s_opt = app->add_option("--scores", o->scores, "TSV from 'vep score'");
    app->add_option("--out", o->out, "JSON output (default stdout)");
    ctx.registry.add(app, [&ctx, app, o, s_opt] {
      require(s_opt);
      std::ifstream in(o->scores);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + o->scores);
      std::vector<double> scores;
      std::vector<bool> labels;
      read_vep_tsv(in, scores, labels);
      auto j = vep_metrics_json(evaluate_vep(scores, labels));
      j["config"] = effective_config(ctx.root, app);
      Output out(o->out);
      print_json(out.stream(), j);
      out.close();
    });
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void add_design(Context& ctx) {
  auto* design = ctx.root.add_subcommand("design", "Cis-regulatory element design");
  design->require_subcommand(1);
  {
    struct Opts {
      std::string in;
      std::string head;
      std::string split;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = design->add_subcommand("label", "Quartile activity labels (low / mid / high)");
    auto* in_opt = app->add_option("--in", o->in, "TSV: sequence, dev_activity, hk_activity[, split]");
    auto* head_opt = app->add_option("--head", o->head, "Activity column")->check(CLI::IsMember({"dev", "hk"}));
    app->add_option("--split", o->split, "Keep only rows of this split");
    app->add_option("--out", o->out, "TSV output (default stdout)");
    app->add_flag("--json", o->json, "JSON output");
    ctx.registry.add(app, [&ctx, app, o, in_opt, head_opt] {
      require(in_opt);
      require(head_opt);
      const auto records = activity_records(read_starr_tsv_file(o->in), parse_promoter_class(o->head), o->split);
      std::vector<double> acts;
      for (const auto& r : records) acts.push_back(r.activity);
      const auto q = activity_quartiles(acts);
      const auto labels = quantile_labels(acts);
      Output out(o->out);
      if (o->json) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t n = 0; n < records.size(); ++n) {
          rows.push_back({{"sequence", records[n].sequence.bases()}, {"activity", acts[n]}, {"label", to_string(labels[n])}});
        }
        print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"q25", q.q25}, {"q75", q.q75}, {"records", rows}});
      } else {
        write_metadata(out.stream(), ctx.root, app);
        out.stream() << "#sequence\tactivity\tlabel\n";
        for (std::size_t n = 0; n < records.size(); ++n) {
          out.stream() << records[n].sequence.bases() << '\t' << fmt(acts[n]) << '\t' << to_string(labels[n]) << '\n';
        }
      }
      out.close();
    });
  }
  {
    struct Opts {
      std::string in;
      std::string head;
      std::string split;
      int k = 5;
      double mu = 1.0;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* app = design->add_subcommand("fit", "Fit the k-mer ridge activity predictor");
    auto* in_opt = app->add_option("--in", o->in, "TSV: sequence, dev_activity, hk_activity[, split]");
    auto* head_opt = app->add_option("--head", o->head, "Activity column")->check(CLI::IsMember({"dev", "hk"}));
    app->add_option("--split", o->split, "Train on rows of this split only");
    app->add_option("--k", o->k, "k-mer length")->check(CLI::Range(1, 8));
    app->add_option("--mu", o->mu, "L2 strength (>= 0)");
    auto* out_opt = app->add_option("--out", o->out, "Predictor JSON path");
    ctx.registry.add(app, [&ctx, app, o, in_opt, head_opt, out_opt] {
      require(in_opt);
      require(head_opt);
      require(out_opt);
      const auto records = activity_records(read_starr_tsv_file(o->in), parse_promoter_class(o->head), o->split);
      const auto model = fit_kmer_ridge(records, o->k, o->mu);
      model.save(o->out);
      std::vector<double> y, yhat;
      double sse = 0.0;
      for (const auto& r : records) {
        y.push_back(r.activity);
        yhat.push_back(model.predict(r.sequence.view()));
        sse += (y.back() - yhat.back()) * (y.back() - yhat.back());
      }
      nlohmann::json j = {{"config", effective_config(ctx.root, app)}, {"n", records.size()}, {"train_mse", sse / static_cast<double>(records.size())}};
      try {
        j["train_pearson"] = pearson_r(y, yhat);
      } catch (const Error&) {
        j["train_pearson"] = nullptr;
      }
      print_json(std::cout, j);
    });
  }
  {
    struct Opts {
      std::string predictor;
      std::string candidates;
      SelectionPlan plan;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = design->add_subcommand("rank", "Predictor-guided selection of generated candidates");
    auto* p_opt = app->add_option("--predictor", o->predictor, "Predictor JSON from 'design fit'");
    auto* c_opt = app->add_option("--candidates", o->candidates, "FASTA; the group comes from a 'prefix=' header field");
    app->add_option("--top", o->plan.top, "Highest-scoring picks from --top-group");
    app->add_option("--bottom", o->plan.bottom, "Lowest-scoring picks from --bottom-group");
    app->add_option("--random", o->plan.random, "Seeded random picks from --random-group");
    app->add_option("--top-group", o->plan.top_group, "Pool for top picks ('*' = all)");
    app->add_option("--bottom-group", o->plan.bottom_group, "Pool for bottom picks ('*' = all)");
    app->add_option("--random-group", o->plan.random_group, "Pool for random picks ('*' = all)");
    app->add_option("--out", o->out, "Oligo FASTA (default stdout)");
    app->add_flag("--json", o->json, "JSON report instead of FASTA");
    ctx.registry.add(app, [&ctx, app, o, p_opt, c_opt] {
      require(p_opt);
      require(c_opt);
      const auto model = KmerRidgePredictor::load(o->predictor);
      std::vector<Candidate> cands;
      for (const auto& rec : read_sequences(o->candidates)) {
        std::string group;
        if (const auto it = rec.meta().find("description"); it != rec.meta().end()) {
          std::stringstream ss(it->second);
          std::string field;
          while (ss >> field) {
            if (field.rfind("prefix=", 0) == 0) group = field.substr(7);
          }
        }
        cands.push_back({rec.id(), rec.bases(), group});
      }
      auto plan = o->plan;
      plan.seed = ctx.globals.seed;
      plan.threads = ctx.threads();
      const auto report = rank_and_select(model, cands, plan);
      Output out(o->out);
      if (o->json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& s : report.selected) {
          rows.push_back({{"id", s.id}, {"pick", s.pick}, {"rank", s.rank}, {"group", s.group}, {"predicted", s.predicted}, {"sequence", s.sequence}});
        }
        print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"candidates", report.candidates}, {"selected", rows}});
      } else {
        write_selection_fasta(out.stream(), report);
      }
      out.close();
    });
  }
  {
    struct Opts {
      std::string predictor;
      std::string head;
      std::string sequence;
      std::string in;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = design->add_subcommand("contrib", "Per-base contribution scores");
    auto* p_opt = app->add_option("--predictor", o->predictor, "Predictor JSON from 'design fit'");
    auto* head_opt = app->add_option("--head", o->head, "Head the predictor was fit on (must be given)")
                         ->check(CLI::IsMember({"dev", "hk"}));
    app->add_option("--sequence", o->sequence, "Sequence to score");
    app->add_option("--in", o->in, "FASTA of sequences to score");
    app->add_option("--out", o->out, "TSV output (default stdout)");
    app->add_flag("--json", o->json, "JSON output");
    ctx.registry.add(app, [&ctx, app, o, p_opt, head_opt] {
      require(p_opt);
      require(head_opt);
      const auto model = KmerRidgePredictor::load(o->predictor);
      if (!model.head().empty() && model.head() != o->head) {
        throw UsageError("predictor was fit on the " + model.head() + " head, not " + o->head);
      }
      std::vector<NucleotideSequence> seqs;
      if (!o->sequence.empty()) seqs.push_back(NucleotideSequence::validate(o->sequence, "seq"));
      if (!o->in.empty()) {
        auto more = read_sequences(o->in);
        seqs.insert(seqs.end(), more.begin(), more.end());
      }
      if (seqs.empty()) throw UsageError("need --sequence or --in");
      Output out(o->out);
      nlohmann::json rows = nlohmann::json::array();
      if (!o->json) write_metadata(out.stream(), ctx.root, app);
      if (!o->json && seqs.size() > 1) out.stream() << "#id\tpos\tbase\tC\n";
      for (const auto& s : seqs) {
        const auto c = contribution_scores(model, s.view(), ctx.threads());
        if (o->json) {
          nlohmann::json vals = nlohmann::json::array();
          for (const double v : c) vals.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
          rows.push_back({{"id", s.id()}, {"sequence", s.bases()}, {"C", vals}});
        } else if (seqs.size() == 1) {
          write_contribution_tsv(out.stream(), s.view(), c);
        } else {
          for (std::size_t i = 0; i < c.size(); ++i) {
            out.stream() << s.id() << '\t' << i + 1 << '\t' << s[i] << '\t' << (std::isnan(c[i]) ? "NA" : fmt(c[i])) << '\n';
          }
        }
      }
      if (o->json) print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"head", o->head}, {"records", rows}});
      out.close();
    });
  }
}

std::string header_label(const NucleotideSequence& rec, std::size_t field) {
  std::size_t start = 0;
  const std::string& id = rec.id();
  for (std::size_t f = 1; f < field; ++f) {
    start = id.find('|', start);
    if (start == std::string::npos) return {};
    ++start;
  }
  const auto end = id.find('|', start);
  return id.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

void add_embed(Context& ctx) {
  auto* embed = ctx.root.add_subcommand("embed", "Embedding projection and cluster quality");
  embed->require_subcommand(1);
  {
    struct Opts {
      std::string in;
      std::string embeddings;
      std::size_t label_field = 2;
      int k = 4;
      std::string model;
      std::string tokenizer = "kmer:6";
      std::size_t dims = 2;
      std::string embeddings_out;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = embed->add_subcommand("project", "Principal-component projection of sequence embeddings");
    app->add_option("--in", o->in, "FASTA; labels come from '|'-separated header fields");
    app->add_option("--embeddings", o->embeddings, "Precomputed embedding TSV (id, label, v1..vd)");
    app->add_option("--label-field", o->label_field, "1-based '|' field of the header holding the label");
    app->add_option("--k", o->k, "k for composition profiles")->check(CLI::Range(1, 8));
    app->add_option("--model", o->model, "Embed with a model's last-position summary instead of profiles");
    app->add_option("--tokenizer", o->tokenizer, "Tokenizer for --model");
    app->add_option("--dims", o->dims, "Number of components");
    app->add_option("--embeddings-out", o->embeddings_out, "Also write the embeddings TSV here");
    app->add_option("--out", o->out, "Projection TSV (default stdout)");
    app->add_flag("--json", o->json, "JSON output");
    ctx.registry.add(app, [&ctx, app, o] {
      EmbeddingSet set;
      if (!o->embeddings.empty()) {
        std::ifstream in(o->embeddings);
        if (!in) throw Error(ErrorCode::Io, "cannot open " + o->embeddings);
        set = read_embedding_tsv(in);
      } else {
        if (o->in.empty()) throw UsageError("need --in or --embeddings");
        const auto recs = read_sequences(o->in);
        std::vector<std::vector<double>> vecs(recs.size());
        std::unique_ptr<Tokenizer> tok;
        std::unique_ptr<CausalLm> lm;
        if (!o->model.empty()) {
          tok = make_tokenizer(o->tokenizer);
          lm = load_model(o->model, *tok);
          require_same_vocabulary(lm->vocabulary(), tok->vocabulary());
        }
        parallel_for(recs.size(), ctx.threads(), [&](std::size_t n) {
          if (!lm) {
            vecs[n] = profile_embedding(recs[n].view(), o->k);
            return;
          }
          std::vector<TokenId> ids{lm->vocabulary().bos()};
          const auto body = tok->encode(recs[n].view());
          ids.insert(ids.end(), body.begin(), body.end());
          auto v = lm->embed(ids);
          if (!v) throw UsageError("the model does not provide embeddings");
          vecs[n] = std::move(*v);
        });
        for (std::size_t n = 0; n < recs.size(); ++n) {
          const std::string label = header_label(recs[n], o->label_field);
          if (label.empty()) throw Error(ErrorCode::BadRow, recs[n].id() + ": no header field " + std::to_string(o->label_field));
          set.add(vecs[n], label, recs[n].id());
        }
      }
      if (!o->embeddings_out.empty()) {
        Output e(o->embeddings_out);
        write_metadata(e.stream(), ctx.root, app);
        write_embedding_tsv(e.stream(), set);
        e.close();
      }
      PcaOptions popts;
      popts.seed = ctx.globals.seed;
      const auto proj = pca_project(set, o->dims, popts);
      if (proj.rank_deficit > 0) {
        std::cerr << "embed project: covariance rank below " << o->dims << "; " << proj.rank_deficit << " component(s) zero-filled\n";
      }
      Output out(o->out);
      if (o->json) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < set.rows(); ++i) {
          rows.push_back({{"id", set.ids[i]},
                          {"label", set.labels[i]},
                          {"coords", std::vector<double>(proj.coords.begin() + static_cast<std::ptrdiff_t>(i * proj.dims),
                                                         proj.coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * proj.dims))}});
        }
        print_json(out.stream(), {{"config", effective_config(ctx.root, app)},
                                  {"explained_variance", proj.explained_variance},
                                  {"explained_ratio", proj.explained_ratio},
                                  {"rank_deficit", proj.rank_deficit},
                                  {"points", rows}});
      } else {
        write_metadata(out.stream(), ctx.root, app);
        write_projection_tsv(out.stream(), set, proj);
      }
      out.close();
    });
  }
  {
    struct Opts {
      std::string in;
      bool cosine = false;
      std::string out;
      bool json = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = embed->add_subcommand("silhouette", "Mean silhouette of labeled points");
    auto* in_opt = app->add_option("--in", o->in, "Embedding or projection TSV (id, label, values...)");
    app->add_flag("--cosine", o->cosine, "Cosine distance instead of Euclidean");
    app->add_option("--out", o->out, "Output (default stdout)");
    app->add_flag("--json", o->json, "JSON output");
    ctx.registry.add(app, [&ctx, app, o, in_opt] {
      require(in_opt);
      std::ifstream in(o->in);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + o->in);
      const auto set = read_embedding_tsv(in);
      const double s = silhouette(set, o->cosine ? Distance::Cosine : Distance::Euclidean, ctx.threads());
      std::set<std::string> groups(set.labels.begin(), set.labels.end());
      Output out(o->out);
      if (o->json) {
        print_json(out.stream(), {{"config", effective_config(ctx.root, app)}, {"silhouette", s}, {"n", set.rows()}, {"clusters", groups.size()}});
      } else {
        write_metadata(out.stream(), ctx.root, app);
        out.stream() << "#silhouette\tn\tclusters\n" << fmt(s) << '\t' << set.rows() << '\t' << groups.size() << '\n';
      }
      out.close();
    });
  }
}

}  // namespace

void register_eval_commands(Context& ctx) {
  add_vep(ctx);
  add_design(ctx);
  add_embed(ctx);
}

}  // namespace genolm::cli
