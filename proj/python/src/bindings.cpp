#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "genolm/analytics.hpp"
#include "genolm/design.hpp"
#include "genolm/error.hpp"
#include "genolm/ingest.hpp"
#include "genolm/lm.hpp"
#include "genolm/recover.hpp"
#include "genolm/sample.hpp"
#include "genolm/seqcore.hpp"
#include "genolm/tokenize.hpp"
#include "genolm/vep.hpp"

namespace py = pybind11;
using namespace genolm;

namespace {

SamplerConfig sampler(double temperature, double top_p, std::size_t max_new_tokens, std::uint64_t seed, bool greedy) {
  SamplerConfig c;
  c.temperature = temperature;
  c.top_p = top_p;
  c.max_new_tokens = max_new_tokens;
  c.seed = seed;
  c.mode = greedy ? DecodeMode::Greedy : DecodeMode::Sample;
  return c;
}

EmbeddingSet embedding_set(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels) {
  if (rows.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "rows and labels differ in length");
  EmbeddingSet set;
  set.dim = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != set.dim) throw Error(ErrorCode::InvalidArgument, "ragged embedding rows");
    set.add(rows[i], labels[i]);
  }
  return set;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "genolm core: tokenizers, n-gram models, sampling, VEP, design and analytics";

  static py::exception<Error> error(m, "GenolmError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  // ------------------------------------------------------------ tokenizers
  py::class_<Tokenizer, std::shared_ptr<Tokenizer>>(m, "Tokenizer")
      .def("encode", &Tokenizer::encode, py::arg("bases"))
      .def("decode", [](const Tokenizer& t, const std::vector<TokenId>& ids) { return t.decode(ids); })
      .def("describe", &Tokenizer::describe)
      .def_property_readonly("vocab_size", [](const Tokenizer& t) { return t.vocabulary().size(); })
      .def_property_readonly("tokens", [](const Tokenizer& t) { return t.vocabulary().tokens(); })
      .def("token_id", [](const Tokenizer& t, const std::string& tok) { return t.vocabulary().id_of(tok); })
      .def("save", [](const Tokenizer& t, const std::string& path) { save_tokenizer(t, path); });

  py::class_<KmerTokenizer, Tokenizer, std::shared_ptr<KmerTokenizer>>(m, "KmerTokenizer")
      .def(py::init<int>(), py::arg("k") = 6)
      .def_property_readonly("k", &KmerTokenizer::k)
      .def(
          "encode_with_offset",
          [](const KmerTokenizer& t, const std::string& bases, int offset) {
            auto e = t.encode_with_offset(bases, offset);
            return py::make_tuple(e.ids, e.head, e.tail);
          },
          py::arg("bases"), py::arg("offset"), "Returns (ids, head, tail).");

  py::class_<BpeTokenizer, Tokenizer, std::shared_ptr<BpeTokenizer>>(m, "BpeTokenizer")
      .def_static(
          "train",
          [](const std::vector<std::string>& corpus, std::size_t target_vocab, std::uint64_t seed) {
            std::vector<NucleotideSequence> seqs;
            for (const auto& s : corpus) seqs.push_back(NucleotideSequence::validate(s));
            return std::make_shared<BpeTokenizer>(bpe_train(seqs, target_vocab, seed));
          },
          py::arg("corpus"), py::arg("target_vocab"), py::arg("seed") = 0)
      .def_property_readonly("merges", [](const BpeTokenizer& t) { return t.model().merges; });

  // ---------------------------------------------------------------- models
  py::class_<CausalLm, std::shared_ptr<CausalLm>>(m, "CausalLm")
      .def("next_distribution",
           [](const CausalLm& lm, const std::vector<TokenId>& ctx) { return lm.next_distribution(ctx).probs(); })
      .def("logprob", [](const CausalLm& lm, const std::vector<TokenId>& ids) { return sequence_logprob(lm, ids); })
      .def_property_readonly("vocab_size", [](const CausalLm& lm) { return lm.vocabulary().size(); });

  py::class_<UniformLm, CausalLm, std::shared_ptr<UniformLm>>(m, "UniformLm")
      .def(py::init([](const Tokenizer& t) { return std::make_shared<UniformLm>(t.vocabulary()); }), py::arg("tokenizer"));

  py::class_<MarkovLm, CausalLm, std::shared_ptr<MarkovLm>>(m, "MarkovLm")
      .def_static(
          "train",
          [](const Tokenizer& t, const std::vector<std::vector<TokenId>>& corpus, int order, std::vector<double> alpha,
             std::vector<double> lambda) {
            MarkovConfig c;
            c.order = order;
            c.alpha = std::move(alpha);
            c.lambda = std::move(lambda);
            return std::make_shared<MarkovLm>(MarkovLm::train(t.vocabulary(), corpus, c));
          },
          py::arg("tokenizer"), py::arg("corpus"), py::arg("order") = 2, py::arg("alpha") = std::vector<double>{1.0},
          py::arg("lam") = std::vector<double>{})
      .def_static("load", [](const std::string& path) { return std::make_shared<MarkovLm>(MarkovLm::load(path)); })
      .def("save", [](const MarkovLm& lm, const std::string& path) { lm.save(path); })
      .def_property_readonly("order", &MarkovLm::order);

  // -------------------------------------------------------------- sampling
  m.def(
      "generate",
      [](const CausalLm& lm, const std::vector<TokenId>& prompt, std::size_t max_new_tokens, double temperature,
         double top_p, std::uint64_t seed, bool greedy, std::uint64_t job) {
        py::gil_scoped_release release;
        return generate(lm, prompt, sampler(temperature, top_p, max_new_tokens, seed, greedy), job);
      },
      py::arg("lm"), py::arg("prompt"), py::arg("max_new_tokens") = 64, py::arg("temperature") = 1.0,
      py::arg("top_p") = 1.0, py::arg("seed") = 0, py::arg("greedy") = false, py::arg("job") = 0);

  m.def(
      "conditioned_generate",
      [](const CausalLm& lm, const Tokenizer& tok, const std::string& prefix, std::size_t count,
         std::size_t max_new_tokens, double temperature, double top_p, std::uint64_t seed) {
        ConditionedRequest req;
        req.prefix = prefix;
        req.count = count;
        ConditionedResult res;
        {
          py::gil_scoped_release release;
          res = conditioned_generate(lm, tok, req, sampler(temperature, top_p, max_new_tokens, seed, false));
        }
        std::vector<std::string> out;
        for (const auto& s : res.sequences) out.push_back(s.bases());
        return out;
      },
      py::arg("lm"), py::arg("tokenizer"), py::arg("prefix"), py::arg("count") = 1, py::arg("max_new_tokens") = 64,
      py::arg("temperature") = 1.0, py::arg("top_p") = 1.0, py::arg("seed") = 0);

  m.def("recovery_accuracy", &recovery_accuracy, py::arg("reference"), py::arg("generated"), py::arg("length"));

  // ------------------------------------------------------------------- VEP
  m.def(
      "marginal_nucleotide_prob",
      [](const CausalLm& lm, const Tokenizer& tok, const std::string& context, std::size_t j) {
        const auto mg = marginal_nucleotide_prob(lm, tok, context, j);
        return py::dict(py::arg("A") = mg.probs[0], py::arg("C") = mg.probs[1], py::arg("G") = mg.probs[2],
                        py::arg("T") = mg.probs[3]);
      },
      py::arg("lm"), py::arg("tokenizer"), py::arg("context"), py::arg("j"));

  m.def(
      "vep_score",
      [](const CausalLm& lm, const Tokenizer& tok, const std::map<std::string, std::string>& genome,
         const std::string& seq_id, std::size_t pos, char ref, char alt, int phase, std::size_t context_nt) {
        std::vector<NucleotideSequence> recs;
        for (const auto& [id, bases] : genome) recs.push_back(NucleotideSequence::validate(bases, id));
        VepOptions o;
        o.phase = phase;
        o.context_nt = context_nt;
        const auto r = vep_score(lm, tok, make_genome(std::move(recs)), {seq_id, pos, ref, alt, {}}, o);
        return py::make_tuple(r.score, r.truncated);
      },
      py::arg("lm"), py::arg("tokenizer"), py::arg("genome"), py::arg("seq_id"), py::arg("pos"), py::arg("ref"),
      py::arg("alt"), py::arg("phase") = -1, py::arg("context_nt") = 6144,
      "Returns (score, truncated); pos is 1-based.");

  // ---------------------------------------------------------------- design
  m.def(
      "quantile_labels",
      [](const std::vector<double>& a) {
        std::vector<std::string> out;
        for (const auto l : quantile_labels(a)) out.push_back(to_string(l));
        return out;
      },
      py::arg("activities"));

  py::class_<KmerRidgePredictor>(m, "KmerRidgePredictor")
      .def("predict", &KmerRidgePredictor::predict, py::arg("bases"))
      .def_property_readonly("k", &KmerRidgePredictor::k)
      .def_property_readonly("weights", &KmerRidgePredictor::weights)
      .def_property_readonly("intercept", &KmerRidgePredictor::intercept)
      .def("save", &KmerRidgePredictor::save)
      .def_static("load", &KmerRidgePredictor::load);

  m.def(
      "fit_kmer_ridge",
      [](const std::vector<std::string>& seqs, const std::vector<double>& activity, int k, double mu) {
        if (seqs.size() != activity.size()) throw Error(ErrorCode::InvalidArgument, "sequences and activities differ in length");
        std::vector<ActivityRecord> recs;
        for (std::size_t i = 0; i < seqs.size(); ++i) recs.push_back({NucleotideSequence::validate(seqs[i]), activity[i]});
        return fit_kmer_ridge(recs, k, mu);
      },
      py::arg("sequences"), py::arg("activities"), py::arg("k") = 5, py::arg("mu") = 1.0);

  m.def(
      "contribution_scores",
      [](const KmerRidgePredictor& p, const std::string& bases) { return contribution_scores(p, bases); },
      py::arg("predictor"), py::arg("bases"));

  // ------------------------------------------------------------- analytics
  m.def(
      "mcc", [](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) { return mcc({tp, tn, fp, fn}); },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  m.def(
      "weighted_f1",
      [](const std::vector<int>& truth, const std::vector<int>& pred, std::size_t classes) {
        return weighted_f1(confusion_matrix(truth, pred, classes));
      },
      py::arg("truth"), py::arg("predicted"), py::arg("classes"));
  m.def(
      "pearson_r", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson_r(x, y); }, py::arg("x"),
      py::arg("y"));
  m.def(
      "auroc", [](const std::vector<double>& s, const std::vector<bool>& pos) { return auroc(s, pos); }, py::arg("scores"),
      py::arg("positive"));
  m.def(
      "auprc", [](const std::vector<double>& s, const std::vector<bool>& pos) { return auprc(s, pos); }, py::arg("scores"),
      py::arg("positive"));
  m.def("profile_embedding", &profile_embedding, py::arg("bases"), py::arg("k") = 4);
  m.def(
      "pca_project",
      [](const std::vector<std::vector<double>>& rows, std::size_t dims) {
        const auto set = embedding_set(rows, std::vector<std::string>(rows.size(), ""));
        const auto p = pca_project(set, dims);
        std::vector<std::vector<double>> coords(set.rows(), std::vector<double>(dims));
        for (std::size_t i = 0; i < set.rows(); ++i)
          for (std::size_t c = 0; c < dims; ++c) coords[i][c] = p.coords[i * dims + c];
        return py::make_tuple(coords, p.explained_ratio);
      },
      py::arg("rows"), py::arg("dims") = 2, "Returns (coords, explained_ratio).");
  m.def(
      "silhouette",
      [](const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels, bool cosine) {
        return silhouette(embedding_set(rows, labels), cosine ? Distance::Cosine : Distance::Euclidean);
      },
      py::arg("rows"), py::arg("labels"), py::arg("cosine") = false);

  // ------------------------------------------------------ sequences, ingest
  m.def(
      "translate",
      [](const std::string& bases, int frame) {
        const auto r = translate(NucleotideSequence::validate(bases), frame);
        return py::make_tuple(r.protein.residues(), r.complete, r.premature_stop, r.starts_with_met);
      },
      py::arg("bases"), py::arg("frame") = 0, "Returns (protein, complete, premature_stop, starts_with_met).");

  m.def(
      "parse_genbank",
      [](const std::string& text) {
        std::istringstream in(text);
        py::list out;
        for (const auto& e : parse_genbank(in)) {
          py::list genes;
          for (const auto& g : e.genes) {
            genes.append(py::dict(py::arg("start") = g.start, py::arg("end") = g.end,
                                  py::arg("strand") = std::string(to_string(g.strand)),
                                  py::arg("type") = std::string(to_string(g.feature_type)), py::arg("name") = g.name));
          }
          out.append(py::dict(py::arg("id") = e.sequence.id(), py::arg("sequence") = e.sequence.bases(),
                              py::arg("taxon") = e.taxon_group ? std::string(to_string(*e.taxon_group)) : std::string(),
                              py::arg("genes") = genes));
        }
        return out;
      },
      py::arg("text"), "Parses GenBank text into a list of dicts.");
}
