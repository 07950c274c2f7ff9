#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "genolm/bridge.hpp"
#include "genolm/error.hpp"
#include "genolm/parallel.hpp"

namespace genolm::cli {

const std::function<void()>* Registry::selected(CLI::App** app) const {
  const Entry* best = nullptr;
  int best_depth = -1;
  for (const auto& e : entries_) {
    if (!e.app->parsed()) continue;
    int depth = 0;
    for (auto* p = e.app; p->get_parent() != nullptr; p = p->get_parent()) ++depth;
    if (depth > best_depth) {
      best = &e;
      best_depth = depth;
    }
  }
  if (best == nullptr) return nullptr;
  *app = best->app;
  return &best->body;
}

unsigned Context::threads() const { return globals.threads > 0 ? globals.threads : default_threads(); }

void require(CLI::Option* opt) {
  if (opt->count() == 0) throw UsageError(opt->get_name() + " is required");
}

namespace {

std::vector<const CLI::App*> chain(const CLI::App& root, const CLI::App* leaf) {
  std::vector<const CLI::App*> apps;
  for (auto* a = leaf; a != nullptr && a != &root; a = a->get_parent()) apps.push_back(a);
  apps.push_back(&root);
  std::reverse(apps.begin(), apps.end());
  return apps;
}

std::string option_key(const CLI::Option* opt) {
  if (!opt->get_lnames().empty()) return opt->get_lnames().front();
  if (opt->get_positional()) return opt->get_name();
  return {};
}

std::string joined(const std::vector<std::string>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += v;
  }
  return out;
}

}  // namespace

nlohmann::json effective_config(const CLI::App& root, const CLI::App* leaf) {
  nlohmann::json config = nlohmann::json::object();
  std::string command;
  for (const auto* app : chain(root, leaf)) {
    if (app != &root) command += (command.empty() ? "" : " ") + app->get_name();
    for (const auto* opt : app->get_options()) {
      const std::string key = option_key(opt);
      if (key.empty() || key == "help" || key == "help-all" || key == "version") continue;
      std::string value = opt->count() > 0 ? joined(opt->results()) : opt->get_default_str();
      if (opt->get_expected_max() == 0 && opt->count() == 0) value = "false";
      config[key] = value;
    }
  }
  config["command"] = command;
  return config;
}

void apply_config_file(const std::string& path, CLI::App& root, CLI::App* leaf) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  const auto apps = chain(root, leaf);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    CLI::Option* target = nullptr;
    for (auto it = apps.rbegin(); it != apps.rend() && target == nullptr; ++it) {
      target = const_cast<CLI::App*>(*it)->get_option_no_throw("--" + key);
    }
    if (target == nullptr) {
      std::cerr << "warning: " << path << ":" << line_no << ": '" << key << "' does not apply here; ignored\n";
      continue;
    }
    if (target->count() > 0) continue;  // the command line wins
    target->add_result(value);
    target->run_callback();
  }
}

Output::Output(const std::string& path) : path_(path) {
  if (path.empty() || path == "-") return;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw Error(ErrorCode::Io, "cannot write " + path);
  file_ = std::move(f);
}

std::ostream& Output::stream() { return file_ ? *file_ : std::cout; }

void Output::close() {
  stream().flush();
  if (!stream()) throw Error(ErrorCode::Io, "write failed: " + (path_.empty() ? std::string("stdout") : path_));
  file_.reset();
}

std::vector<NucleotideSequence> read_sequences(const std::string& path) {
  if (path == "-") return read_fasta(std::cin);
  return read_fasta_file(path);
}

std::unique_ptr<CausalLm> load_model(const std::string& spec, const Tokenizer& tokenizer) {
  if (spec == "uniform") return std::make_unique<UniformLm>(tokenizer.vocabulary());
  if (spec.rfind("exec:", 0) == 0 || spec.rfind("tcp:", 0) == 0) return bridge_model(spec);
  return std::make_unique<MarkovLm>(MarkovLm::load(spec));
}

void GenomeInputs::add_options(CLI::App* app) {
  app->add_option("--genbank", genbank, "GenBank flat file(s)")->delimiter(',');
  app->add_option("--fasta", fasta, "Genome FASTA (with --annotations)");
  app->add_option("--annotations", annotations, "BED-like table: seq_id, start, end, strand, feature[, taxon] (0-based, half-open)");
  app->add_option("--taxon", taxon, "Taxon group for GenBank input when the lineage is not decisive");
}

AnnotatedGenome GenomeInputs::load() const {
  AnnotatedGenome out;
  if (!genbank.empty() && !fasta.empty()) throw UsageError("use either --genbank or --fasta/--annotations");
  std::optional<TaxonGroup> forced;
  if (!taxon.empty()) {
    forced = parse_taxon_group(taxon);
    if (!forced) throw UsageError("unknown taxon group '" + taxon + "'");
  }
  if (!genbank.empty()) {
    for (const auto& path : genbank) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
      for (auto& entry : parse_genbank(in, forced)) {
        out.contigs.push_back(std::move(entry.sequence));
        out.annotations.insert(out.annotations.end(), entry.genes.begin(), entry.genes.end());
      }
    }
    return out;
  }
  if (fasta.empty() || annotations.empty()) throw UsageError("need --genbank, or both --fasta and --annotations");
  out.contigs = read_sequences(fasta);
  std::ifstream in(annotations);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + annotations);
  out.annotations = parse_bed_like(in);
  return out;
}

}  // namespace genolm::cli

namespace genolm::cli {

std::vector<std::string> n_free_pieces(std::string_view bases, std::size_t min_length) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= bases.size(); ++i) {
    if (i == bases.size() || base_index(bases[i]) < 0) {
      if (i - start >= std::max<std::size_t>(min_length, 1)) out.emplace_back(bases.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

void print_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

void write_metadata(std::ostream& out, const CLI::App& root, const CLI::App* leaf) {
  out << "##genolm " << effective_config(root, leaf).dump() << '\n';
}

}  // namespace genolm::cli
