#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "genolm/ingest.hpp"
#include "genolm/lm.hpp"
#include "genolm/tokenize.hpp"

namespace genolm::cli {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string config;
};

/// Subcommands register a body here; main runs the one that was selected
/// once the config file has been folded in.
class Registry {
 public:
  void add(CLI::App* app, std::function<void()> body) { entries_.push_back({app, std::move(body)}); }
  /// The deepest parsed subcommand that has a body, or null.
  const std::function<void()>* selected(CLI::App** app) const;

 private:
  struct Entry {
    CLI::App* app;
    std::function<void()> body;
  };
  std::vector<Entry> entries_;
};

struct Context {
  CLI::App& root;
  Globals& globals;
  Registry& registry;

  unsigned threads() const;
};

/// Thrown for usage problems discovered after parsing (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(CLI::Option* opt);

/// Effective values of the root options and every option on the path to `leaf`.
nlohmann::json effective_config(const CLI::App& root, const CLI::App* leaf);

/// Folds flat key=value lines into options not given on the command line.
void apply_config_file(const std::string& path, CLI::App& root, CLI::App* leaf);

/// stdout for "" or "-", otherwise the file (truncated).
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream();
  void close();

 private:
  std::unique_ptr<std::ostream> file_;
  std::string path_;
};

std::vector<NucleotideSequence> read_sequences(const std::string& path);

std::unique_ptr<CausalLm> load_model(const std::string& spec, const Tokenizer& tokenizer);

/// GenBank files, or FASTA plus a BED-like annotation table.
struct AnnotatedGenome {
  std::vector<NucleotideSequence> contigs;
  std::vector<AnnotationRecord> annotations;
};

struct GenomeInputs {
  std::vector<std::string> genbank;
  std::string fasta;
  std::string annotations;
  std::string taxon;

  void add_options(CLI::App* app);
  AnnotatedGenome load() const;
};

void register_data_commands(Context& ctx);
void register_model_commands(Context& ctx);
void register_eval_commands(Context& ctx);

}  // namespace genolm::cli

namespace genolm::cli {

/// Maximal N-free stretches of at least `min_length` bases.
std::vector<std::string> n_free_pieces(std::string_view bases, std::size_t min_length = 1);

void print_json(std::ostream& out, const nlohmann::json& j);

/// One "##genolm {config}" comment line for the top of table outputs.
void write_metadata(std::ostream& out, const CLI::App& root, const CLI::App* leaf);

}  // namespace genolm::cli
