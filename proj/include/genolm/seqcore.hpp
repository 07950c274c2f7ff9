#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genolm {

/// DNA over {A,C,G,T,N}, always upper case. Immutable once built.
class NucleotideSequence {
 public:
  NucleotideSequence() = default;

  /// Validates and normalizes `raw`: whitespace is dropped, lower case is
  /// folded. Throws InvalidSymbol(position, byte) on anything else.
  static NucleotideSequence validate(std::string_view raw, std::string id = {});

  /// Wraps bases already known to be upper-case ACGTN.
  static NucleotideSequence trusted(std::string bases, std::string id = {});

  const std::string& bases() const noexcept { return bases_; }
  std::string_view view() const noexcept { return bases_; }
  const std::string& id() const noexcept { return id_; }
  std::size_t size() const noexcept { return bases_.size(); }
  bool empty() const noexcept { return bases_.empty(); }
  char operator[](std::size_t i) const noexcept { return bases_[i]; }

  bool has_ambiguous() const noexcept;
  NucleotideSequence subsequence(std::size_t pos, std::size_t len) const;

  const std::map<std::string, std::string>& meta() const noexcept { return meta_; }
  NucleotideSequence with_meta(std::string key, std::string value) const;
  NucleotideSequence with_id(std::string id) const;

  friend bool operator==(const NucleotideSequence& a, const NucleotideSequence& b) {
    return a.bases_ == b.bases_;
  }

 private:
  std::string id_;
  std::string bases_;
  std::map<std::string, std::string> meta_;
};

/// Index of an unambiguous base in A,C,G,T order, or -1.
constexpr int base_index(char c) noexcept {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

inline constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

char complement(char base) noexcept;
NucleotideSequence reverse_complement(const NucleotideSequence& seq);
std::string reverse_complement(std::string_view bases);

/// Amino-acid string over the 20 standard residues plus '*'.
class ProteinSequence {
 public:
  ProteinSequence() = default;
  static ProteinSequence validate(std::string_view residues);
  const std::string& residues() const noexcept { return residues_; }
  std::size_t size() const noexcept { return residues_.size(); }

 private:
  std::string residues_;
};

struct TranslationReport {
  ProteinSequence protein;
  bool complete = false;        // translated span length divisible by 3
  bool premature_stop = false;  // '*' anywhere but the final residue
  bool starts_with_met = false;
};

/// Codon table indexed by 16*b0 + 4*b1 + b2 with bases in T,C,A,G order,
/// the layout NCBI publishes translation tables in.
struct GeneticCode {
  int ncbi_id;
  std::string_view name;
  std::string_view amino_acids;  // 64 residues

  char translate_codon(char b0, char b1, char b2) const;
};

const GeneticCode& standard_code() noexcept;
const GeneticCode& genetic_code(int ncbi_id);

TranslationReport translate(const NucleotideSequence& seq, int frame,
                            const GeneticCode& code = standard_code());

/// FASTA records; the id is the first word of the header and the remainder
/// is kept under meta "description".
std::vector<NucleotideSequence> read_fasta(std::istream& in);
std::vector<NucleotideSequence> read_fasta_file(const std::string& path);
void write_fasta(std::ostream& out, const std::vector<NucleotideSequence>& records,
                 std::size_t width = 60);
void write_fasta_record(std::ostream& out, std::string_view header, std::string_view bases,
                        std::size_t width = 60);

}  // namespace genolm
