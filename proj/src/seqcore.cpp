#include "genolm/seqcore.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "genolm/error.hpp"

namespace genolm {

namespace {

constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY*";

constexpr GeneticCode kStandardCode{
    1, "Standard", "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG"};

// Position of a base in the T,C,A,G order used by NCBI tables.
int tcag_index(char c) noexcept {
  switch (c) {
    case 'T': return 0;
    case 'C': return 1;
    case 'A': return 2;
    case 'G': return 3;
    default: return -1;
  }
}

}  // namespace

NucleotideSequence NucleotideSequence::validate(std::string_view raw, std::string id) {
  NucleotideSequence out;
  out.id_ = std::move(id);
  out.bases_.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) continue;
    const char up = static_cast<char>(std::toupper(c));
    if (up != 'A' && up != 'C' && up != 'G' && up != 'T' && up != 'N') {
      throw Error(ErrorCode::InvalidSymbol,
                  "position " + std::to_string(i) + " byte '" + std::string(1, raw[i]) + "'");
    }
    out.bases_.push_back(up);
  }
  return out;
}

NucleotideSequence NucleotideSequence::trusted(std::string bases, std::string id) {
  NucleotideSequence out;
  out.bases_ = std::move(bases);
  out.id_ = std::move(id);
  return out;
}

bool NucleotideSequence::has_ambiguous() const noexcept {
  return bases_.find('N') != std::string::npos;
}

NucleotideSequence NucleotideSequence::subsequence(std::size_t pos, std::size_t len) const {
  if (pos > bases_.size() || len > bases_.size() - pos) throw Error(ErrorCode::OffsetOutOfRange, "subsequence past end");
  NucleotideSequence out;
  out.bases_ = bases_.substr(pos, len);
  out.id_ = id_;
  out.meta_ = meta_;
  return out;
}

NucleotideSequence NucleotideSequence::with_meta(std::string key, std::string value) const {
  NucleotideSequence out = *this;
  out.meta_[std::move(key)] = std::move(value);
  return out;
}

NucleotideSequence NucleotideSequence::with_id(std::string id) const {
  NucleotideSequence out = *this;
  out.id_ = std::move(id);
  return out;
}

char complement(char base) noexcept {
  switch (base) {
    case 'A': return 'T';
    case 'T': return 'A';
    case 'C': return 'G';
    case 'G': return 'C';
    default: return 'N';
  }
}

std::string reverse_complement(std::string_view bases) {
  std::string out(bases.size(), 'N');
  std::transform(bases.rbegin(), bases.rend(), out.begin(), complement);
  return out;
}

NucleotideSequence reverse_complement(const NucleotideSequence& seq) {
  NucleotideSequence out = NucleotideSequence::trusted(reverse_complement(seq.view()), seq.id());
  for (const auto& [k, v] : seq.meta()) out = out.with_meta(k, v);
  return out;
}

ProteinSequence ProteinSequence::validate(std::string_view residues) {
  ProteinSequence out;
  out.residues_.reserve(residues.size());
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(residues[i])));
    if (kAminoAcids.find(up) == std::string_view::npos) {
      throw Error(ErrorCode::InvalidSymbol,
                  "position " + std::to_string(i) + " residue '" + std::string(1, residues[i]) + "'");
    }
    out.residues_.push_back(up);
  }
  return out;
}

char GeneticCode::translate_codon(char b0, char b1, char b2) const {
  const int i0 = tcag_index(b0), i1 = tcag_index(b1), i2 = tcag_index(b2);
  if (i0 < 0 || i1 < 0 || i2 < 0) throw Error(ErrorCode::AmbiguousBase, "codon contains N");
  return amino_acids[static_cast<std::size_t>(16 * i0 + 4 * i1 + i2)];
}

const GeneticCode& standard_code() noexcept { return kStandardCode; }

const GeneticCode& genetic_code(int ncbi_id) {
  if (ncbi_id == kStandardCode.ncbi_id) return kStandardCode;
  throw Error(ErrorCode::InvalidArgument, "unsupported genetic code " + std::to_string(ncbi_id));
}

TranslationReport translate(const NucleotideSequence& seq, int frame, const GeneticCode& code) {
  if (frame < 0 || frame > 2) throw Error(ErrorCode::InvalidArgument, "frame must be 0, 1 or 2");
  const std::string_view bases = seq.view();
  const std::size_t start = std::min<std::size_t>(static_cast<std::size_t>(frame), bases.size());
  const std::size_t span = bases.size() - start;
  const std::size_t codons = span / 3;

  std::string residues;
  residues.reserve(codons);
  for (std::size_t c = 0; c < codons; ++c) {
    const std::size_t p = start + 3 * c;
    for (std::size_t q = p; q < p + 3; ++q) {
      if (bases[q] == 'N') throw Error(ErrorCode::AmbiguousBase, "position " + std::to_string(q));
    }
    residues.push_back(code.translate_codon(bases[p], bases[p + 1], bases[p + 2]));
  }

  TranslationReport report;
  report.complete = span % 3 == 0;
  const auto stop = residues.find('*');
  report.premature_stop = stop != std::string::npos && stop + 1 < residues.size();
  report.starts_with_met = !residues.empty() && residues.front() == 'M';
  report.protein = ProteinSequence::validate(residues);
  return report;
}

std::vector<NucleotideSequence> read_fasta(std::istream& in) {
  std::vector<NucleotideSequence> records;
  std::string header;
  std::string body;
  bool have = false;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!have) return;
    const auto ws = header.find_first_of(" \t");
    std::string id = header.substr(0, ws);
    NucleotideSequence rec;
    try {
      rec = NucleotideSequence::validate(body, id);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidSymbol, "record '" + id + "': " + e.what());
    }
    if (ws != std::string::npos) {
      const auto rest = header.find_first_not_of(" \t", ws);
      if (rest != std::string::npos) rec = rec.with_meta("description", header.substr(rest));
    }
    records.push_back(std::move(rec));
    body.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == ';') continue;
    if (line[0] == '>') {
      flush();
      header = line.substr(1);
      have = true;
    } else {
      if (!have) throw Error(ErrorCode::Format, "FASTA line " + std::to_string(line_no) + " before header");
      body += line;
    }
  }
  flush();
  return records;
}

std::vector<NucleotideSequence> read_fasta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_fasta(in);
}

void write_fasta_record(std::ostream& out, std::string_view header, std::string_view bases,
                        std::size_t width) {
  out << '>' << header << '\n';
  for (std::size_t i = 0; i < bases.size(); i += width) {
    out << bases.substr(i, width) << '\n';
  }
}

void write_fasta(std::ostream& out, const std::vector<NucleotideSequence>& records,
                 std::size_t width) {
  for (const auto& r : records) {
    std::string header = r.id();
    if (auto it = r.meta().find("description"); it != r.meta().end()) header += " " + it->second;
    write_fasta_record(out, header, r.view(), width);
  }
}

}  // namespace genolm
