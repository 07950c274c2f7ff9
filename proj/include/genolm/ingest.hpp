#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genolm/seqcore.hpp"

namespace genolm {

enum class Strand { Plus, Minus };

enum class FeatureType { CDS, Pseudo, TRNA, RRNA, NcRNA, MiscRNA, Gene };

enum class TaxonGroup { Protozoa, Fungi, Plant, Invertebrate, Mammalian, VertebrateOther };

inline constexpr FeatureType kGeneCategories[] = {FeatureType::CDS,  FeatureType::Pseudo,
                                                  FeatureType::TRNA, FeatureType::RRNA,
                                                  FeatureType::NcRNA, FeatureType::MiscRNA};
inline constexpr TaxonGroup kTaxonGroups[] = {TaxonGroup::Protozoa,     TaxonGroup::Fungi,
                                              TaxonGroup::Plant,        TaxonGroup::Invertebrate,
                                              TaxonGroup::Mammalian,    TaxonGroup::VertebrateOther};

std::string_view to_string(Strand s) noexcept;
std::string_view to_string(FeatureType f) noexcept;
std::string_view to_string(TaxonGroup t) noexcept;
std::optional<FeatureType> parse_feature_type(std::string_view text) noexcept;
std::optional<TaxonGroup> parse_taxon_group(std::string_view text) noexcept;

/// Maps a GenBank ORGANISM lineage onto the six RefSeq eukaryotic groups.
std::optional<TaxonGroup> taxon_from_lineage(std::string_view lineage) noexcept;

/// Annotated interval, 1-based inclusive.
struct AnnotationRecord {
  std::string seq_id;
  std::size_t start = 1;
  std::size_t end = 1;
  Strand strand = Strand::Plus;
  FeatureType feature_type = FeatureType::Gene;
  std::optional<TaxonGroup> taxon_group;
  std::string name;  // locus tag or gene name when known

  std::size_t length() const noexcept { return end - start + 1; }
};

struct GenbankEntry {
  NucleotideSequence sequence;
  std::optional<TaxonGroup> taxon_group;
  std::vector<AnnotationRecord> genes;
};

/// Parses LOCUS/FEATURES/ORIGIN records. One AnnotationRecord per `gene`
/// feature; join/order locations collapse to their outer span. The feature
/// type is taken from a CDS/tRNA/rRNA/ncRNA/misc_RNA feature sharing the
/// gene's locus tag (or gene name), "pseudo" when the gene is flagged so,
/// and "gene" otherwise. `taxon` overrides the lineage-derived group.
std::vector<GenbankEntry> parse_genbank(std::istream& in, std::optional<TaxonGroup> taxon = {});
std::vector<AnnotationRecord> parse_genbank_genes(std::istream& in);

/// Parses a location string such as "complement(join(1..5,9..20))" into an
/// outer span and strand. Throws MalformedLocation.
std::pair<std::pair<std::size_t, std::size_t>, Strand> parse_location(std::string_view text);

/// Tab-separated seq_id, start, end, strand, feature_type[, taxon_group]
/// with BED 0-based half-open coordinates.
std::vector<AnnotationRecord> parse_bed_like(std::istream& in);

struct FunctionalRegion {
  AnnotationRecord source;       // coordinates of this (possibly split) piece
  NucleotideSequence sequence;   // reverse-complemented on the minus strand
};

struct ExtractOptions {
  std::size_t min_length = 8;
  unsigned threads = 0;
};

/// Extracts every annotated interval, splitting at N runs into maximal
/// N-free pieces and dropping pieces shorter than min_length.
std::vector<FunctionalRegion> extract_functional_regions(const std::vector<NucleotideSequence>& genome,
                                                         const std::vector<AnnotationRecord>& annotations,
                                                         const ExtractOptions& options = {});

/// FASTA with headers "id|taxon|feature".
void write_corpus_fasta(std::ostream& out, const std::vector<FunctionalRegion>& regions);

struct LabeledItem {
  std::string sequence;
  std::string label;
  std::string group;
};

struct GeneTaskConfig {
  std::size_t per_class = 10;
  std::size_t min_length = 100;
  std::size_t max_length = 5000;
  bool include_control = true;
  std::size_t control_margin = 1000;
  std::vector<TaxonGroup> groups;    // empty: every group present in the regions
  std::vector<FeatureType> types;    // empty: the six gene categories
};

struct TaxonTaskConfig {
  std::size_t per_group = 10;
  std::size_t window = 96000;
  std::vector<TaxonGroup> groups;    // empty: every group present
};

struct GenerTaskDatasets {
  std::vector<LabeledItem> gene_classification;
  std::vector<LabeledItem> taxonomic_classification;
  std::size_t contigs_too_short = 0;
  std::map<std::string, std::size_t> contigs_too_short_by_group;
};

std::vector<LabeledItem> build_gene_classification(const std::vector<FunctionalRegion>& regions,
                                                   const std::vector<NucleotideSequence>& genome,
                                                   const std::vector<AnnotationRecord>& annotations,
                                                   const GeneTaskConfig& config, std::uint64_t seed);

GenerTaskDatasets build_taxonomic_classification(const std::vector<NucleotideSequence>& genome,
                                                 const std::vector<AnnotationRecord>& annotations,
                                                 const TaxonTaskConfig& config, std::uint64_t seed);

GenerTaskDatasets build_gener_task_datasets(const std::vector<FunctionalRegion>& regions,
                                            const std::vector<NucleotideSequence>& genome,
                                            const std::vector<AnnotationRecord>& annotations,
                                            const GeneTaskConfig& gene_config,
                                            const TaxonTaskConfig& taxon_config, std::uint64_t seed);

void write_labeled_tsv(std::ostream& out, const std::vector<LabeledItem>& items);

struct StatsCell {
  std::size_t genes = 0;
  std::size_t nucleotides = 0;
};

struct CorpusStats {
  std::map<std::pair<std::string, std::string>, StatsCell> cells;  // (taxon, feature)
  StatsCell total() const noexcept;
};

CorpusStats corpus_stats(const std::vector<FunctionalRegion>& regions);
void write_stats_tsv(std::ostream& out, const CorpusStats& stats);

}  // namespace genolm
