#include <doctest.h>

#include <fstream>
#include <sstream>

#include "genolm/ingest.hpp"
#include "helpers.hpp"

using namespace genolm;
using testing::error_code_of;

namespace {

const std::string kToy =
    "GCTAAAGACAATTACATAACATACACGTCAGCACGAAACTTGTTGGCCCAGTGTGAATCGCTTAAGGGTTAAGTAAGTGTGATGCATACGCCTTTACTTGCTGTG"
    "TCCACCCCATCGGACTGGCATTTTTATTACACTCAGAAACAGAACTCGGGTAATTTTGACAGGTCACGCAGAGGCGCGCCCTCCTGAAGTGCGTGGACACTCGCT"
    "ATGAATCTCTGATTTACCCACTCTGCCAAA";

std::vector<GenbankEntry> load_fixture() {
  std::ifstream in(std::string(GENOLM_TEST_DATA) + "/genes.gb");
  REQUIRE(in);
  return parse_genbank(in);
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("location strings") {
    auto [span, strand] = parse_location("11..70");
    CHECK(span == std::pair<std::size_t, std::size_t>{11, 70});
    CHECK(strand == Strand::Plus);
    std::tie(span, strand) = parse_location("complement(join(1..5,9..20))");
    CHECK(span == std::pair<std::size_t, std::size_t>{1, 20});
    CHECK(strand == Strand::Minus);
    std::tie(span, strand) = parse_location("join(complement(30..40),complement(3..8))");
    CHECK(span == std::pair<std::size_t, std::size_t>{3, 40});
    CHECK(strand == Strand::Minus);
    std::tie(span, strand) = parse_location("7");
    CHECK(span == std::pair<std::size_t, std::size_t>{7, 7});
    CHECK(error_code_of([] { parse_location("<1..5"); }) == ErrorCode::MalformedLocation);
    CHECK(error_code_of([] { parse_location("join(1..5"); }) == ErrorCode::MalformedLocation);
    CHECK(error_code_of([] { parse_location("9..3"); }) == ErrorCode::MalformedLocation);
  }

  TEST_CASE("GenBank fixture") {
    const auto entries = load_fixture();
    REQUIRE(entries.size() == 1);
    const auto& e = entries[0];
    CHECK(e.sequence.id() == "toy1");
    CHECK(e.sequence.bases() == kToy);
    CHECK(e.taxon_group == TaxonGroup::Mammalian);
    REQUIRE(e.genes.size() == 3);
    CHECK(e.genes[0].start == 11);
    CHECK(e.genes[0].end == 70);
    CHECK(e.genes[0].strand == Strand::Plus);
    CHECK(e.genes[0].feature_type == FeatureType::CDS);
    CHECK(e.genes[1].start == 101);
    CHECK(e.genes[1].end == 150);
    CHECK(e.genes[1].strand == Strand::Minus);
    CHECK(e.genes[1].feature_type == FeatureType::TRNA);
    CHECK(e.genes[2].start == 171);
    CHECK(e.genes[2].end == 230);
    CHECK(e.genes[2].feature_type == FeatureType::NcRNA);
  }

  TEST_CASE("extraction matches the hand-cut intervals") {
    const auto e = load_fixture().front();
    const auto regions = extract_functional_regions({e.sequence}, e.genes, {8, 2});
    REQUIRE(regions.size() == 3);
    CHECK(regions[0].sequence.bases() == kToy.substr(10, 60));
    CHECK(regions[1].sequence.bases() == testing::revcomp(kToy.substr(100, 50)));
    CHECK(regions[2].sequence.bases() == kToy.substr(170, 60));
    for (const auto& r : regions) CHECK(r.sequence.size() == r.source.end - r.source.start + 1);

    const auto stats = corpus_stats(regions);
    CHECK(stats.cells.at({"mammalian", "CDS"}).genes == 1);
    CHECK(stats.cells.at({"mammalian", "CDS"}).nucleotides == 60);
    CHECK(stats.cells.at({"mammalian", "tRNA"}).nucleotides == 50);
    CHECK(stats.cells.at({"mammalian", "ncRNA"}).nucleotides == 60);
    CHECK(stats.total().genes == 3);
    CHECK(stats.total().nucleotides == 170);

    std::ostringstream out;
    write_stats_tsv(out, stats);
    CHECK(out.str().rfind("#taxon\tfeature\tgenes\tnucleotides\n", 0) == 0);
    CHECK(out.str().find("total\t*\t3\t170\n") != std::string::npos);
  }

  TEST_CASE("N runs split regions") {
    const auto g = NucleotideSequence::validate("ACGTACGTACNNNNACGTACGTACGTNA", "c");
    AnnotationRecord a;
    a.seq_id = "c";
    a.start = 1;
    a.end = 28;
    const auto regions = extract_functional_regions({g}, {a}, {4, 1});
    REQUIRE(regions.size() == 2);
    CHECK(regions[0].sequence.bases() == "ACGTACGTAC");
    CHECK(regions[0].source.start == 1);
    CHECK(regions[0].source.end == 10);
    CHECK(regions[1].sequence.bases() == "ACGTACGTACGT");
    CHECK(regions[1].source.start == 15);
  }

  TEST_CASE("annotation errors") {
    const auto g = NucleotideSequence::validate("ACGTACGT", "c");
    AnnotationRecord a;
    a.seq_id = "missing";
    a.end = 4;
    CHECK(error_code_of([&] { extract_functional_regions({g}, {a}); }) == ErrorCode::UnknownSequenceId);

    std::istringstream no_origin("LOCUS       x 8 bp\nFEATURES             Location/Qualifiers\n//\n");
    CHECK(error_code_of([&] { parse_genbank(no_origin); }) == ErrorCode::MissingOrigin);

    std::istringstream fuzzy(
        "LOCUS       x 8 bp\nFEATURES             Location/Qualifiers\n     gene            <1..5\nORIGIN\n        1 acgtacgt\n//\n");
    CHECK(error_code_of([&] { parse_genbank(fuzzy); }) == ErrorCode::MalformedLocation);
  }

  TEST_CASE("BED-like table") {
    std::istringstream ok("# comment\nc\t0\t4\t+\tCDS\tfungi\nc\t4\t8\t-\tmisc_RNA\n");
    const auto recs = parse_bed_like(ok);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].start == 1);
    CHECK(recs[0].end == 4);
    CHECK(recs[0].taxon_group == TaxonGroup::Fungi);
    CHECK(recs[1].feature_type == FeatureType::MiscRNA);
    CHECK(recs[1].strand == Strand::Minus);

    std::istringstream bad("c\t0\t4\t+\tCDS\nc\t5\t2\t+\tCDS\n");
    try {
      parse_bed_like(bad);
      FAIL("expected BadRow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadRow);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("lineage to taxon group") {
    CHECK(taxon_from_lineage("Eukaryota; Metazoa; Chordata; Vertebrata; Mammalia") == TaxonGroup::Mammalian);
    CHECK(taxon_from_lineage("Eukaryota; Metazoa; Chordata; Vertebrata; Aves") == TaxonGroup::VertebrateOther);
    CHECK(taxon_from_lineage("Eukaryota; Metazoa; Arthropoda") == TaxonGroup::Invertebrate);
    CHECK(taxon_from_lineage("Eukaryota; Viridiplantae; Streptophyta") == TaxonGroup::Plant);
    CHECK(taxon_from_lineage("Eukaryota; Fungi; Ascomycota") == TaxonGroup::Fungi);
    CHECK(taxon_from_lineage("Eukaryota; Amoebozoa") == TaxonGroup::Protozoa);
    CHECK_FALSE(taxon_from_lineage("Bacteria; Proteobacteria").has_value());
  }

  TEST_CASE("corpus FASTA headers") {
    const auto e = load_fixture().front();
    std::ostringstream out;
    write_corpus_fasta(out, extract_functional_regions({e.sequence}, e.genes));
    CHECK(out.str().find(">toy1:11-70(+)|mammalian|CDS") != std::string::npos);
  }
}
