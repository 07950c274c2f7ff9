#include <doctest.h>

#include <sstream>

#include "genolm/seqcore.hpp"
#include "helpers.hpp"

using namespace genolm;
using testing::error_code_of;

TEST_SUITE("seqcore") {
  TEST_CASE("validation normalizes case and whitespace") {
    const auto s = NucleotideSequence::validate("ac gt\nNn", "x");
    CHECK(s.bases() == "ACGTNN");
    CHECK(s.id() == "x");
    CHECK(s.has_ambiguous());
    CHECK(error_code_of([] { NucleotideSequence::validate("ACGU"); }) == ErrorCode::InvalidSymbol);
    CHECK(error_code_of([] { NucleotideSequence::validate("AC-G"); }) == ErrorCode::InvalidSymbol);
  }

  TEST_CASE("reverse complement") {
    CHECK(reverse_complement("AACGTN") == "NACGTT");
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const auto s = testing::random_bases(rng, 1 + rng.below(200));
      CHECK(reverse_complement(reverse_complement(s)) == s);
      CHECK(reverse_complement(s) == testing::revcomp(s));
    }
  }

  TEST_CASE("subsequence bounds") {
    const auto s = NucleotideSequence::validate("ACGTACGT");
    CHECK(s.subsequence(2, 3).bases() == "GTA");
    CHECK_THROWS_AS(s.subsequence(6, 5), Error);
  }

  TEST_CASE("translation flags") {
    auto r = translate(NucleotideSequence::validate("ATGAAATAA"), 0);
    CHECK(r.protein.residues() == "MK*");
    CHECK(r.complete);
    CHECK_FALSE(r.premature_stop);
    CHECK(r.starts_with_met);

    r = translate(NucleotideSequence::validate("ATGTAAAAAG"), 0);
    CHECK(r.protein.residues() == "M*K");
    CHECK_FALSE(r.complete);
    CHECK(r.premature_stop);

    r = translate(NucleotideSequence::validate("CATGGCC"), 1);
    CHECK(r.protein.residues() == "MA");

    CHECK(error_code_of([] { translate(NucleotideSequence::validate("ATGNAA"), 0); }) == ErrorCode::AmbiguousBase);
    CHECK(standard_code().amino_acids.size() == 64);
  }

  TEST_CASE("only the standard code is built in") {
    CHECK(genetic_code(1).name == standard_code().name);
    CHECK(error_code_of([] { genetic_code(2); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("protein alphabet") {
    CHECK(ProteinSequence::validate("MKV*").residues() == "MKV*");
    CHECK(error_code_of([] { ProteinSequence::validate("MKB"); }) == ErrorCode::InvalidSymbol);
  }

  TEST_CASE("FASTA round trip") {
    std::istringstream in(">a first record\nACGT\nacgt\n\n>b\nNNAC\n");
    const auto recs = read_fasta(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].id() == "a");
    CHECK(recs[0].meta().at("description") == "first record");
    CHECK(recs[0].bases() == "ACGTACGT");
    CHECK(recs[1].bases() == "NNAC");

    std::ostringstream out;
    write_fasta(out, recs, 3);
    std::istringstream back(out.str());
    const auto again = read_fasta(back);
    REQUIRE(again.size() == 2);
    CHECK(again[0] == recs[0]);
    CHECK(again[1] == recs[1]);
  }
}
