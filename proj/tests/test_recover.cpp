#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "genolm/recover.hpp"
#include "helpers.hpp"

using namespace genolm;
using testing::error_code_of;

namespace {

FunctionalRegion region(std::size_t start, std::size_t end, Strand strand, TaxonGroup group) {
  AnnotationRecord rec;
  rec.seq_id = "c1";
  rec.start = start;
  rec.end = end;
  rec.strand = strand;
  rec.feature_type = FeatureType::CDS;
  rec.taxon_group = group;
  return {rec, NucleotideSequence::trusted(std::string(end - start + 1, 'A'), "c1:" + std::to_string(start))};
}

double fraction_a(std::string_view s, std::size_t n) {
  return static_cast<double>(std::count(s.begin(), s.begin() + static_cast<long>(n), 'A')) / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("recover") {
  TEST_CASE("accuracy counts matching prefix positions") {
    CHECK(recovery_accuracy("ACGTACGTAC", "ACGTTTTTAC", 10) == doctest::Approx(0.7));
    CHECK(recovery_accuracy("ACGTACGTAC", "ACG", 4) == doctest::Approx(0.75));
    CHECK(recovery_accuracy("ACGT", "ACGTAAAA", 4) == 1.0);
    CHECK(error_code_of([] { recovery_accuracy("ACG", "ACGT", 4); }) == ErrorCode::ReferenceTooShort);
  }

  TEST_CASE("dataset slices prompts on the region's strand") {
    Rng rng(3);
    const std::string g = testing::random_bases(rng, 200);
    const std::vector<NucleotideSequence> genome{NucleotideSequence::trusted(g, "c1")};
    const std::vector<FunctionalRegion> regions{region(101, 150, Strand::Plus, TaxonGroup::Mammalian),
                                                region(11, 60, Strand::Minus, TaxonGroup::Fungi),
                                                region(5, 40, Strand::Plus, TaxonGroup::Fungi)};  // no room upstream
    RecoveryDatasetConfig cfg;
    cfg.prompt_len = 50;
    cfg.predict_len = 10;
    cfg.per_group_n = 1;
    const auto items = build_recovery_dataset(regions, genome, cfg);
    REQUIRE(items.size() == 2);
    const auto& fungi = items[0].taxon_group == "fungi" ? items[0] : items[1];
    const auto& mammal = items[0].taxon_group == "fungi" ? items[1] : items[0];
    CHECK(mammal.prompt.bases() == g.substr(50, 50));
    CHECK(mammal.reference.bases() == g.substr(100, 10));
    CHECK(fungi.prompt.bases() == testing::revcomp(g.substr(60, 50)));
    CHECK(fungi.reference.bases() == testing::revcomp(g.substr(50, 10)));

    cfg.per_group_n = 2;
    CHECK(error_code_of([&] { build_recovery_dataset(regions, genome, cfg); }) == ErrorCode::InsufficientData);

    cfg.per_group_n = 1;
    cfg.anchor = RecoveryAnchor::Random;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      cfg.seed = seed;
      for (const auto& it : build_recovery_dataset(regions, genome, cfg)) {
        if (it.taxon_group != "mammalian") continue;
        const auto pos = g.find(it.prompt.bases() + it.reference.bases());
        REQUIRE(pos != std::string::npos);
        CHECK(pos + 50 >= 100);
        CHECK(pos + 60 <= 150);
      }
    }
  }

  TEST_CASE("greedy uniform baseline predicts A everywhere") {
    Rng rng(11);
    std::vector<RecoveryItem> items;
    for (int i = 0; i < 6; ++i) {
      items.push_back({NucleotideSequence::trusted(testing::random_bases(rng, 20)),
                       NucleotideSequence::trusted(testing::random_bases(rng, 30)), i % 2 ? "fungi" : "plant"});
    }
    for (const int k : {1, 3}) {
      KmerTokenizer tok(k);
      const UniformLm lm(tok.vocabulary());
      RecoveryRunConfig cfg;
      cfg.predict_lens = {10, 30};
      const auto report = run_recovery(lm, tok, items, cfg);
      double plant = 0.0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(report.item_accuracy[i][0] == doctest::Approx(fraction_a(items[i].reference.view(), 10)));
        CHECK(report.item_accuracy[i][1] == doctest::Approx(fraction_a(items[i].reference.view(), 30)));
        if (i % 2 == 0) plant += report.item_accuracy[i][1] / 3.0;
      }
      REQUIRE(report.cells.size() == 4);
      CHECK(report.cells[3].group == "plant");
      CHECK(report.cells[3].predict_len == 30);
      CHECK(report.cells[3].mean == doctest::Approx(plant));

      const CausalAsMaskedLm mlm(lm);
      const auto masked = run_recovery(mlm, tok, items, cfg);
      CHECK(masked.item_accuracy == report.item_accuracy);
    }
  }

  TEST_CASE("dataset round trip") {
    const std::vector<RecoveryItem> items{{NucleotideSequence::trusted("ACGT"), NucleotideSequence::trusted("GG"), "plant"}};
    std::stringstream ss;
    write_recovery_dataset(ss, items);
    const auto back = read_recovery_dataset(ss);
    REQUIRE(back.size() == 1);
    CHECK(back[0].prompt.bases() == "ACGT");
    CHECK(back[0].reference.bases() == "GG");
    CHECK(back[0].taxon_group == "plant");
    std::stringstream bad("ACGT\tGG\n");
    CHECK(error_code_of([&] { read_recovery_dataset(bad); }) == ErrorCode::BadRow);
  }

  TEST_CASE("mismatched tokenizer is rejected") {
    const UniformLm lm(Vocabulary::kmer(2));
    std::vector<RecoveryItem> items{{NucleotideSequence::trusted("ACGT"), NucleotideSequence::trusted("GGGG"), "x"}};
    CHECK(error_code_of([&] { run_recovery(lm, KmerTokenizer(3), items, RecoveryRunConfig{}); }) ==
          ErrorCode::VocabularyMismatch);
  }
}
