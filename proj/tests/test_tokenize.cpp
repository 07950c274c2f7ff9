#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "genolm/tokenize.hpp"
#include "helpers.hpp"

using namespace genolm;
using testing::error_code_of;

namespace {

std::vector<NucleotideSequence> repeated(const std::string& s, int n) {
  return std::vector<NucleotideSequence>(static_cast<std::size_t>(n), NucleotideSequence::validate(s));
}

}  // namespace

TEST_SUITE("tokenize") {
  TEST_CASE("k-mer vocabulary layout") {
    for (int k = 1; k <= 8; ++k) {
      const auto v = Vocabulary::kmer(k);
      CHECK(v.sequence_token_count() == (std::size_t{1} << (2 * k)));
      CHECK(v.size() == v.sequence_token_count() + kSpecialSlots);
      CHECK(v.token(0) == std::string(static_cast<std::size_t>(k), 'A'));
    }
    const auto v6 = Vocabulary::kmer(6);
    CHECK(v6.size() == 4128);
    CHECK(v6.token(v6.bos()) == "<bos>");
    CHECK(v6.token(v6.eos()) == "<eos>");
    CHECK(v6.token(v6.prefix_token("high")) == "<high>");
    CHECK(v6.prefix_token("<low>") == v6.special(Special::Low));
    CHECK(error_code_of([&] { v6.prefix_token("medium"); }) == ErrorCode::UnknownPrefixToken);
    CHECK(v6.is_special(v6.mask()));
    CHECK_FALSE(v6.is_special(4095));
    CHECK(error_code_of([] { Vocabulary::kmer(9); }) == ErrorCode::InvalidArgument);
    CHECK(Vocabulary::kmer(3).hash() != Vocabulary::kmer(4).hash());
  }

  TEST_CASE("k-mer ids are base-4 ranks") {
    KmerTokenizer tok(6);
    const auto ids = tok.encode("ACGTAC");
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == 0b000110110001);
    CHECK(tok.kmer_id("TTTTTT") == 4095);
    CHECK(tok.decode(ids) == "ACGTAC");
  }

  TEST_CASE("phase offset keeps head and tail") {
    KmerTokenizer tok(3);
    const auto e = tok.encode_with_offset("ACGTACGTA", 1);
    CHECK(e.head == "A");
    CHECK(e.ids.size() == 2);
    CHECK(tok.decode(e.ids) == "CGTACG");
    CHECK(e.tail == "TA");
    CHECK(error_code_of([&] { tok.encode_with_offset("ACGT", 3); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { tok.encode("ACNT"); }) == ErrorCode::ContainsAmbiguousBase);
  }

  TEST_CASE("random offset is seeded and in range") {
    KmerTokenizer tok(6);
    const auto s = NucleotideSequence::validate("ACGTACGTACGTACGTAC");
    std::set<int> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto a = tok.encode(s, KmerSpec{6, RandomOffset{seed}});
      const auto b = tok.encode(s, KmerSpec{6, RandomOffset{seed}});
      CHECK(a.offset_used == b.offset_used);
      CHECK(a.offset_used >= 0);
      CHECK(a.offset_used <= 5);
      seen.insert(a.offset_used);
    }
    CHECK(seen.size() == 6);
  }

  TEST_CASE("round trip on random input") {
    Rng rng(11);
    for (int k = 1; k <= 8; ++k) {
      KmerTokenizer tok(k);
      for (int trial = 0; trial < 20; ++trial) {
        const auto s = testing::random_bases(rng, 1 + rng.below(300));
        for (int off = 0; off < k; ++off) {
          const auto e = tok.encode_with_offset(s, off);
          CHECK(e.head + tok.decode(e.ids) + e.tail == s);
        }
      }
    }
  }

  TEST_CASE("token_char") {
    const auto v = Vocabulary::kmer(6);
    KmerTokenizer tok(6);
    const TokenId id = tok.kmer_id("ACGTAC");
    CHECK(token_char(v, id, 2) == 'G');
    CHECK(error_code_of([&] { token_char(v, id, 6); }) == ErrorCode::OffsetOutOfRange);
    CHECK(error_code_of([&] { token_char(v, v.bos(), 0); }) == ErrorCode::OffsetOutOfRange);
  }

  TEST_CASE("BPE merges by frequency, then merged string") {
    const auto model = bpe_train(repeated("ACGT", 2), 100, 0);
    REQUIRE(model.merges.size() == 3);
    CHECK(model.merges[0] == std::pair<std::string, std::string>{"A", "C"});
    CHECK(model.merges[1] == std::pair<std::string, std::string>{"AC", "G"});
    CHECK(model.merges[2] == std::pair<std::string, std::string>{"ACG", "T"});
    CHECK(model.vocab.size() == 4 + 3 + kSpecialSlots);

    const auto aa = bpe_train(repeated("AAAA", 2), 100, 0);
    REQUIRE(aa.merges.size() == 2);
    CHECK(aa.vocab.token(4) == "AA");
    CHECK(aa.vocab.token(5) == "AAAA");
  }

  TEST_CASE("BPE stops at the target size") {
    Rng rng(5);
    std::vector<NucleotideSequence> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(NucleotideSequence::validate(testing::random_bases(rng, 200)));
    const auto model = bpe_train(corpus, 60, 1);
    CHECK(model.vocab.size() == 60);
    CHECK(error_code_of([&] { bpe_train(corpus, 35, 1); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { bpe_train({}, 40, 1); }) == ErrorCode::EmptyCorpus);
  }

  TEST_CASE("BPE vocabulary is reproduced by its merges") {
    Rng rng(6);
    std::vector<NucleotideSequence> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back(NucleotideSequence::validate(testing::random_bases(rng, 300)));
    const auto model = bpe_train(corpus, 80, 2);
    const auto rebuilt = BpeModel::from_merges(model.merges);
    CHECK(rebuilt.vocab == model.vocab);

    BpeTokenizer tok(model);
    for (int i = 0; i < 50; ++i) {
      const auto s = testing::random_bases(rng, 1 + rng.below(500));
      const auto ids = tok.encode(s);
      CHECK(tok.decode(ids) == s);
      CHECK(ids.size() <= s.size());
    }
    CHECK(tok.encode("ACGTA").size() >= 1);
  }

  TEST_CASE("BPE encoding applies merges in rank order") {
    BpeTokenizer tok(bpe_train(repeated("ACGT", 2), 100, 0));
    const auto ids = tok.encode("ACGTA");
    REQUIRE(ids.size() == 2);
    CHECK(tok.vocabulary().token(ids[0]) == "ACGT");
    CHECK(tok.vocabulary().token(ids[1]) == "A");
  }

  TEST_CASE("BPE rejects merges of unknown tokens") {
    CHECK(error_code_of([] { BpeModel::from_merges({{"AC", "G"}}); }) == ErrorCode::Format);
  }

  TEST_CASE("tokenizer persistence") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string kpath = (dir / "genolm_tok_kmer.json").string();
    const std::string bpath = (dir / "genolm_tok_bpe.json").string();
    save_tokenizer(KmerTokenizer(4), kpath);
    const auto k = load_tokenizer(kpath);
    CHECK(k->fixed_token_length() == 4);
    CHECK(k->vocabulary() == Vocabulary::kmer(4));

    BpeTokenizer bpe(bpe_train(repeated("ACGTTGCA", 3), 50, 9));
    save_tokenizer(bpe, bpath);
    const auto b = load_tokenizer(bpath);
    CHECK(b->fixed_token_length() == 0);
    CHECK(b->vocabulary() == bpe.vocabulary());
    CHECK(b->encode("ACGTTGCAAC") == bpe.encode("ACGTTGCAAC"));

    CHECK(make_tokenizer("kmer:2")->vocabulary().size() == 16 + kSpecialSlots);
    CHECK(error_code_of([] { tokenizer_from_json("{\"type\":\"word\"}"); }) == ErrorCode::Format);
    std::remove(kpath.c_str());
    std::remove(bpath.c_str());
  }
}
