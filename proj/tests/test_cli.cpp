#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with `args`; stdout is captured, stderr discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GENOLM_CLI + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "genolm_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("tokenize prints ids") {
    const auto r = cli("tokenize --k 6 --offset 0 ACGTAC");
    CHECK(r.status == 0);
    CHECK(r.out == "433\n");
    const auto j = cli("tokenize --k 1 --json ACGT");
    CHECK(j.status == 0);
    CHECK(j.out.find("\"config\"") != std::string::npos);
  }

  TEST_CASE("usage and data errors use different exit codes") {
    CHECK(cli("frobnicate").status == 1);
    CHECK(cli("tokenize --k").status == 1);
    CHECK(cli("tokenize --k 3 ACGN").status == 2);

    const auto fa = scratch("train.fa");
    std::ofstream(fa) << ">a\nACGTACGTACGTAAACCCGGGTTT\n";
    const auto model = scratch("k2.gmlm");
    REQUIRE(cli("train-markov --in " + fa.string() + " --tokenizer kmer:2 --order 1 --out " + model.string()).status == 0);
    CHECK(cli("generate --model " + model.string() + " --tokenizer kmer:3 --count 1").status == 2);
  }

  TEST_CASE("generation is deterministic under a seed") {
    const auto fa = scratch("det.fa");
    std::ofstream(fa) << ">a\nACGTACGTTTGACCAGTACGATCGATCGGGCTA\n";
    const auto model = scratch("det.gmlm");
    REQUIRE(cli("train-markov --in " + fa.string() + " --tokenizer kmer:1 --order 2 --out " + model.string()).status == 0);
    const std::string args = "--seed 17 generate --model " + model.string() +
                             " --tokenizer kmer:1 --prefix none --count 4 --max-new-tokens 30";
    const auto a = cli(args);
    const auto b = cli(args);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find(">gen0") != std::string::npos);
    CHECK(cli("--threads 3 " + args).out == a.out);
  }

  TEST_CASE("config file values yield to the command line") {
    const auto cfg = scratch("run.cfg");
    std::ofstream(cfg) << "# shared settings\nk = 2\noffset=0\n";
    CHECK(cli("--config " + cfg.string() + " tokenize ACGT").out == "1 11\n");
    CHECK(cli("--config " + cfg.string() + " tokenize --k 1 ACGT").out == "0 1 2 3\n");
  }

  TEST_CASE("every subcommand has help") {
    for (const char* sub : {"tokenize", "bpe-train", "ingest extract", "ingest stats", "ingest gener-tasks", "translate",
                            "train-markov", "generate", "recover build", "recover run", "bridge-serve", "vep score",
                            "vep eval", "design label", "design fit", "design rank", "design contrib",
                            "embed project", "embed silhouette"}) {
      CAPTURE(sub);
      CHECK(cli(std::string(sub) + " --help").status == 0);
    }
  }

  TEST_CASE("variant scoring end to end") {
    const auto genome = scratch("g.fa");
    std::ofstream(genome) << ">chr\nACGTACGTACGTACGTACGTACGTACGTACGT\n";
    const auto vars = scratch("v.tsv");
    std::ofstream(vars) << "chr\t10\tC\tA\tpathogenic\nchr\t11\tG\tT\tbenign\nchr\t12\tT\tA\tbenign\n";
    const auto out = scratch("scores.tsv");
    const auto r = cli("vep score --genome " + genome.string() + " --variants " + vars.string() +
                       " --model uniform --tokenizer kmer:3 --out " + out.string());
    CHECK(r.status == 0);
    CHECK(slurp(out).find("chr\t10\tC\tA\tpathogenic\t0\t") != std::string::npos);
    const auto m = cli("vep eval --scores " + out.string());
    CHECK(m.status == 0);
    CHECK(nlohmann::json::parse(m.out)["auroc"].get<double>() == doctest::Approx(0.5));
  }
}
