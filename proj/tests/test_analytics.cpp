#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "genolm/analytics.hpp"
#include "helpers.hpp"

using namespace genolm;
using testing::error_code_of;

TEST_SUITE("analytics") {
  TEST_CASE("matthews correlation") {
    CHECK(mcc({4, 4, 1, 1}) == doctest::Approx(15.0 / 25.0));
    CHECK(mcc({10, 5, 3, 2}) == doctest::Approx((50.0 - 6.0) / std::sqrt(13.0 * 12.0 * 8.0 * 7.0)));
    CHECK(mcc({5, 0, 5, 0}) == 0.0);
  }

  TEST_CASE("weighted F1 and accuracy") {
    const std::vector<int> truth{0, 0, 1, 1};
    const std::vector<int> pred{0, 1, 1, 1};
    const auto m = confusion_matrix(truth, pred, 2);
    CHECK(m[0][1] == 1);
    CHECK(weighted_f1(m) == doctest::Approx((2.0 * (2.0 / 3.0) + 2.0 * 0.8) / 4.0));
    CHECK(accuracy(m) == doctest::Approx(0.75));
    const std::vector<int> none{1, 1, 1, 1};
    CHECK(weighted_f1(confusion_matrix(truth, none, 2)) == doctest::Approx(2.0 / 3.0 * 0.5));
  }

  TEST_CASE("pearson correlation") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{2, 4, 6, 8};
    const std::vector<double> z{8, 6, 4, 2};
    CHECK(pearson_r(x, y) == doctest::Approx(1.0));
    CHECK(pearson_r(x, z) == doctest::Approx(-1.0));
    Rng rng(2);
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
      a[i] = rng.uniform();
      b[i] = a[i] + rng.uniform();
    }
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < 50; ++i) ma += a[i] / 50, mb += b[i] / 50;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(pearson_r(a, b) == doctest::Approx(sab / std::sqrt(saa * sbb)).epsilon(1e-12));
    CHECK(error_code_of([] { pearson_r(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }) ==
          ErrorCode::ConstantInput);
  }

  TEST_CASE("ranking metrics with ties") {
    const std::vector<double> s{0.5, 0.5, 0.2, 0.9};
    const std::vector<bool> pos{true, false, false, true};
    // Pairs: (0.5 vs 0.5) 1/2, (0.5 vs 0.2) 1, (0.9 vs *) 2  ->  3.5 / 4
    CHECK(auroc(s, pos) == doctest::Approx(3.5 / 4.0));
    // Thresholds 0.9 (R 1/2, P 1), 0.5 (R 1, P 2/3).
    CHECK(auprc(s, pos) == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
    CHECK(error_code_of([&] { auroc(s, std::vector<bool>(4, false)); }) == ErrorCode::DegenerateLabels);
  }

  TEST_CASE("profile embedding") {
    const auto e = profile_embedding("AAAC", 2);
    REQUIRE(e.size() == 16);
    CHECK(e[0] == doctest::Approx(2.0 / 3.0));
    CHECK(e[1] == doctest::Approx(1.0 / 3.0));
    CHECK(error_code_of([] { profile_embedding("A", 2); }) == ErrorCode::SequenceTooShort);
    CHECK(error_code_of([] { profile_embedding("ANA", 2); }) == ErrorCode::ContainsAmbiguousBase);
  }

  TEST_CASE("points on a line project onto one axis") {
    EmbeddingSet set;
    set.dim = 3;
    for (int t = -3; t <= 3; ++t) {
      const std::vector<double> v{1.0 + t, 2.0 + 2.0 * t, -1.0 * t};
      set.add(v, t < 0 ? "a" : "b");
    }
    const auto p = pca_project(set, 2);
    CHECK(p.rank_deficit == 1);
    CHECK(p.explained_ratio[0] == doctest::Approx(1.0));
    for (std::size_t c = 0; c < 3; ++c) CHECK(p.components[3 + c] == 0.0);
    const double norm = std::sqrt(6.0);
    CHECK(p.components[1] == doctest::Approx(2.0 / norm));  // largest entry positive
    for (std::size_t i = 0; i < set.rows(); ++i) {
      const double t = static_cast<double>(i) - 3.0;
      CHECK(p.coords[i * 2] == doctest::Approx(t * norm));
      CHECK(p.coords[i * 2 + 1] == 0.0);
    }
  }

  TEST_CASE("principal components agree with a full eigendecomposition") {
    Rng rng(6);
    const std::size_t n = 40, d = 6;
    EmbeddingSet set;
    set.dim = d;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(d);
      for (std::size_t c = 0; c < d; ++c) v[c] = (rng.uniform() - 0.5) * static_cast<double>(d - c);
      set.add(v, i % 2 ? "x" : "y");
    }
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) x(static_cast<long>(i), static_cast<long>(c)) = set.row(i)[c];
    x.rowwise() -= x.colwise().mean();
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);

    const auto p = pca_project(set, 3);
    CHECK(p.rank_deficit == 0);
    for (std::size_t k = 0; k < 3; ++k) {
      const long col = static_cast<long>(d - 1 - k);
      CHECK(p.explained_variance[k] == doctest::Approx(es.eigenvalues()(col)).epsilon(1e-8));
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += p.components[k * d + c] * es.eigenvectors()(static_cast<long>(c), col);
      CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-8));
      for (std::size_t l = 0; l < k; ++l) {
        double cross = 0.0;
        for (std::size_t c = 0; c < d; ++c) cross += p.components[k * d + c] * p.components[l * d + c];
        CHECK(std::abs(cross) < 1e-8);
      }
    }
    CHECK(p.explained_ratio[0] == doctest::Approx(es.eigenvalues()(d - 1) / cov.trace()).epsilon(1e-8));
    CHECK(error_code_of([&] {
            EmbeddingSet one;
            one.dim = 2;
            one.add(std::vector<double>{1, 2}, "a");
            pca_project(one, 2);
          }) == ErrorCode::TooFewSamples);
  }

  TEST_CASE("silhouette on a hand-computed fixture") {
    EmbeddingSet set;
    set.dim = 1;
    for (const double v : {0.0, 1.0}) set.add(std::vector<double>{v}, "a");
    for (const double v : {4.0, 6.0}) set.add(std::vector<double>{v}, "b");
    const double want = ((1.0 - 1.0 / 5.0) + (1.0 - 1.0 / 4.0) + (1.0 - 2.0 / 3.5) + (1.0 - 2.0 / 5.5)) / 4.0;
    CHECK(silhouette(set) == doctest::Approx(want));
    CHECK(silhouette(set, Distance::Euclidean, 3) == doctest::Approx(want));
    EmbeddingSet single;
    single.dim = 1;
    single.add(std::vector<double>{1.0}, "a");
    single.add(std::vector<double>{2.0}, "a");
    CHECK(error_code_of([&] { silhouette(single); }) == ErrorCode::SingleCluster);
  }

  TEST_CASE("composition profiles separate GC-poor from GC-rich sequences") {
    Rng rng(10);
    EmbeddingSet set;
    set.dim = 16;
    for (int i = 0; i < 60; ++i) {
      const double gc = i % 2 ? 0.7 : 0.3;
      std::string s(200, 'A');
      for (auto& c : s) {
        const bool strong = rng.uniform() < gc;
        c = strong ? (rng.below(2) ? 'G' : 'C') : (rng.below(2) ? 'A' : 'T');
      }
      set.add(profile_embedding(s, 2), i % 2 ? "rich" : "poor");
    }
    const auto p = pca_project(set, 2);
    CHECK(silhouette(projected(set, p)) > 0.5);
    CHECK(silhouette(set, Distance::Cosine) > 0.0);
  }

  TEST_CASE("embedding table round trip") {
    EmbeddingSet set;
    set.dim = 2;
    set.add(std::vector<double>{0.25, -1.5}, "a", "s1");
    set.add(std::vector<double>{3.0, 0.125}, "b", "s2");
    std::stringstream ss;
    write_embedding_tsv(ss, set);
    const auto back = read_embedding_tsv(ss);
    CHECK(back.dim == 2);
    CHECK(back.values == set.values);
    CHECK(back.labels == set.labels);
    CHECK(back.ids == set.ids);
  }
}
