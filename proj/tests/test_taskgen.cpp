#include "doctest.h"
#include "wdmdiff/rng.hpp"
#include "wdmdiff/taskgen.hpp"

#include <cstdio>
#include <filesystem>

using namespace wdmdiff;

TEST_SUITE_BEGIN("taskgen");

TEST_CASE("pcg32 reproduces the reference stream") {
  // First outputs of the reference implementation for seed 42, stream 54.
  Pcg32 gen(42, 54);
  const uint32_t expected[] = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b,
                               0xcbed606e};
  for (uint32_t e : expected) CHECK(gen.next_u32() == e);
}

TEST_CASE("unit doubles stay in [0,1) with the right mean") {
  Pcg32 gen(7, 1);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = gen.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("transform shapes follow the request") {
  const TransformSet t = gen_transforms(8, 64, 64, 1234);
  REQUIRE(t.channel_count() == 8);
  for (const CMatrix& m : t.matrices) {
    CHECK(m.rows == 64);
    CHECK(m.cols == 64);
  }
  // per-matrix seeds distinct
  for (int u = 0; u < 8; ++u)
    for (int v = u + 1; v < 8; ++v) CHECK(t.seeds[u] != t.seeds[v]);
}

TEST_CASE("transform entries have amplitude in [0,1)") {
  const TransformSet t = gen_transforms(2, 16, 16, 99);
  for (const CMatrix& m : t.matrices)
    for (const Complex& z : m.a) {
      CHECK(std::abs(z) < 1.0);
    }
}

TEST_CASE("the same master seed reproduces identical matrices") {
  const TransformSet a = gen_transforms(3, 9, 9, 77);
  const TransformSet b = gen_transforms(3, 9, 9, 77);
  for (int w = 0; w < 3; ++w) CHECK(a.matrices[w].a == b.matrices[w].a);
  const TransformSet c = gen_transforms(3, 9, 9, 78);
  CHECK(a.matrices[0].a != c.matrices[0].a);
}

TEST_CASE("generated transforms are nearly mutually orthogonal") {
  const TransformSet t = gen_transforms(8, 25, 25, 2024);
  CHECK(max_pairwise_cosine(t) < 0.2);
}

TEST_CASE("dataset pairs satisfy the transform exactly against a loop oracle") {
  const TransformSet t = gen_transforms(2, 9, 9, 5);
  const Dataset data(t, {4, 2, 2}, 5);
  for (int w = 0; w < 2; ++w) {
    for (const SamplePair& p : data.split(w, Split::train)) {
      // independent triple-loop multiply
      std::vector<Complex> want(9, Complex{0, 0});
      for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) want[r] += t.matrices[w].at(r, c) * p.input[c];
      double num = 0.0, den = 0.0;
      for (int r = 0; r < 9; ++r) {
        num += std::norm(p.target[r] - want[r]);
        den += std::norm(p.target[r]);
      }
      CHECK(std::sqrt(num / den) < 1e-12);
    }
  }
}

TEST_CASE("input amplitude statistics match U[0,1)") {
  const TransformSet t = gen_transforms(1, 25, 25, 6);
  const Dataset data(t, {400, 1, 1}, 6);
  double mean = 0.0, mn = 1.0, mx = 0.0;
  long n = 0;
  for (const SamplePair& p : data.split(0, Split::train)) {
    for (const Complex& z : p.input) {
      const double a = std::abs(z);
      mean += a;
      mn = std::min(mn, a);
      mx = std::max(mx, a);
      ++n;
    }
  }
  mean /= static_cast<double>(n);
  CHECK(n == 10000);
  CHECK(mn >= 0.0);
  CHECK(mx < 1.0);
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);
}

TEST_CASE("paper-scale split request echoes its sizes without materializing") {
  const TransformSet t = gen_transforms(1, 25, 25, 6);
  const Dataset data(t, {55000, 5000, 10000}, 6);
  CHECK(data.counts().train == 55000);
  CHECK(data.counts().val == 5000);
  CHECK(data.counts().test == 10000);
}

TEST_CASE("channel substreams are independent") {
  const TransformSet t = gen_transforms(3, 4, 4, 42);
  const Dataset all(t, {5, 1, 1}, 42);
  // regenerate channel 2 alone
  const auto alone = gen_split(t.matrices[2], 2, Split::train, 5, 42);
  const auto& joint = all.split(2, Split::train);
  REQUIRE(alone.size() == joint.size());
  for (size_t i = 0; i < alone.size(); ++i) {
    CHECK(alone[i].input == joint[i].input);
    CHECK(alone[i].target == joint[i].target);
  }
  // and distinct channels see distinct streams
  CHECK(all.split(0, Split::train)[0].input != all.split(1, Split::train)[0].input);
}

TEST_CASE("dataset cache files round trip bit-exactly") {
  const TransformSet t = gen_transforms(2, 4, 4, 11);
  const Dataset data(t, {3, 2, 1}, 11);
  const auto dir = std::filesystem::temp_directory_path() / "wdmdiff_test_cache";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ds.bin").string();
  write_dataset_cache(path, data, 1, Split::val);
  const auto back = read_dataset_cache(path);
  const auto& want = data.split(1, Split::val);
  REQUIRE(back.size() == want.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].input == want[i].input);
    CHECK(back[i].target == want[i].target);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("transform files round trip bit-exactly") {
  const TransformSet t = gen_transforms(2, 5, 7, 13);
  const auto dir = std::filesystem::temp_directory_path() / "wdmdiff_test_tf";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "tf.bin").string();
  write_transform_file(path, t, 1);
  const CMatrix back = read_transform_file(path);
  CHECK(back.rows == 7);
  CHECK(back.cols == 5);
  CHECK(back.a == t.matrices[1].a);
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
