#include "doctest.h"
#include "wdmdiff/material.hpp"
#include "wdmdiff/stack.hpp"

using namespace wdmdiff;

TEST_SUITE_BEGIN("materials");

TEST_CASE("dispersion-free material returns (1.72, 0) at every channel wavelength") {
  const Material m = Material::dispersion_free();
  for (double lam : StackGeometry::default_ladder(8)) {
    const IndexSample s = m.complex_index(lam);
    CHECK(s.n == 1.72);
    CHECK(s.kappa == 0.0);
  }
  CHECK_FALSE(m.absorbing());
}

TEST_CASE("tabulated queries at nodes return the node values exactly") {
  const Material m = Material::tabulated({{0.9, 1.70, 0.01}, {1.0, 1.72, 0.02}, {1.1, 1.75, 0.05}});
  const IndexSample s = m.complex_index(1.0);
  CHECK(s.n == 1.72);
  CHECK(s.kappa == 0.02);
  CHECK(m.absorbing());
}

TEST_CASE("queries midway between nodes interpolate linearly") {
  const Material m = Material::tabulated({{0.9, 1.70, 0.00}, {1.1, 1.80, 0.04}});
  const IndexSample s = m.complex_index(1.0);
  CHECK(s.n == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(s.kappa == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("queries outside the table span are rejected, no extrapolation") {
  const Material m = Material::tabulated({{0.9, 1.7, 0.0}, {1.1, 1.8, 0.0}});
  CHECK_THROWS_AS(m.complex_index(0.89), ConfigError);
  CHECK_THROWS_AS(m.complex_index(1.11), ConfigError);
  CHECK_NOTHROW(m.complex_index(0.9));
  CHECK_NOTHROW(m.complex_index(1.1));
}

TEST_CASE("interpolation is continuous and monotone for monotone tables") {
  const Material m = Material::tabulated({{0.9, 1.70, 0.0}, {1.0, 1.74, 0.0}, {1.1, 1.80, 0.0}});
  double prev = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double lam = 0.9 + 0.2 * i / 200.0;
    const double n = m.complex_index(lam).n;
    if (i > 0) CHECK(n >= prev);
    prev = n;
  }
  // continuity across the interior node
  CHECK(m.complex_index(std::nextafter(1.0, 0.0)).n ==
        doctest::Approx(m.complex_index(1.0).n).epsilon(1e-12));
}

TEST_CASE("table files parse records and ignore comments") {
  const char* text =
      "# dispersion table, wavelengths in reference units\n"
      "0.90 1.70 0.00\n"
      "1.00 1.72 0.01   # middle\n"
      "\n"
      "1.10 1.75 0.02\n";
  const Material m = Material::from_table_text(text, "test");
  CHECK(m.complex_index(1.0).kappa == 0.01);
}

TEST_CASE("malformed tables are rejected with the offending constraint") {
  CHECK_THROWS_AS(Material::from_table_text("1.0 1.7 0.0\n0.9 1.7 0.0\n", "t"), ConfigError);
  CHECK_THROWS_AS(Material::from_table_text("0.9 1.7\n", "t"), ConfigError);
  CHECK_THROWS_AS(Material::from_table_text("0.9 1.7 -0.1\n1.0 1.7 0.0\n", "t"), ConfigError);
  CHECK_THROWS_AS(Material::from_table_text("0.9 0.0 0.0\n1.0 1.7 0.0\n", "t"), ConfigError);
  CHECK_THROWS_AS(Material::from_table_text("0.9 1.7 0.0\n", "t"), ConfigError);
}

TEST_CASE("lossless materials give unit-magnitude transmission for any thickness") {
  const Material m = Material::dispersion_free();
  for (double h : {0.0, 0.25, 0.93, 1.5}) {
    for (double lam : {0.9125, 1.0875}) {
      const Complex t = transmission(h, lam, m.complex_index(lam));
      CHECK(std::abs(t) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_SUITE_END();
