#pragma once

#include <string>
#include <vector>

#include "wdmdiff/errors.hpp"

namespace wdmdiff {

struct IndexSample {
  double n = 0.0;      // refractive index
  double kappa = 0.0;  // extinction coefficient
};

/// Wavelength-dependent complex refractive index of the layer substance.
/// Either a constant (n0, kappa0) or a table interpolated piecewise-linearly;
/// wavelengths are in reference-wavelength units. Immutable after creation.
class Material {
 public:
  struct Node {
    double wavelength = 0.0;
    double n = 0.0;
    double kappa = 0.0;
  };

  static Material constant(double n0, double kappa0, std::string name = "constant");
  static Material tabulated(std::vector<Node> nodes, std::string name = "tabulated");

  // The shipped material: n = 1.72, kappa = 0 at every wavelength.
  static Material dispersion_free();

  // Parse "wavelength n kappa" per line; '#' starts a comment.
  static Material from_table_file(const std::string& path);
  static Material from_table_text(const std::string& text, std::string name);

  IndexSample complex_index(double wavelength) const;
  bool absorbing() const;  // kappa > 0 anywhere
  const std::string& name() const { return name_; }
  bool is_constant() const { return constant_; }

 private:
  Material() = default;
  bool constant_ = true;
  double n0_ = 0.0;
  double kappa0_ = 0.0;
  std::vector<Node> nodes_;
  std::string name_;
};

// Resolve a material reference from a config: a built-in name
// ("dispersion-free") or a dispersion table path.
Material resolve_material(const std::string& reference);

}  // namespace wdmdiff
