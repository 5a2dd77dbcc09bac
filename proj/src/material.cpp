#include "wdmdiff/material.hpp"

#include <fstream>
#include <sstream>

namespace wdmdiff {

Material Material::constant(double n0, double kappa0, std::string name) {
  if (!(n0 > 0.0)) throw ConfigError("material: refractive index must be positive");
  if (kappa0 < 0.0) throw ConfigError("material: extinction coefficient must be >= 0");
  Material m;
  m.constant_ = true;
  m.n0_ = n0;
  m.kappa0_ = kappa0;
  m.name_ = std::move(name);
  return m;
}

Material Material::tabulated(std::vector<Node> nodes, std::string name) {
  if (nodes.size() < 2) throw ConfigError("material: table needs at least two nodes");
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i].wavelength > 0.0)) throw ConfigError("material: wavelengths must be positive");
    if (!(nodes[i].n > 0.0)) throw ConfigError("material: refractive index must be positive");
    if (nodes[i].kappa < 0.0) throw ConfigError("material: extinction coefficient must be >= 0");
    if (i > 0 && !(nodes[i].wavelength > nodes[i - 1].wavelength))
      throw ConfigError("material: table wavelengths must be strictly increasing");
  }
  Material m;
  m.constant_ = false;
  m.nodes_ = std::move(nodes);
  m.name_ = std::move(name);
  return m;
}

Material Material::dispersion_free() { return constant(1.72, 0.0, "dispersion-free"); }

Material Material::from_table_text(const std::string& text, std::string name) {
  std::vector<Node> nodes;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Node node;
    if (!(ls >> node.wavelength)) continue;  // blank or comment-only line
    if (!(ls >> node.n >> node.kappa))
      throw ConfigError("material table line " + std::to_string(lineno) +
                        ": expected 'wavelength n kappa'");
    std::string extra;
    if (ls >> extra)
      throw ConfigError("material table line " + std::to_string(lineno) + ": trailing fields");
    nodes.push_back(node);
  }
  return tabulated(std::move(nodes), std::move(name));
}

Material Material::from_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open material table: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_table_text(buf.str(), path);
}

IndexSample Material::complex_index(double wavelength) const {
  if (constant_) {
    if (!(wavelength > 0.0)) throw ConfigError("complex_index: wavelength must be positive");
    return {n0_, kappa0_};
  }
  if (wavelength < nodes_.front().wavelength || wavelength > nodes_.back().wavelength)
    throw ConfigError("complex_index: wavelength " + std::to_string(wavelength) +
                      " outside table span [" + std::to_string(nodes_.front().wavelength) +
                      ", " + std::to_string(nodes_.back().wavelength) + "]");
  // Upper-bound search over the sorted nodes, then linear interpolation.
  size_t hi = 1;
  while (hi + 1 < nodes_.size() && nodes_[hi].wavelength < wavelength) ++hi;
  const Node& a = nodes_[hi - 1];
  const Node& b = nodes_[hi];
  const double t = (wavelength - a.wavelength) / (b.wavelength - a.wavelength);
  return {a.n + t * (b.n - a.n), a.kappa + t * (b.kappa - a.kappa)};
}

bool Material::absorbing() const {
  if (constant_) return kappa0_ > 0.0;
  for (const Node& node : nodes_)
    if (node.kappa > 0.0) return true;
  return false;
}

Material resolve_material(const std::string& reference) {
  if (reference == "dispersion-free") return Material::dispersion_free();
  if (reference.rfind("table:", 0) == 0) return Material::from_table_file(reference.substr(6));
  // Anything else is treated as a table path.
  return Material::from_table_file(reference);
}

}  // namespace wdmdiff
