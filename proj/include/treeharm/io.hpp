#pragma once

#include <string>
#include <vector>

#include "treeharm/boundary.hpp"
#include "treeharm/gram.hpp"
#include "treeharm/hier.hpp"
#include "treeharm/tree.hpp"

namespace treeharm::io {

// {"root_degree":3,"child_degree":2,"lengths":{"default":1}} with
// optional per-letter tables "root" and "child"; rationals are written
// as integers when possible, otherwise as "p/q" strings.
std::string family_to_json(const TreeFamily& f);
TreeFamily family_from_json(const std::string& text);

// "preset:t2", "preset:t5", "preset:freegroup:1,2", or a path to a JSON
// descriptor file.
TreeFamily parse_family_spec(const std::string& spec);

// {"domain":[...],"range":[...],"match":{...},"isometries":{...},
//  "interior":{...}}; permutations in cycle notation over digit letters.
// Serialization is canonical, so round trips are bit-exact.
std::string element_to_json(const Hierarchomorphism& g);
Hierarchomorphism element_from_json(const TreeFamily& f, const std::string& text);

// {"cut":[...],"values":[...]}
std::string measure_to_json(const CylinderMeasure& m);
CylinderMeasure measure_from_json(const std::string& text);

// Context descriptor {"family":{...},"lambda":0.8,"vertices":[...]};
// parsing rebuilds the kernel matrix and factorization from it.
std::string context_to_json(const GramContext& ctx);
GramContext context_from_json(const std::string& text);

std::string matrix_to_csv(const linalg::Matrix& m);

std::string perm_to_cycles(const std::vector<Letter>& perm);
std::vector<Letter> cycles_to_perm(const std::string& cycles, std::size_t degree);

// Minimal CSV assembly with deterministic float formatting.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }
  void write(const std::string& path) const;

  static std::string num(double v);
  static std::string num(int v);

 private:
  std::size_t width_;
  std::string text_;
};

std::string read_file(const std::string& path);

}  // namespace treeharm::io
