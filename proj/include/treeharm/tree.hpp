#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeharm/rational.hpp"

namespace treeharm {

using Letter = std::uint8_t;

// Vertex of the tree, addressed by its letter path from the basepoint xi.
// The empty address is xi itself.
class Address {
 public:
  Address() = default;
  explicit Address(std::vector<Letter> letters) : letters_(std::move(letters)) {}

  static Address root() { return Address(); }
  // Parses a digit string, e.g. "012"; "" is the root.
  static Address parse(const std::string& digits);

  bool is_root() const { return letters_.empty(); }
  std::size_t depth() const { return letters_.size(); }
  Letter letter(std::size_t i) const { return letters_[i]; }
  Letter last() const { return letters_.back(); }
  std::span<const Letter> letters() const { return letters_; }

  Address parent() const;
  Address child(Letter c) const;
  Address append(std::span<const Letter> tail) const;
  Address prefix(std::size_t len) const;
  std::span<const Letter> suffix_from(std::size_t len) const;
  bool is_prefix_of(const Address& other) const;
  bool is_strict_prefix_of(const Address& other) const;

  std::string str() const;

  friend bool operator==(const Address&, const Address&) = default;
  friend bool operator<(const Address& a, const Address& b) {
    return a.letters_ < b.letters_;
  }

 private:
  std::vector<Letter> letters_;
};

// Homogeneous locally finite metric tree: the basepoint has root_degree
// children, every other vertex child_degree children, and the length of
// the edge into a child depends only on the child's letter. root_degree
// >= 3 and child_degree >= 2 keep every vertex on at least three edges.
class TreeFamily {
 public:
  TreeFamily(int root_degree, int child_degree);
  TreeFamily(int root_degree, int child_degree, std::vector<Rat> root_lengths,
             std::vector<Rat> child_lengths);

  // (p+1)-regular tree with unit edges.
  static TreeFamily regular(int p);
  // 4-regular tree with two letter classes: root letters {0,1} carry l1,
  // {2,3} carry l2; child letters {0} carry l1, {1,2} carry l2.
  static TreeFamily free_group(const Rat& l1, const Rat& l2);

  int root_degree() const { return root_degree_; }
  int child_degree() const { return child_degree_; }
  const std::vector<Rat>& root_lengths() const { return root_lengths_; }
  const std::vector<Rat>& child_lengths() const { return child_lengths_; }
  bool unit_lengths() const;

  // Number of children of a vertex.
  int degree_at(const Address& a) const {
    return a.is_root() ? root_degree_ : child_degree_;
  }
  // Length of the edge from `parent` into its child with letter c.
  Rat letter_length(bool parent_is_root, Letter c) const;
  // Length of the edge from parent(a) into a; a must not be the root.
  Rat edge_length_into(const Address& a) const;
  // rho(xi, a)
  Rat depth_length(const Address& a) const;
  Rat min_edge_length() const;

  bool valid(const Address& a) const;
  bool valid_letter(bool parent_is_root, Letter c) const;

  friend bool operator==(const TreeFamily&, const TreeFamily&) = default;

 private:
  int root_degree_ = 0;
  int child_degree_ = 0;
  std::vector<Rat> root_lengths_;
  std::vector<Rat> child_lengths_;
};

// Eventually periodic ray from xi, i.e. a boundary point with finite
// data. Canonical form: primitive period, shortest preperiod; equality
// of canonical forms is equality of the infinite words.
class BoundaryPoint {
 public:
  BoundaryPoint(Address preperiod, std::vector<Letter> period);

  // Parses "01(10)"; the parenthesised part is the period.
  static BoundaryPoint parse(const std::string& text);

  const Address& preperiod() const { return preperiod_; }
  std::span<const Letter> period() const { return period_; }

  Letter letter(std::size_t i) const;
  // Prefix of the infinite word.
  Address ray_vertex(std::size_t depth) const;
  bool passes_through(const Address& a) const;
  bool valid_in(const TreeFamily& f) const;

  std::string str() const;

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;

 private:
  Address preperiod_;
  std::vector<Letter> period_;
};

// Finite maximal antichain of addresses: the boundary of a complete
// subtree containing xi. Boundary elements are kept sorted; interiors
// are derived, never stored.
class Cut {
 public:
  Cut() = default;
  explicit Cut(std::vector<Address> boundary);

  static Cut root_cut() { return Cut({Address::root()}); }

  const std::vector<Address>& boundary() const { return boundary_; }
  std::size_t size() const { return boundary_.size(); }
  std::size_t max_depth() const;
  bool contains(const Address& a) const;
  int index_of(const Address& a) const;  // -1 if absent
  // Index of the boundary element whose branch contains the given
  // vertex/ray; -1 if the vertex lies strictly above the cut.
  int locate(const Address& a) const;
  int locate(const BoundaryPoint& w) const;
  // All proper prefixes of boundary elements, sorted.
  std::vector<Address> interior() const;

  friend bool operator==(const Cut&, const Cut&) = default;

 private:
  std::vector<Address> boundary_;
};

// Branch of the tree: the full subtree below a non-root address, the
// carrier of the ball B[branch] on the absolute.
struct Branch {
  Address root_address;
  explicit Branch(Address a);
};

// -- operations ------------------------------------------------------

// Longest common prefix: the vertex of the a-b path nearest to xi.
Address meet(const Address& a, const Address& b);
Rat distance(const TreeFamily& f, const Address& a, const Address& b);
int simplicial_distance(const Address& a, const Address& b);

// theta(a,b) = 2 min rho(xi, .) over the a-b path. For two equal
// boundary points the value is +infinity, reported as nullopt.
Rat theta(const TreeFamily& f, const Address& a, const Address& b);
Rat theta(const TreeFamily& f, const Address& a, const BoundaryPoint& w);
std::optional<Rat> theta(const TreeFamily& f, const BoundaryPoint& v,
                         const BoundaryPoint& w);

bool validate_cut(const TreeFamily& f, const Cut& c);
// Replaces u by all of its children; one incompressible refinement step.
Cut refine_cut(const TreeFamily& f, const Cut& c, const Address& u);
// All addresses of simplicial depth k (k = 0 gives the root cut).
Cut depth_cut(const TreeFamily& f, int k);
// True when every element of `fine` has a weak prefix in `coarse`.
bool cut_refines(const Cut& fine, const Cut& coarse);
// Coarsest common refinement.
Cut join_cuts(const Cut& a, const Cut& b);
// For a in fine's boundary, the element of coarse's boundary on the
// path from xi to a. Throws if the cuts are not nested.
Address retraction(const Cut& fine, const Cut& coarse, const Address& a);

// All addresses with simplicial depth <= depth, sorted.
std::vector<Address> vertices_to_depth(const TreeFamily& f, int depth);

}  // namespace treeharm
