#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeharm/rational.hpp"
#include "treeharm/tree.hpp"

namespace treeharm {

// Finitely supported relabeling automorphism of the subtree below a
// branch root. A permutation of child letters is attached to finitely
// many relative addresses; everything beyond the support is the
// canonical identification (identity relabeling).
class Portrait {
 public:
  using Perm = std::vector<Letter>;  // image table, perm[c] = image of c

  Portrait() = default;

  // Stores the permutation at a relative address; identity tables are
  // dropped so portraits stay canonical.
  void set(const Address& rel, Perm perm);
  const Perm* at(const Address& rel) const;
  const std::map<Address, Perm>& support() const { return perms_; }
  bool is_identity() const { return perms_.empty(); }
  // Letters at positions >= support_depth() are never moved.
  std::size_t support_depth() const;

  std::vector<Letter> apply_word(std::span<const Letter> w) const;
  Address apply(const Address& rel) const;
  std::vector<Letter> invert_word(std::span<const Letter> w) const;

  Portrait inverse() const;
  // after(before(.))
  static Portrait compose(const Portrait& after, const Portrait& before);
  // Portrait acting on the subtree at relative address w as seen from w.
  Portrait restricted(const Address& w) const;

  friend bool operator==(const Portrait&, const Portrait&) = default;

 private:
  std::map<Address, Perm> perms_;
};

struct Diagnostics {
  bool ok = true;
  std::vector<std::string> issues;
  void fail(std::string msg) {
    ok = false;
    issues.push_back(std::move(msg));
  }
  explicit operator bool() const { return ok; }
};

// Tree bijection assembled from finite cut data: a bijection between the
// branches of two cuts, a relabeling isometry per matched branch, and an
// optional bijection of the finite cut interiors. With the interior part
// the element acts on vertices; without it only the boundary action is
// determined (the interior bijections form the kernel of the map from
// vertex actions to boundary actions).
class Hierarchomorphism {
 public:
  using AddressMap = std::map<Address, Address>;

  Hierarchomorphism(TreeFamily family, Cut domain, Cut range,
                    AddressMap branch_map, std::map<Address, Portrait> isometries,
                    std::optional<AddressMap> interior_map);

  static Hierarchomorphism identity(const TreeFamily& f);
  // Global relabeling automorphism fixing xi.
  static Hierarchomorphism from_portrait(const TreeFamily& f, Portrait p);

  const TreeFamily& family() const { return family_; }
  const Cut& domain_cut() const { return domain_; }
  const Cut& range_cut() const { return range_; }
  const AddressMap& branch_map() const { return branch_map_; }
  const std::map<Address, Portrait>& isometries() const { return isometries_; }
  const std::optional<AddressMap>& interior_map() const { return interior_map_; }
  bool has_interior_map() const { return interior_map_.has_value(); }
  const Portrait& isometry_at(const Address& branch_root) const;

  // branches plus interior singletons
  std::size_t piece_count() const;

  Diagnostics validate() const;

  Address apply_vertex(const Address& a) const;
  BoundaryPoint apply_boundary(const BoundaryPoint& w) const;

  // Depth shift rho(xi, u) - rho(xi, g u) along the ray; constant on the
  // ball of the domain branch containing the tail of w.
  Rat pseudoderivative(const BoundaryPoint& w) const;
  // Same value for every ray through the given on-or-below-cut vertex.
  Rat pseudoderivative_at(const Address& on_or_below_cut) const;

  friend bool operator==(const Hierarchomorphism&, const Hierarchomorphism&) = default;

 private:
  TreeFamily family_;
  Cut domain_;
  Cut range_;
  AddressMap branch_map_;
  std::map<Address, Portrait> isometries_;
  std::optional<AddressMap> interior_map_;
};

// Re-expresses g over a finer domain cut; the boundary action is
// unchanged, newly interior vertices receive their branch images.
Hierarchomorphism extend_core(const Hierarchomorphism& g, const Cut& finer);

// g2 o g1, aligned over the coarsest adequate common cut.
Hierarchomorphism compose(const Hierarchomorphism& g2, const Hierarchomorphism& g1);
Hierarchomorphism inverse(const Hierarchomorphism& g);

struct FuzzOptions {
  // Force the branch bijection to preserve boundary depths so depth
  // truncations stay invariant under the element.
  bool depth_preserving = false;
  bool with_interior = true;
};

// Deterministic-from-seed valid element: cuts within depth_budget,
// portrait support within isometry_support_budget nodes.
Hierarchomorphism random_element(const TreeFamily& f, std::uint64_t seed,
                                 int depth_budget, int isometry_support_budget,
                                 FuzzOptions opts = {});

// Deterministic-from-seed eventually periodic ray, valid in the family.
BoundaryPoint random_boundary_point(const TreeFamily& f, std::uint64_t seed,
                                    int preperiod_budget = 3, int period_budget = 3);

}  // namespace treeharm
