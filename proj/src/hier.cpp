#include "treeharm/hier.hpp"

#include <algorithm>
#include <stdexcept>

#include "treeharm/random.hpp"

namespace treeharm {

// -- Portrait ---------------------------------------------------------

namespace {

bool is_identity_perm(const Portrait::Perm& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

Portrait::Perm inverse_perm(const Portrait::Perm& p) {
  Portrait::Perm inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<Letter>(i);
  return inv;
}

}  // namespace

void Portrait::set(const Address& rel, Perm perm) {
  if (is_identity_perm(perm)) {
    perms_.erase(rel);
    return;
  }
  perms_[rel] = std::move(perm);
}

const Portrait::Perm* Portrait::at(const Address& rel) const {
  const auto it = perms_.find(rel);
  return it == perms_.end() ? nullptr : &it->second;
}

std::size_t Portrait::support_depth() const {
  std::size_t d = 0;
  for (const auto& [rel, perm] : perms_) d = std::max(d, rel.depth() + 1);
  return d;
}

std::vector<Letter> Portrait::apply_word(std::span<const Letter> w) const {
  std::vector<Letter> out(w.size());
  Address pos;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Perm* p = at(pos);
    Letter c = w[i];
    if (p) {
      if (c >= p->size()) throw std::invalid_argument("Portrait: letter out of range");
      out[i] = (*p)[c];
    } else {
      out[i] = c;
    }
    pos = pos.child(c);
  }
  return out;
}

Address Portrait::apply(const Address& rel) const {
  return Address(apply_word(rel.letters()));
}

std::vector<Letter> Portrait::invert_word(std::span<const Letter> w) const {
  std::vector<Letter> out(w.size());
  Address pos;  // domain-side path
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Perm* p = at(pos);
    Letter pre = w[i];
    if (p) {
      bool found = false;
      for (std::size_t c = 0; c < p->size(); ++c)
        if ((*p)[c] == w[i]) {
          pre = static_cast<Letter>(c);
          found = true;
          break;
        }
      if (!found) throw std::invalid_argument("Portrait: letter not in image");
    }
    out[i] = pre;
    pos = pos.child(pre);
  }
  return out;
}

Portrait Portrait::inverse() const {
  Portrait inv;
  for (const auto& [rel, perm] : perms_) inv.set(apply(rel), inverse_perm(perm));
  return inv;
}

Portrait Portrait::compose(const Portrait& after, const Portrait& before) {
  Portrait out;
  std::vector<Address> nodes;
  for (const auto& [rel, perm] : before.perms_) nodes.push_back(rel);
  for (const auto& [rel, perm] : after.perms_)
    nodes.push_back(Address(before.invert_word(rel.letters())));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (const Address& rel : nodes) {
    const Perm* pb = before.at(rel);
    const Perm* pa = after.at(before.apply(rel));
    std::size_t n = pb ? pb->size() : (pa ? pa->size() : 0);
    if (pb && pa && pb->size() != pa->size())
      throw std::invalid_argument("Portrait: permutation size mismatch");
    Perm combined(n);
    for (std::size_t c = 0; c < n; ++c) {
      Letter mid = pb ? (*pb)[c] : static_cast<Letter>(c);
      combined[c] = pa ? (*pa)[mid] : mid;
    }
    out.set(rel, std::move(combined));
  }
  return out;
}

Portrait Portrait::restricted(const Address& w) const {
  Portrait out;
  for (const auto& [rel, perm] : perms_)
    if (w.is_prefix_of(rel))
      out.set(Address(std::vector<Letter>(rel.letters().begin() + w.depth(),
                                          rel.letters().end())),
              perm);
  return out;
}

// -- Hierarchomorphism ------------------------------------------------

Hierarchomorphism::Hierarchomorphism(TreeFamily family, Cut domain, Cut range,
                                     AddressMap branch_map,
                                     std::map<Address, Portrait> isometries,
                                     std::optional<AddressMap> interior_map)
    : family_(std::move(family)),
      domain_(std::move(domain)),
      range_(std::move(range)),
      branch_map_(std::move(branch_map)),
      isometries_(std::move(isometries)),
      interior_map_(std::move(interior_map)) {}

Hierarchomorphism Hierarchomorphism::identity(const TreeFamily& f) {
  return Hierarchomorphism(f, Cut::root_cut(), Cut::root_cut(),
                           {{Address::root(), Address::root()}}, {},
                           AddressMap{});
}

Hierarchomorphism Hierarchomorphism::from_portrait(const TreeFamily& f, Portrait p) {
  std::map<Address, Portrait> iso;
  if (!p.is_identity()) iso[Address::root()] = std::move(p);
  return Hierarchomorphism(f, Cut::root_cut(), Cut::root_cut(),
                           {{Address::root(), Address::root()}}, std::move(iso),
                           AddressMap{});
}

const Portrait& Hierarchomorphism::isometry_at(const Address& branch_root) const {
  static const Portrait kIdentity;
  const auto it = isometries_.find(branch_root);
  return it == isometries_.end() ? kIdentity : it->second;
}

std::size_t Hierarchomorphism::piece_count() const {
  return domain_.size() + domain_.interior().size();
}

Diagnostics Hierarchomorphism::validate() const {
  Diagnostics d;
  if (!validate_cut(family_, domain_)) d.fail("domain cut is not a valid cut");
  if (!validate_cut(family_, range_)) d.fail("range cut is not a valid cut");
  if (domain_.size() != range_.size())
    d.fail("domain and range cuts have different sizes");
  if (branch_map_.size() != domain_.size())
    d.fail("branch map does not cover the domain boundary");
  std::vector<Address> images;
  for (const auto& [u, v] : branch_map_) {
    if (!domain_.contains(u)) d.fail("branch map key off the domain boundary: " + u.str());
    if (!range_.contains(v)) d.fail("branch map value off the range boundary: " + v.str());
    images.push_back(v);
  }
  std::sort(images.begin(), images.end());
  if (std::adjacent_find(images.begin(), images.end()) != images.end())
    d.fail("branch map is not injective");

  for (const auto& [u, portrait] : isometries_) {
    if (!domain_.contains(u)) {
      d.fail("isometry keyed off the domain boundary: " + u.str());
      continue;
    }
    for (const auto& [rel, perm] : portrait.support()) {
      const bool node_is_root = u.is_root() && rel.is_root();
      const std::size_t deg =
          node_is_root ? family_.root_degree() : family_.child_degree();
      if (perm.size() != deg) {
        d.fail("permutation size mismatch at " + u.str() + "/" + rel.str());
        continue;
      }
      std::vector<bool> seen(deg, false);
      for (std::size_t c = 0; c < deg; ++c) {
        if (perm[c] >= deg) {
          d.fail("letter out of range at " + u.str() + "/" + rel.str());
          break;
        }
        if (seen[perm[c]]) {
          d.fail("not a permutation at " + u.str() + "/" + rel.str());
          break;
        }
        seen[perm[c]] = true;
        if (family_.letter_length(node_is_root, static_cast<Letter>(c)) !=
            family_.letter_length(node_is_root, perm[c]))
          d.fail("permutation maps across length classes at " + u.str() + "/" +
                 rel.str());
      }
    }
  }

  if (interior_map_) {
    const auto dom_int = domain_.interior();
    const auto ran_int = range_.interior();
    if (interior_map_->size() != dom_int.size())
      d.fail("interior map does not cover the domain interior");
    std::vector<Address> vals;
    for (const auto& [a, b] : *interior_map_) {
      if (!std::binary_search(dom_int.begin(), dom_int.end(), a))
        d.fail("interior key not interior: " + a.str());
      vals.push_back(b);
    }
    std::sort(vals.begin(), vals.end());
    if (vals != ran_int) d.fail("interior map is not onto the range interior");
  }
  return d;
}

Address Hierarchomorphism::apply_vertex(const Address& a) const {
  const int bi = domain_.locate(a);
  if (bi >= 0) {
    const Address& u = domain_.boundary()[bi];
    const auto rel = a.suffix_from(u.depth());
    return branch_map_.at(u).append(isometry_at(u).apply_word(rel));
  }
  if (!interior_map_)
    throw std::invalid_argument(
        "apply_vertex: interior vertex but no interior data: " + a.str());
  const auto it = interior_map_->find(a);
  if (it == interior_map_->end())
    throw std::invalid_argument("apply_vertex: vertex missing from interior map: " +
                                a.str());
  return it->second;
}

BoundaryPoint Hierarchomorphism::apply_boundary(const BoundaryPoint& w) const {
  const int bi = domain_.locate(w);
  if (bi < 0)
    throw std::invalid_argument("apply_boundary: ray misses the domain cut");
  const Address& u = domain_.boundary()[bi];
  const Address& u2 = branch_map_.at(u);
  const Portrait& iso = isometry_at(u);

  const std::size_t pre_rel =
      w.preperiod().depth() > u.depth() ? w.preperiod().depth() - u.depth() : 0;
  const std::size_t head_len = std::max(iso.support_depth(), pre_rel);

  // Image of the first head_len relative letters through the portrait;
  // beyond the support the word is unchanged, so the period is the input
  // period rotated to the cut position.
  std::vector<Letter> head(head_len);
  Address pos;
  for (std::size_t i = 0; i < head_len; ++i) {
    const Letter c = w.letter(u.depth() + i);
    const Portrait::Perm* p = iso.at(pos);
    head[i] = p ? (*p)[c] : c;
    pos = pos.child(c);
  }
  const std::size_t global = u.depth() + head_len;
  const std::size_t shift = (global - w.preperiod().depth()) % w.period().size();
  std::vector<Letter> period(w.period().begin(), w.period().end());
  std::rotate(period.begin(), period.begin() + shift, period.end());
  return BoundaryPoint(u2.append(head), std::move(period));
}

Rat Hierarchomorphism::pseudoderivative(const BoundaryPoint& w) const {
  const int bi = domain_.locate(w);
  if (bi < 0)
    throw std::invalid_argument("pseudoderivative: ray misses the domain cut");
  const Address& u = domain_.boundary()[bi];
  return family_.depth_length(u) - family_.depth_length(branch_map_.at(u));
}

Rat Hierarchomorphism::pseudoderivative_at(const Address& a) const {
  const int bi = domain_.locate(a);
  if (bi < 0)
    throw std::invalid_argument("pseudoderivative_at: vertex above the domain cut");
  const Address& u = domain_.boundary()[bi];
  return family_.depth_length(u) - family_.depth_length(branch_map_.at(u));
}

// -- extend / compose / inverse ----------------------------------------

Hierarchomorphism extend_core(const Hierarchomorphism& g, const Cut& finer) {
  if (!cut_refines(finer, g.domain_cut()))
    throw std::invalid_argument("extend_core: cut does not refine the domain cut");

  Hierarchomorphism::AddressMap bm;
  std::map<Address, Portrait> iso;
  for (const Address& v : finer.boundary()) {
    const int bi = g.domain_cut().locate(v);
    const Address& u = g.domain_cut().boundary()[bi];
    const Address rel(std::vector<Letter>(v.letters().begin() + u.depth(),
                                          v.letters().end()));
    const Portrait& pu = g.isometry_at(u);
    bm[v] = g.branch_map().at(u).append(pu.apply_word(rel.letters()));
    Portrait restricted = pu.restricted(rel);
    if (!restricted.is_identity()) iso[v] = std::move(restricted);
  }

  std::optional<Hierarchomorphism::AddressMap> interior;
  if (g.has_interior_map()) {
    interior = *g.interior_map();
    for (const Address& x : finer.interior())
      if (!interior->count(x)) (*interior)[x] = g.apply_vertex(x);
  }

  std::vector<Address> range_elems;
  range_elems.reserve(bm.size());
  for (const auto& [v, v2] : bm) range_elems.push_back(v2);
  return Hierarchomorphism(g.family(), finer, Cut(std::move(range_elems)),
                           std::move(bm), std::move(iso), std::move(interior));
}

Hierarchomorphism compose(const Hierarchomorphism& g2, const Hierarchomorphism& g1) {
  if (!(g1.family() == g2.family()))
    throw std::invalid_argument("compose: elements live on different families");

  const Cut middle = join_cuts(g1.range_cut(), g2.domain_cut());

  // Pull the middle cut back through g1 to refine g1's domain so that the
  // extended g1 has range exactly `middle`.
  std::map<Address, Address> reverse;
  for (const auto& [u, v] : g1.branch_map()) reverse[v] = u;
  std::vector<Address> pulled;
  pulled.reserve(middle.size());
  for (const Address& c : middle.boundary()) {
    const int ri = g1.range_cut().locate(c);
    const Address& v = g1.range_cut().boundary()[ri];
    const Address& u = reverse.at(v);
    const auto rel = c.suffix_from(v.depth());
    pulled.push_back(u.append(g1.isometry_at(u).invert_word(rel)));
  }

  const Hierarchomorphism a = extend_core(g1, Cut(std::move(pulled)));
  const Hierarchomorphism b = extend_core(g2, middle);

  Hierarchomorphism::AddressMap bm;
  std::map<Address, Portrait> iso;
  for (const auto& [u, mid] : a.branch_map()) {
    bm[u] = b.branch_map().at(mid);
    Portrait combined = Portrait::compose(b.isometry_at(mid), a.isometry_at(u));
    if (!combined.is_identity()) iso[u] = std::move(combined);
  }

  std::optional<Hierarchomorphism::AddressMap> interior;
  if (a.has_interior_map() && b.has_interior_map()) {
    interior.emplace();
    for (const auto& [x, y] : *a.interior_map())
      (*interior)[x] = b.interior_map()->at(y);
  }

  return Hierarchomorphism(g1.family(), a.domain_cut(), b.range_cut(),
                           std::move(bm), std::move(iso), std::move(interior));
}

Hierarchomorphism inverse(const Hierarchomorphism& g) {
  Hierarchomorphism::AddressMap bm;
  std::map<Address, Portrait> iso;
  for (const auto& [u, v] : g.branch_map()) {
    bm[v] = u;
    Portrait inv = g.isometry_at(u).inverse();
    if (!inv.is_identity()) iso[v] = std::move(inv);
  }
  std::optional<Hierarchomorphism::AddressMap> interior;
  if (g.has_interior_map()) {
    interior.emplace();
    for (const auto& [a, b] : *g.interior_map()) (*interior)[b] = a;
  }
  return Hierarchomorphism(g.family(), g.range_cut(), g.domain_cut(),
                           std::move(bm), std::move(iso), std::move(interior));
}

// -- fuzzing -----------------------------------------------------------

namespace {

Cut random_cut(const TreeFamily& f, Rng& rng, int depth_budget, int steps) {
  Cut c = Cut::root_cut();
  for (int s = 0; s < steps; ++s) {
    std::vector<Address> eligible;
    for (const Address& a : c.boundary())
      if (static_cast<int>(a.depth()) < depth_budget) eligible.push_back(a);
    if (eligible.empty()) break;
    c = refine_cut(f, c, eligible[rng.below(eligible.size())]);
  }
  return c;
}

Portrait::Perm random_class_perm(const TreeFamily& f, Rng& rng, bool at_root) {
  const std::size_t deg = at_root ? f.root_degree() : f.child_degree();
  // Shuffle within equal-length letter classes so the relabeling stays
  // an isometry.
  Portrait::Perm perm(deg);
  std::vector<bool> grouped(deg, false);
  for (std::size_t c = 0; c < deg; ++c) {
    if (grouped[c]) continue;
    std::vector<Letter> cls;
    for (std::size_t d = c; d < deg; ++d)
      if (f.letter_length(at_root, static_cast<Letter>(d)) ==
          f.letter_length(at_root, static_cast<Letter>(c))) {
        cls.push_back(static_cast<Letter>(d));
        grouped[d] = true;
      }
    std::vector<Letter> img = cls;
    for (std::size_t i = img.size(); i > 1; --i)
      std::swap(img[i - 1], img[rng.below(i)]);
    for (std::size_t i = 0; i < cls.size(); ++i) perm[cls[i]] = img[i];
  }
  return perm;
}

}  // namespace

Hierarchomorphism random_element(const TreeFamily& f, std::uint64_t seed,
                                 int depth_budget, int isometry_support_budget,
                                 FuzzOptions opts) {
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0x1234567ULL);
  const int steps =
      depth_budget <= 0 ? 0 : 1 + static_cast<int>(rng.below(2 * depth_budget));

  const Cut dom = random_cut(f, rng, depth_budget, steps);
  Cut ran = dom;
  if (!opts.depth_preserving) {
    // An independent cut with the same number of refinement steps has a
    // boundary of the same size.
    const int done = static_cast<int>(dom.interior().size());
    ran = random_cut(f, rng, depth_budget, done);
    while (static_cast<int>(ran.interior().size()) < done) {
      std::vector<Address> eligible;
      for (const Address& a : ran.boundary())
        if (static_cast<int>(a.depth()) < depth_budget + 2) eligible.push_back(a);
      ran = refine_cut(f, ran, eligible[rng.below(eligible.size())]);
    }
  }

  // Random bijection of boundaries; within depth classes when requested.
  std::vector<Address> targets = ran.boundary();
  if (opts.depth_preserving) {
    std::vector<std::size_t> idx(targets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t d = 0; d <= ran.max_depth(); ++d) {
      std::vector<std::size_t> cls;
      for (std::size_t i = 0; i < targets.size(); ++i)
        if (ran.boundary()[i].depth() == d) cls.push_back(i);
      for (std::size_t i = cls.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(idx[cls[i - 1]], idx[cls[j]]);
      }
    }
    std::vector<Address> shuffled(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
      shuffled[i] = ran.boundary()[idx[i]];
    targets = std::move(shuffled);
  } else {
    for (std::size_t i = targets.size(); i > 1; --i)
      std::swap(targets[i - 1], targets[rng.below(i)]);
  }
  Hierarchomorphism::AddressMap bm;
  for (std::size_t i = 0; i < dom.size(); ++i) bm[dom.boundary()[i]] = targets[i];

  std::map<Address, Portrait> iso;
  for (int spent = 0; spent < isometry_support_budget; ++spent) {
    const Address& u = dom.boundary()[rng.below(dom.size())];
    const int rel_depth = static_cast<int>(rng.below(3));
    Address rel;
    for (int d = 0; d < rel_depth; ++d)
      rel = rel.child(static_cast<Letter>(rng.below(f.child_degree())));
    const bool at_root = u.is_root() && rel.is_root();
    iso[u].set(rel, random_class_perm(f, rng, at_root));
    if (iso[u].is_identity()) iso.erase(u);
  }

  std::optional<Hierarchomorphism::AddressMap> interior;
  if (opts.with_interior) {
    const auto dom_int = dom.interior();
    auto ran_int = ran.interior();
    for (std::size_t i = ran_int.size(); i > 1; --i)
      std::swap(ran_int[i - 1], ran_int[rng.below(i)]);
    interior.emplace();
    for (std::size_t i = 0; i < dom_int.size(); ++i)
      (*interior)[dom_int[i]] = ran_int[i];
  }

  return Hierarchomorphism(f, dom, ran, std::move(bm), std::move(iso),
                           std::move(interior));
}

BoundaryPoint random_boundary_point(const TreeFamily& f, std::uint64_t seed,
                                    int preperiod_budget, int period_budget) {
  Rng rng(seed * 0x2545f4914f6cdd1dULL + 0x9e3779b9ULL);
  const int pre_len = static_cast<int>(rng.below(preperiod_budget + 1));
  Address pre;
  for (int i = 0; i < pre_len; ++i) {
    const int deg = f.degree_at(pre);
    pre = pre.child(static_cast<Letter>(rng.below(deg)));
  }
  const int per_len = 1 + static_cast<int>(rng.below(period_budget));
  std::vector<Letter> period(per_len);
  const int limit = pre.is_root()
                        ? std::min(f.root_degree(), f.child_degree())
                        : f.child_degree();
  period[0] = static_cast<Letter>(rng.below(limit));
  for (int i = 1; i < per_len; ++i)
    period[i] = static_cast<Letter>(rng.below(f.child_degree()));
  return BoundaryPoint(pre, std::move(period));
}

}  // namespace treeharm
