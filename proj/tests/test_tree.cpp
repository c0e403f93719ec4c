#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "materialized_tree.hpp"
#include "treeharm/random.hpp"
#include "treeharm/tree.hpp"

using namespace treeharm;
using treeharm_test::MaterializedTree;

namespace {

const TreeFamily t2 = TreeFamily::regular(2);
const TreeFamily t3 = TreeFamily::regular(3);
const TreeFamily fg = TreeFamily::free_group(Rat(1), Rat(2));

Address A(const std::string& s) { return Address::parse(s); }

// Independent maximality check: every word of the covering depth has
// exactly one prefix on the cut.
bool covers_all_rays(const TreeFamily& f, const Cut& c) {
  const std::size_t d = c.max_depth();
  std::vector<Address> words = {Address::root()};
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Address> next;
    for (const Address& w : words)
      for (Letter ch = 0; ch < static_cast<Letter>(f.degree_at(w)); ++ch)
        next.push_back(w.child(ch));
    words = std::move(next);
  }
  for (const Address& w : words) {
    int hits = 0;
    for (std::size_t len = 0; len <= w.depth(); ++len)
      if (c.contains(w.prefix(len))) ++hits;
    if (hits != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("meet is the longest common prefix") {
  CHECK(meet(A("00"), A("01")) == A("0"));
  CHECK(meet(Address::root(), A("12")) == Address::root());
  CHECK(meet(A("010"), A("01")) == A("01"));
}

TEST_CASE("distance on the dyadic tree with unit edges") {
  CHECK(distance(t2, A("0"), A("1")) == Rat(2));
  CHECK(distance(t2, A("0110"), A("0110")) == Rat(0));
}

TEST_CASE("distance matches path enumeration on a materialized tree") {
  for (const TreeFamily& f : {t2, fg}) {
    const MaterializedTree mt = MaterializedTree::build(f, 3);
    for (const auto& [na, ia] : mt.id)
      for (const auto& [nb, ib] : mt.id) {
        const double want = mt.path_length(na, nb);
        const double got = distance(f, A(na), A(nb)).to_double();
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
  }
}

TEST_CASE("letter classes give the free-group distances") {
  // alpha-child of the root at length 1, beta-child at length 2
  CHECK(distance(fg, A("0"), A("2")) == Rat(3));
  const MaterializedTree mt = MaterializedTree::build(fg, 3);
  CHECK(mt.path_length("0", "2") == doctest::Approx(3.0));
}

TEST_CASE("simplicial distance") {
  CHECK(simplicial_distance(A("0"), A("1")) == 2);
  CHECK(simplicial_distance(Address::root(), A("012")) == 3);
  CHECK(simplicial_distance(A("00"), A("01")) == 2);
}

TEST_CASE("theta on vertices") {
  CHECK(theta(t2, A("00"), A("01")) == Rat(2));
  CHECK(theta(t2, Address::root(), A("0110")) == Rat(0));
  // theta(a,a) doubles the depth
  CHECK(theta(t2, A("011"), A("011")) == Rat(6));
  const MaterializedTree mt = MaterializedTree::build(t2, 4);
  for (const auto& [na, ia] : mt.id)
    for (const auto& [nb, ib] : mt.id)
      CHECK(theta(t2, A(na), A(nb)).to_double() ==
            doctest::Approx(mt.theta(na, nb)).epsilon(1e-12));
}

TEST_CASE("theta on boundary points") {
  const BoundaryPoint zeros(Address::root(), {0});
  const BoundaryPoint via1(A("1"), {0});
  CHECK(!theta(t2, zeros, zeros).has_value());  // equal points: +infinity
  CHECK(theta(t2, zeros, via1).value() == Rat(0));
  CHECK(theta(t2, A("00"), zeros) == Rat(4));
  const BoundaryPoint deep0(A("001"), {0, 1});
  const BoundaryPoint deep1(A("000"), {0, 1});
  CHECK(theta(t2, deep0, deep1).value() == Rat(4));
}

TEST_CASE("boundary point canonical form") {
  CHECK(BoundaryPoint(A("0"), {1, 0}) == BoundaryPoint(Address::root(), {0, 1}));
  CHECK(BoundaryPoint(A("00"), {0}) == BoundaryPoint(Address::root(), {0}));
  CHECK(BoundaryPoint(Address::root(), {1, 0, 1, 0}) ==
        BoundaryPoint(Address::root(), {1, 0}));
  CHECK(BoundaryPoint::parse("01(10)").str() == "01(10)");
  CHECK(BoundaryPoint(A("01"), {1, 0}).passes_through(A("011")));
}

TEST_CASE("refine_cut") {
  const Cut root = Cut::root_cut();
  const Cut d1 = refine_cut(t2, root, Address::root());
  CHECK(d1 == Cut({A("0"), A("1"), A("2")}));
  CHECK(refine_cut(t2, d1, A("0")) == Cut({A("00"), A("01"), A("1"), A("2")}));
  CHECK_THROWS(refine_cut(t2, d1, A("01")));
}

TEST_CASE("random refinement chains stay valid cuts") {
  Rng rng(7);
  for (const TreeFamily& f : {t2, t3, fg}) {
    Cut c = Cut::root_cut();
    for (int step = 0; step < 25; ++step) {
      c = refine_cut(f, c, c.boundary()[rng.below(c.size())]);
      REQUIRE(validate_cut(f, c));
      REQUIRE(covers_all_rays(f, c));
    }
  }
}

TEST_CASE("refinement grows the boundary by degree minus one") {
  Cut c = Cut::root_cut();
  Cut d = refine_cut(t2, c, Address::root());
  CHECK(d.size() == c.size() + t2.root_degree() - 1);
  Cut e = refine_cut(t2, d, A("1"));
  CHECK(e.size() == d.size() + t2.child_degree() - 1);
}

TEST_CASE("depth cuts") {
  CHECK(depth_cut(t2, 0) == Cut::root_cut());
  CHECK(depth_cut(t2, 1) == Cut({A("0"), A("1"), A("2")}));
  for (int p : {2, 3}) {
    const TreeFamily f = TreeFamily::regular(p);
    for (int k = 1; k <= 5; ++k) {
      std::size_t want = (p + 1);
      for (int i = 1; i < k; ++i) want *= p;
      CHECK(depth_cut(f, k).size() == want);
    }
  }
}

TEST_CASE("validate_cut rejects gaps and overlaps") {
  CHECK(validate_cut(t2, Cut::root_cut()));
  CHECK(validate_cut(t2, Cut({A("0"), A("1"), A("2")})));
  // the ray through "11" misses this set
  CHECK(!validate_cut(t2, Cut({A("0"), A("10")})));
  // "0" overlaps "01"
  CHECK(!validate_cut(t2, Cut({A("0"), A("01"), A("1"), A("2")})));
  CHECK(!validate_cut(t2, Cut({A("0"), A("1"), A("3")})));
}

TEST_CASE("retraction returns the coarse prefix") {
  const Cut fine({A("00"), A("01"), A("1"), A("2")});
  const Cut coarse({A("0"), A("1"), A("2")});
  CHECK(retraction(fine, coarse, A("01")) == A("0"));
  CHECK(retraction(fine, coarse, A("1")) == A("1"));
  CHECK_THROWS(retraction(coarse, fine, A("0")));
}

TEST_CASE("cut refinement order and joins") {
  const Cut a({A("00"), A("01"), A("1"), A("2")});
  const Cut b({A("0"), A("10"), A("11"), A("2")});
  CHECK(cut_refines(a, Cut({A("0"), A("1"), A("2")})));
  CHECK(!cut_refines(Cut({A("0"), A("1"), A("2")}), a));
  const Cut j = join_cuts(a, b);
  CHECK(j == Cut({A("00"), A("01"), A("10"), A("11"), A("2")}));
  CHECK(cut_refines(j, a));
  CHECK(cut_refines(j, b));
  CHECK(validate_cut(t2, j));
}

TEST_CASE("interior lists the proper prefixes") {
  const Cut c({A("00"), A("01"), A("1"), A("2")});
  const auto in = c.interior();
  CHECK(in == std::vector<Address>{Address::root(), A("0")});
  CHECK(Cut::root_cut().interior().empty());
}

TEST_CASE("triangle equality along paths") {
  Rng rng(11);
  const auto verts = vertices_to_depth(t2, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const Address& a = verts[rng.below(verts.size())];
    const Address& b = verts[rng.below(verts.size())];
    // c on the a-b path: walk from a up to the meet, then down to b
    const Address m = meet(a, b);
    const Address c = rng.unit() < 0.5 ? m : (a.depth() > m.depth() ? a.parent() : b);
    if (!(m.is_prefix_of(c) && (c.is_prefix_of(a) || c.is_prefix_of(b)))) continue;
    CHECK(distance(t2, a, b) == distance(t2, a, c) + distance(t2, c, b));
  }
}

TEST_CASE("distance through depth lengths, theta bounds") {
  Rng rng(13);
  const auto verts = vertices_to_depth(fg, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const Address& a = verts[rng.below(verts.size())];
    const Address& b = verts[rng.below(verts.size())];
    const Rat lhs = distance(fg, a, b);
    const Rat rhs = fg.depth_length(a) + fg.depth_length(b) -
                    Rat(2) * fg.depth_length(meet(a, b));
    CHECK(lhs == rhs);
    CHECK(theta(fg, a, b) == theta(fg, b, a));
    const Rat bound = std::min(fg.depth_length(a), fg.depth_length(b));
    CHECK(theta(fg, a, b) <= bound + bound);
  }
}

TEST_CASE("addresses serialize as digit strings") {
  CHECK(A("012").str() == "012");
  CHECK(Address::root().str() == "");
  CHECK_THROWS(Address::parse("0a"));
  CHECK(A("01").parent() == A("0"));
  CHECK(A("01").child(2) == A("012"));
}

TEST_CASE("family invariants") {
  CHECK_THROWS(TreeFamily(2, 2));  // root degree below 3
  CHECK_THROWS(TreeFamily(3, 1));  // child degree below 2
  CHECK_THROWS(TreeFamily(3, 2, {Rat(1), Rat(1), Rat(0)}, {Rat(1), Rat(1)}));
  CHECK(t2.unit_lengths());
  CHECK(!fg.unit_lengths());
  CHECK(fg.depth_length(A("21")) == Rat(4));  // beta root edge + beta child edge
  CHECK(fg.min_edge_length() == Rat(1));
}

TEST_CASE("branches hang below non-root addresses") {
  CHECK_THROWS(Branch(Address::root()));
  const Branch b(A("01"));
  CHECK(b.root_address == A("01"));
}
