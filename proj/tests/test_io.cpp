#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treeharm/boundary.hpp"
#include "treeharm/io.hpp"

using namespace treeharm;

namespace {
Address A(const std::string& s) { return Address::parse(s); }
}

TEST_CASE("family json round trip") {
  const std::string text =
      R"({"root_degree":3,"child_degree":2,"lengths":{"default":1}})";
  const TreeFamily f = io::family_from_json(text);
  CHECK(f == TreeFamily::regular(2));
  CHECK(io::family_from_json(io::family_to_json(f)) == f);

  const TreeFamily fg = TreeFamily::free_group(Rat(1), Rat(1, 2));
  const TreeFamily back = io::family_from_json(io::family_to_json(fg));
  CHECK(back == fg);
  CHECK(back.child_lengths()[1] == Rat(1, 2));
}

TEST_CASE("family presets") {
  CHECK(io::parse_family_spec("preset:t2") == TreeFamily::regular(2));
  CHECK(io::parse_family_spec("preset:t3") == TreeFamily::regular(3));
  CHECK(io::parse_family_spec("preset:freegroup:1,2") ==
        TreeFamily::free_group(Rat(1), Rat(2)));
  CHECK_THROWS(io::parse_family_spec("preset:nope"));
}

TEST_CASE("cycle notation") {
  CHECK(io::perm_to_cycles({1, 0, 2}) == "(01)");
  CHECK(io::perm_to_cycles({0, 1, 2}) == "()");
  CHECK(io::perm_to_cycles({1, 2, 0}) == "(012)");
  CHECK(io::perm_to_cycles({1, 0, 3, 2}) == "(01)(23)");
  CHECK(io::cycles_to_perm("(01)", 3) == std::vector<Letter>{1, 0, 2});
  CHECK(io::cycles_to_perm("()", 3) == std::vector<Letter>{0, 1, 2});
  CHECK(io::cycles_to_perm("(012)", 3) == std::vector<Letter>{1, 2, 0});
  CHECK_THROWS(io::cycles_to_perm("(05)", 3));
}

TEST_CASE("element json round trip is bit-exact") {
  const TreeFamily t2 = TreeFamily::regular(2);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto g = random_element(t2, seed, 3, 2);
    const std::string once = io::element_to_json(g);
    const auto parsed = io::element_from_json(t2, once);
    CHECK(parsed == g);
    CHECK(io::element_to_json(parsed) == once);
  }
}

TEST_CASE("element json matches the documented shape") {
  const TreeFamily t2 = TreeFamily::regular(2);
  const std::string text = R"json({
    "domain": ["00","01","1","2"],
    "range": ["0","10","11","2"],
    "match": {"00":"0","01":"10","1":"11","2":"2"},
    "isometries": {"00": {"": "(01)"}},
    "interior": {"":"","0":"1"}
  })json";
  const auto g = io::element_from_json(t2, text);
  CHECK(g.validate().ok);
  CHECK(g.apply_vertex(A("000")) == A("01"));  // the portrait swaps below 00
  CHECK(g.interior_map()->at(A("0")) == A("1"));
}

TEST_CASE("measure json round trip") {
  const TreeFamily t2 = TreeFamily::regular(2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = random_charge(t2, seed, 3);
    const auto back = io::measure_from_json(io::measure_to_json(m));
    CHECK(back.cut == m.cut);
    for (std::size_t i = 0; i < m.values.size(); ++i)
      CHECK(back.values[i] == m.values[i]);  // exact double round trip
  }
}

TEST_CASE("csv formatting is deterministic") {
  io::Csv csv({"a", "b"});
  csv.row({io::Csv::num(1.0 / 3.0), io::Csv::num(7)});
  io::Csv again({"a", "b"});
  again.row({io::Csv::num(1.0 / 3.0), io::Csv::num(7)});
  CHECK(csv.text() == again.text());
  CHECK(csv.text().substr(0, 4) == "a,b\n");
}

TEST_CASE("context descriptor round trip rebuilds the kernel") {
  const TreeFamily t2 = TreeFamily::regular(2);
  const auto ctx = build_gram(t2, 0.7, vertices_to_depth(t2, 2));
  const auto back = io::context_from_json(io::context_to_json(ctx));
  CHECK(back.family == ctx.family);
  CHECK(back.lambda == ctx.lambda);
  CHECK(back.vertices == ctx.vertices);
  CHECK(linalg::max_abs_diff(back.gram, ctx.gram) == 0.0);
}

TEST_CASE("matrix csv export") {
  linalg::Matrix m(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 0.25;
  m(1, 0) = 0.25;
  m(1, 1) = 1.0;
  CHECK(io::matrix_to_csv(m) == "1,0.25\n0.25,1\n");
}
