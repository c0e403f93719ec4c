#include "treeharm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace treeharm::io {

using nlohmann::json;

namespace {

json rat_to_json(const Rat& r) {
  if (r.is_integer()) return json(r.num());
  return json(r.str());
}

Rat rat_from_json(const json& j) {
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  if (j.is_string()) return Rat::parse(j.get<std::string>());
  if (j.is_number_float()) {
    // Accept small decimal literals by scaling; keeps hand-written
    // descriptors usable.
    const double v = j.get<double>();
    const std::int64_t den = 1000000;
    return Rat(static_cast<std::int64_t>(v * den + (v >= 0 ? 0.5 : -0.5)), den);
  }
  throw std::invalid_argument("length: expected integer or \"p/q\" string");
}

bool all_equal(const std::vector<Rat>& v, const Rat& x) {
  for (const Rat& r : v)
    if (!(r == x)) return false;
  return true;
}

}  // namespace

std::string family_to_json(const TreeFamily& f) {
  json j;
  j["root_degree"] = f.root_degree();
  j["child_degree"] = f.child_degree();
  json lengths;
  const Rat one(1);
  if (all_equal(f.root_lengths(), one) && all_equal(f.child_lengths(), one)) {
    lengths["default"] = 1;
  } else {
    lengths["default"] = 1;
    json root = json::array();
    for (const Rat& r : f.root_lengths()) root.push_back(rat_to_json(r));
    json child = json::array();
    for (const Rat& r : f.child_lengths()) child.push_back(rat_to_json(r));
    lengths["root"] = root;
    lengths["child"] = child;
  }
  j["lengths"] = lengths;
  return j.dump();
}

TreeFamily family_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int rd = j.at("root_degree").get<int>();
  const int cd = j.at("child_degree").get<int>();
  Rat def(1);
  std::vector<Rat> root(rd, def), child(cd, def);
  if (j.contains("lengths")) {
    const json& l = j.at("lengths");
    if (l.contains("default")) {
      def = rat_from_json(l.at("default"));
      root.assign(rd, def);
      child.assign(cd, def);
    }
    if (l.contains("root")) {
      const json& arr = l.at("root");
      if (static_cast<int>(arr.size()) != rd)
        throw std::invalid_argument("family: root length table size mismatch");
      for (int i = 0; i < rd; ++i) root[i] = rat_from_json(arr[i]);
    }
    if (l.contains("child")) {
      const json& arr = l.at("child");
      if (static_cast<int>(arr.size()) != cd)
        throw std::invalid_argument("family: child length table size mismatch");
      for (int i = 0; i < cd; ++i) child[i] = rat_from_json(arr[i]);
    }
  }
  return TreeFamily(rd, cd, std::move(root), std::move(child));
}

TreeFamily parse_family_spec(const std::string& spec) {
  if (spec.rfind("preset:", 0) == 0) {
    const std::string rest = spec.substr(7);
    if (rest.rfind("freegroup:", 0) == 0) {
      const std::string args = rest.substr(10);
      const auto comma = args.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("family preset: expected freegroup:l1,l2");
      return TreeFamily::free_group(Rat::parse(args.substr(0, comma)),
                                    Rat::parse(args.substr(comma + 1)));
    }
    if (rest.size() >= 2 && rest[0] == 't') {
      const int p = std::stoi(rest.substr(1));
      return TreeFamily::regular(p);
    }
    throw std::invalid_argument("unknown family preset: " + spec);
  }
  return family_from_json(read_file(spec));
}

std::string perm_to_cycles(const std::vector<Letter>& perm) {
  std::string out;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t start = 0; start < perm.size(); ++start) {
    if (seen[start] || perm[start] == start) {
      seen[start] = true;
      continue;
    }
    out.push_back('(');
    std::size_t c = start;
    while (!seen[c]) {
      seen[c] = true;
      out.push_back(static_cast<char>('0' + c));
      c = perm[c];
    }
    out.push_back(')');
  }
  if (out.empty()) out = "()";
  return out;
}

std::vector<Letter> cycles_to_perm(const std::string& cycles, std::size_t degree) {
  std::vector<Letter> perm(degree);
  for (std::size_t i = 0; i < degree; ++i) perm[i] = static_cast<Letter>(i);
  std::size_t i = 0;
  while (i < cycles.size()) {
    if (cycles[i] != '(')
      throw std::invalid_argument("permutation: expected '(' in " + cycles);
    const std::size_t close = cycles.find(')', i);
    if (close == std::string::npos)
      throw std::invalid_argument("permutation: unbalanced cycle in " + cycles);
    std::vector<Letter> cyc;
    for (std::size_t k = i + 1; k < close; ++k) {
      if (cycles[k] < '0' || cycles[k] > '9')
        throw std::invalid_argument("permutation: non-digit letter in " + cycles);
      const Letter c = static_cast<Letter>(cycles[k] - '0');
      if (c >= degree) throw std::invalid_argument("permutation: letter out of range");
      cyc.push_back(c);
    }
    for (std::size_t k = 0; k < cyc.size(); ++k)
      perm[cyc[k]] = cyc[(k + 1) % cyc.size()];
    i = close + 1;
  }
  return perm;
}

std::string element_to_json(const Hierarchomorphism& g) {
  json j;
  json domain = json::array();
  for (const Address& a : g.domain_cut().boundary()) domain.push_back(a.str());
  json range = json::array();
  for (const Address& a : g.range_cut().boundary()) range.push_back(a.str());
  j["domain"] = domain;
  j["range"] = range;
  json match = json::object();
  for (const auto& [u, v] : g.branch_map()) match[u.str()] = v.str();
  j["match"] = match;
  json iso = json::object();
  for (const auto& [u, portrait] : g.isometries()) {
    json inner = json::object();
    for (const auto& [rel, perm] : portrait.support())
      inner[rel.str()] = perm_to_cycles(perm);
    iso[u.str()] = inner;
  }
  j["isometries"] = iso;
  if (g.has_interior_map()) {
    json interior = json::object();
    for (const auto& [a, b] : *g.interior_map()) interior[a.str()] = b.str();
    j["interior"] = interior;
  }
  return j.dump();
}

Hierarchomorphism element_from_json(const TreeFamily& f, const std::string& text) {
  const json j = json::parse(text);
  std::vector<Address> domain, range;
  for (const auto& s : j.at("domain")) domain.push_back(Address::parse(s.get<std::string>()));
  for (const auto& s : j.at("range")) range.push_back(Address::parse(s.get<std::string>()));
  Hierarchomorphism::AddressMap match;
  for (const auto& [k, v] : j.at("match").items())
    match[Address::parse(k)] = Address::parse(v.get<std::string>());
  std::map<Address, Portrait> iso;
  if (j.contains("isometries")) {
    for (const auto& [u, inner] : j.at("isometries").items()) {
      const Address root = Address::parse(u);
      Portrait p;
      for (const auto& [rel, cyc] : inner.items()) {
        const Address r = Address::parse(rel);
        const bool at_root = root.is_root() && r.is_root();
        const std::size_t deg = at_root ? f.root_degree() : f.child_degree();
        p.set(r, cycles_to_perm(cyc.get<std::string>(), deg));
      }
      if (!p.is_identity()) iso[root] = std::move(p);
    }
  }
  std::optional<Hierarchomorphism::AddressMap> interior;
  if (j.contains("interior")) {
    interior.emplace();
    for (const auto& [k, v] : j.at("interior").items())
      (*interior)[Address::parse(k)] = Address::parse(v.get<std::string>());
  }
  return Hierarchomorphism(f, Cut(std::move(domain)), Cut(std::move(range)),
                           std::move(match), std::move(iso), std::move(interior));
}

std::string measure_to_json(const CylinderMeasure& m) {
  json j;
  json cut = json::array();
  for (const Address& a : m.cut.boundary()) cut.push_back(a.str());
  j["cut"] = cut;
  j["values"] = m.values;
  return j.dump();
}

CylinderMeasure measure_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<Address> cut;
  for (const auto& s : j.at("cut")) cut.push_back(Address::parse(s.get<std::string>()));
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  return CylinderMeasure(Cut(std::move(cut)), std::move(values));
}

std::string context_to_json(const GramContext& ctx) {
  json j;
  j["family"] = json::parse(family_to_json(ctx.family));
  j["lambda"] = ctx.lambda;
  json verts = json::array();
  for (const Address& a : ctx.vertices) verts.push_back(a.str());
  j["vertices"] = verts;
  return j.dump();
}

GramContext context_from_json(const std::string& text) {
  const json j = json::parse(text);
  const TreeFamily f = family_from_json(j.at("family").dump());
  std::vector<Address> verts;
  for (const auto& s : j.at("vertices"))
    verts.push_back(Address::parse(s.get<std::string>()));
  return build_gram(f, j.at("lambda").get<double>(), std::move(verts));
}

std::string matrix_to_csv(const linalg::Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      out += Csv::num(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += header[i];
  }
  text_.push_back('\n');
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::invalid_argument("Csv: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += cells[i];
  }
  text_.push_back('\n');
}

void Csv::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Csv: cannot open " + path);
  out << text_;
}

std::string Csv::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::string Csv::num(int v) { return std::to_string(v); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace treeharm::io
