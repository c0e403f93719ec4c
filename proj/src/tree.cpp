#include "treeharm/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace treeharm {

// -- Address ----------------------------------------------------------

Address Address::parse(const std::string& digits) {
  std::vector<Letter> letters;
  letters.reserve(digits.size());
  for (char ch : digits) {
    if (ch < '0' || ch > '9')
      throw std::invalid_argument("Address: non-digit letter in \"" + digits + "\"");
    letters.push_back(static_cast<Letter>(ch - '0'));
  }
  return Address(std::move(letters));
}

Address Address::parent() const {
  if (is_root()) throw std::invalid_argument("Address: root has no parent");
  std::vector<Letter> l(letters_.begin(), letters_.end() - 1);
  return Address(std::move(l));
}

Address Address::child(Letter c) const {
  std::vector<Letter> l(letters_);
  l.push_back(c);
  return Address(std::move(l));
}

Address Address::append(std::span<const Letter> tail) const {
  std::vector<Letter> l(letters_);
  l.insert(l.end(), tail.begin(), tail.end());
  return Address(std::move(l));
}

Address Address::prefix(std::size_t len) const {
  if (len > letters_.size()) throw std::invalid_argument("Address: prefix too long");
  return Address(std::vector<Letter>(letters_.begin(), letters_.begin() + len));
}

std::span<const Letter> Address::suffix_from(std::size_t len) const {
  if (len > letters_.size()) throw std::invalid_argument("Address: suffix offset");
  return std::span<const Letter>(letters_).subspan(len);
}

bool Address::is_prefix_of(const Address& other) const {
  if (depth() > other.depth()) return false;
  return std::equal(letters_.begin(), letters_.end(), other.letters_.begin());
}

bool Address::is_strict_prefix_of(const Address& other) const {
  return depth() < other.depth() && is_prefix_of(other);
}

std::string Address::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (Letter c : letters_) s.push_back(static_cast<char>('0' + c));
  return s;
}

// -- TreeFamily -------------------------------------------------------

TreeFamily::TreeFamily(int root_degree, int child_degree)
    : TreeFamily(root_degree, child_degree,
                 std::vector<Rat>(root_degree, Rat(1)),
                 std::vector<Rat>(child_degree, Rat(1))) {}

TreeFamily::TreeFamily(int root_degree, int child_degree,
                       std::vector<Rat> root_lengths,
                       std::vector<Rat> child_lengths)
    : root_degree_(root_degree),
      child_degree_(child_degree),
      root_lengths_(std::move(root_lengths)),
      child_lengths_(std::move(child_lengths)) {
  if (root_degree_ < 3 || root_degree_ > 10)
    throw std::invalid_argument("TreeFamily: root_degree must be in [3,10]");
  if (child_degree_ < 2 || child_degree_ > 10)
    throw std::invalid_argument("TreeFamily: child_degree must be in [2,10]");
  if (root_lengths_.size() != static_cast<std::size_t>(root_degree_) ||
      child_lengths_.size() != static_cast<std::size_t>(child_degree_))
    throw std::invalid_argument("TreeFamily: length table size mismatch");
  for (const Rat& l : root_lengths_)
    if (!(l > Rat(0))) throw std::invalid_argument("TreeFamily: nonpositive length");
  for (const Rat& l : child_lengths_)
    if (!(l > Rat(0))) throw std::invalid_argument("TreeFamily: nonpositive length");
}

TreeFamily TreeFamily::regular(int p) { return TreeFamily(p + 1, p); }

TreeFamily TreeFamily::free_group(const Rat& l1, const Rat& l2) {
  return TreeFamily(4, 3, {l1, l1, l2, l2}, {l1, l2, l2});
}

bool TreeFamily::unit_lengths() const {
  auto is_one = [](const Rat& r) { return r == Rat(1); };
  return std::all_of(root_lengths_.begin(), root_lengths_.end(), is_one) &&
         std::all_of(child_lengths_.begin(), child_lengths_.end(), is_one);
}

Rat TreeFamily::letter_length(bool parent_is_root, Letter c) const {
  const auto& table = parent_is_root ? root_lengths_ : child_lengths_;
  if (c >= table.size()) throw std::invalid_argument("TreeFamily: letter out of range");
  return table[c];
}

Rat TreeFamily::edge_length_into(const Address& a) const {
  if (a.is_root()) throw std::invalid_argument("TreeFamily: root has no incoming edge");
  return letter_length(a.depth() == 1, a.last());
}

Rat TreeFamily::depth_length(const Address& a) const {
  Rat acc(0);
  for (std::size_t i = 0; i < a.depth(); ++i)
    acc += letter_length(i == 0, a.letter(i));
  return acc;
}

Rat TreeFamily::min_edge_length() const {
  Rat m = root_lengths_.front();
  for (const Rat& l : root_lengths_) m = std::min(m, l);
  for (const Rat& l : child_lengths_) m = std::min(m, l);
  return m;
}

bool TreeFamily::valid(const Address& a) const {
  for (std::size_t i = 0; i < a.depth(); ++i)
    if (!valid_letter(i == 0, a.letter(i))) return false;
  return true;
}

bool TreeFamily::valid_letter(bool parent_is_root, Letter c) const {
  return c < (parent_is_root ? root_degree_ : child_degree_);
}

// -- BoundaryPoint ----------------------------------------------------

namespace {

std::vector<Letter> primitive_period(std::vector<Letter> period) {
  for (std::size_t d = 1; d < period.size(); ++d) {
    if (period.size() % d != 0) continue;
    bool ok = true;
    for (std::size_t i = d; i < period.size() && ok; ++i)
      ok = (period[i] == period[i - d]);
    if (ok) {
      period.resize(d);
      return period;
    }
  }
  return period;
}

}  // namespace

BoundaryPoint::BoundaryPoint(Address preperiod, std::vector<Letter> period) {
  if (period.empty()) throw std::invalid_argument("BoundaryPoint: empty period");
  period = primitive_period(std::move(period));
  std::vector<Letter> pre(preperiod.letters().begin(), preperiod.letters().end());
  // Absorb preperiod letters that merely repeat the tail of the period.
  while (!pre.empty() && pre.back() == period.back()) {
    std::rotate(period.rbegin(), period.rbegin() + 1, period.rend());
    pre.pop_back();
  }
  preperiod_ = Address(std::move(pre));
  period_ = std::move(period);
}

BoundaryPoint BoundaryPoint::parse(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.find(')');
  if (open == std::string::npos || close != text.size() - 1 || close < open)
    throw std::invalid_argument("BoundaryPoint: expected \"pre(period)\"");
  const Address pre = Address::parse(text.substr(0, open));
  const Address per = Address::parse(text.substr(open + 1, close - open - 1));
  return BoundaryPoint(pre, std::vector<Letter>(per.letters().begin(),
                                                per.letters().end()));
}

Letter BoundaryPoint::letter(std::size_t i) const {
  if (i < preperiod_.depth()) return preperiod_.letter(i);
  return period_[(i - preperiod_.depth()) % period_.size()];
}

Address BoundaryPoint::ray_vertex(std::size_t depth) const {
  std::vector<Letter> l(depth);
  for (std::size_t i = 0; i < depth; ++i) l[i] = letter(i);
  return Address(std::move(l));
}

bool BoundaryPoint::passes_through(const Address& a) const {
  for (std::size_t i = 0; i < a.depth(); ++i)
    if (letter(i) != a.letter(i)) return false;
  return true;
}

bool BoundaryPoint::valid_in(const TreeFamily& f) const {
  if (!f.valid(preperiod_)) return false;
  for (Letter c : period_)
    if (!f.valid_letter(false, c)) return false;
  if (preperiod_.is_root() && !f.valid_letter(true, period_.front())) return false;
  return true;
}

std::string BoundaryPoint::str() const {
  std::string s = preperiod_.str();
  s.push_back('(');
  for (Letter c : period_) s.push_back(static_cast<char>('0' + c));
  s.push_back(')');
  return s;
}

// -- Cut --------------------------------------------------------------

Cut::Cut(std::vector<Address> boundary) : boundary_(std::move(boundary)) {
  std::sort(boundary_.begin(), boundary_.end());
  if (std::adjacent_find(boundary_.begin(), boundary_.end()) != boundary_.end())
    throw std::invalid_argument("Cut: duplicate boundary address");
}

std::size_t Cut::max_depth() const {
  std::size_t d = 0;
  for (const Address& a : boundary_) d = std::max(d, a.depth());
  return d;
}

bool Cut::contains(const Address& a) const { return index_of(a) >= 0; }

int Cut::index_of(const Address& a) const {
  const auto it = std::lower_bound(boundary_.begin(), boundary_.end(), a);
  if (it != boundary_.end() && *it == a)
    return static_cast<int>(it - boundary_.begin());
  return -1;
}

int Cut::locate(const Address& a) const {
  for (std::size_t len = 0; len <= a.depth(); ++len) {
    const int i = index_of(a.prefix(len));
    if (i >= 0) return i;
  }
  return -1;
}

int Cut::locate(const BoundaryPoint& w) const {
  for (std::size_t i = 0; i < boundary_.size(); ++i)
    if (w.passes_through(boundary_[i])) return static_cast<int>(i);
  return -1;
}

std::vector<Address> Cut::interior() const {
  std::vector<Address> out;
  for (const Address& a : boundary_)
    for (std::size_t len = 0; len < a.depth(); ++len) out.push_back(a.prefix(len));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Branch::Branch(Address a) : root_address(std::move(a)) {
  if (root_address.is_root())
    throw std::invalid_argument("Branch: root address must not be xi");
}

// -- operations -------------------------------------------------------

Address meet(const Address& a, const Address& b) {
  std::size_t i = 0;
  const std::size_t lim = std::min(a.depth(), b.depth());
  while (i < lim && a.letter(i) == b.letter(i)) ++i;
  return a.prefix(i);
}

Rat distance(const TreeFamily& f, const Address& a, const Address& b) {
  const Address m = meet(a, b);
  return f.depth_length(a) + f.depth_length(b) - f.depth_length(m) - f.depth_length(m);
}

int simplicial_distance(const Address& a, const Address& b) {
  const Address m = meet(a, b);
  return static_cast<int>(a.depth() + b.depth() - 2 * m.depth());
}

Rat theta(const TreeFamily& f, const Address& a, const Address& b) {
  const Rat d = f.depth_length(meet(a, b));
  return d + d;
}

Rat theta(const TreeFamily& f, const Address& a, const BoundaryPoint& w) {
  std::size_t i = 0;
  while (i < a.depth() && a.letter(i) == w.letter(i)) ++i;
  const Rat d = f.depth_length(a.prefix(i));
  return d + d;
}

std::optional<Rat> theta(const TreeFamily& f, const BoundaryPoint& v,
                         const BoundaryPoint& w) {
  if (v == w) return std::nullopt;
  // Canonical forms differ, so the words differ at some index; the scan
  // is bounded by the preperiods plus one period round.
  const std::size_t bound = v.preperiod().depth() + w.preperiod().depth() +
                            v.period().size() * w.period().size() + 1;
  std::size_t i = 0;
  while (i <= bound && v.letter(i) == w.letter(i)) ++i;
  const Rat d = f.depth_length(v.ray_vertex(i));
  return d + d;
}

namespace {

// A sorted group of boundary addresses below one vertex covers that
// vertex's subtree completely iff it is exactly the vertex, or it splits
// into one full recursive group per child letter.
bool covers(const TreeFamily& f, std::span<const Address> items, std::size_t pos) {
  if (items.size() == 1 && items[0].depth() == pos) return true;
  if (items.empty()) return false;
  if (items[0].depth() == pos) return false;  // proper prefix of the rest
  const int deg = pos == 0 ? f.root_degree() : f.child_degree();
  std::size_t i = 0;
  for (Letter c = 0; c < static_cast<Letter>(deg); ++c) {
    std::size_t j = i;
    while (j < items.size() && items[j].letter(pos) == c) ++j;
    if (j == i) return false;  // child subtree not covered
    if (!covers(f, items.subspan(i, j - i), pos + 1)) return false;
    i = j;
  }
  return i == items.size();
}

}  // namespace

bool validate_cut(const TreeFamily& f, const Cut& c) {
  if (c.boundary().empty()) return false;
  for (const Address& a : c.boundary())
    if (!f.valid(a)) return false;
  return covers(f, c.boundary(), 0);
}

Cut refine_cut(const TreeFamily& f, const Cut& c, const Address& u) {
  if (!c.contains(u))
    throw std::invalid_argument("refine_cut: vertex not on the cut boundary");
  std::vector<Address> next;
  next.reserve(c.size() + f.degree_at(u));
  for (const Address& a : c.boundary())
    if (a != u) next.push_back(a);
  for (Letter ch = 0; ch < static_cast<Letter>(f.degree_at(u)); ++ch)
    next.push_back(u.child(ch));
  return Cut(std::move(next));
}

Cut depth_cut(const TreeFamily& f, int k) {
  if (k < 0) throw std::invalid_argument("depth_cut: negative depth");
  std::vector<Address> level = {Address::root()};
  for (int d = 0; d < k; ++d) {
    std::vector<Address> next;
    next.reserve(level.size() * f.child_degree());
    for (const Address& a : level)
      for (Letter c = 0; c < static_cast<Letter>(f.degree_at(a)); ++c)
        next.push_back(a.child(c));
    level = std::move(next);
  }
  return Cut(std::move(level));
}

bool cut_refines(const Cut& fine, const Cut& coarse) {
  for (const Address& a : fine.boundary())
    if (coarse.locate(a) < 0) return false;
  return true;
}

Cut join_cuts(const Cut& a, const Cut& b) {
  std::vector<Address> out;
  auto deeper_side = [&out](const Cut& keep, const Cut& other) {
    for (const Address& x : keep.boundary()) {
      bool is_proper_prefix = false;
      for (const Address& y : other.boundary())
        if (x.is_strict_prefix_of(y)) {
          is_proper_prefix = true;
          break;
        }
      if (!is_proper_prefix) out.push_back(x);
    }
  };
  deeper_side(a, b);
  deeper_side(b, a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Cut(std::move(out));
}

Address retraction(const Cut& fine, const Cut& coarse, const Address& a) {
  if (!fine.contains(a))
    throw std::invalid_argument("retraction: address not on the fine cut");
  if (!cut_refines(fine, coarse))
    throw std::invalid_argument("retraction: cuts are not nested");
  const int i = coarse.locate(a);
  if (i < 0) throw std::invalid_argument("retraction: cuts are not nested");
  return coarse.boundary()[i];
}

std::vector<Address> vertices_to_depth(const TreeFamily& f, int depth) {
  std::vector<Address> out = {Address::root()};
  std::vector<Address> level = out;
  for (int d = 0; d < depth; ++d) {
    std::vector<Address> next;
    for (const Address& a : level)
      for (Letter c = 0; c < static_cast<Letter>(f.degree_at(a)); ++c)
        next.push_back(a.child(c));
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace treeharm
