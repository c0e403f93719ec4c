#include "treeharm/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "treeharm/random.hpp"

namespace treeharm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// sum over child letters of lambda^{-2 len}
double letter_sum(const TreeFamily& f, double lambda, bool at_root) {
  const auto& table = at_root ? f.root_lengths() : f.child_lengths();
  double s = 0.0;
  for (const Rat& len : table) s += std::pow(lambda, -2.0 * len.to_double());
  return s;
}

}  // namespace

CylinderMeasure::CylinderMeasure(Cut c, std::vector<double> v)
    : cut(std::move(c)), values(std::move(v)) {
  if (cut.size() != values.size())
    throw std::invalid_argument("CylinderMeasure: value count mismatch");
}

double total_mass(const CylinderMeasure& m) {
  double acc = 0.0;
  for (double v : m.values) acc += v;
  return acc;
}

double variation(const CylinderMeasure& m) {
  double acc = 0.0;
  for (double v : m.values) acc += std::fabs(v);
  return acc;
}

double ball_mass(const TreeFamily& f, const CylinderMeasure& m, const Address& v) {
  const int li = m.cut.locate(v);
  if (li >= 0) {
    const Address& b = m.cut.boundary()[li];
    double val = m.values[li];
    for (std::size_t d = b.depth(); d < v.depth(); ++d)
      val /= double(d == 0 ? f.root_degree() : f.child_degree());
    return val;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < m.cut.size(); ++i)
    if (v.is_prefix_of(m.cut.boundary()[i])) acc += m.values[i];
  return acc;
}

CylinderMeasure push_to_cut(const TreeFamily& f, const CylinderMeasure& m,
                            const Cut& target) {
  if (!validate_cut(f, target))
    throw std::invalid_argument("push_to_cut: target is not a valid cut");
  std::vector<double> values(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    values[i] = ball_mass(f, m, target.boundary()[i]);
  return CylinderMeasure(target, std::move(values));
}

std::vector<double> psi_vector(const GramContext& ctx, const CylinderMeasure& m) {
  std::vector<double> coeffs(ctx.vertices.size(), 0.0);
  for (std::size_t i = 0; i < m.cut.size(); ++i) {
    const int idx = ctx.at(m.cut.boundary()[i]);
    coeffs[idx] += m.values[i] * ctx.f_scale[idx];
  }
  return coeffs;
}

double norm_gram(const GramContext& ctx, const CylinderMeasure& m) {
  const auto coeffs = psi_vector(ctx, m);
  return norm2(ctx, coeffs);
}

double norm_gram_at_cut(const TreeFamily& f, double lambda,
                        const CylinderMeasure& m, const Cut& cut) {
  const CylinderMeasure pushed = push_to_cut(f, m, cut);
  const GramContext ctx = build_gram(f, lambda, cut.boundary(), false);
  return norm_gram(ctx, pushed);
}

double z_term(const TreeFamily& f, double lambda, const CylinderMeasure& m,
              const Address& u) {
  const bool at_root = u.is_root();
  const auto& table = at_root ? f.root_lengths() : f.child_lengths();
  double acc = 0.0;
  for (std::size_t c = 0; c < table.size(); ++c) {
    const double t = ball_mass(f, m, u.child(static_cast<Letter>(c)));
    acc += (std::pow(lambda, -2.0 * table[c].to_double()) - 1.0) * t * t;
  }
  return std::pow(lambda, -2.0 * f.depth_length(u).to_double()) * acc;
}

namespace {

// Closed-form per-level z sums below one cut element (equal split): the
// level sums are geometric with ratio S / q^2. The log output advances
// in log space so it stays usable far past double overflow.
void add_subtree_levels(const TreeFamily& f, double lambda, const Address& b,
                        double value, int levels, std::vector<double>* out,
                        std::vector<double>* out_log) {
  if (levels <= 0 || value == 0.0) return;
  const double s_child = letter_sum(f, lambda, false);
  const double q = f.child_degree();
  const double w_child = s_child - q;
  const double log_ratio = std::log(s_child) - 2.0 * std::log(q);
  const int base = static_cast<int>(b.depth());

  double z, lz;
  int j = 0;
  if (b.is_root()) {
    const double s_root = letter_sum(f, lambda, true);
    const double r = f.root_degree();
    z = (s_root - r) * (value / r) * (value / r);
    lz = std::log(s_root - r) + 2.0 * std::log(std::fabs(value) / r);
    if (out) (*out)[base] += z;
    if (out_log) (*out_log)[base] = logaddexp((*out_log)[base], lz);
    if (levels == 1) return;
    z = s_root * w_child * (value / (r * q)) * (value / (r * q));
    lz = std::log(s_root) + std::log(w_child) +
         2.0 * std::log(std::fabs(value) / (r * q));
    j = 1;
  } else {
    const double depth = f.depth_length(b).to_double();
    z = std::pow(lambda, -2.0 * depth) * w_child * (value / q) * (value / q);
    lz = -2.0 * depth * std::log(lambda) + std::log(w_child) +
         2.0 * std::log(std::fabs(value) / q);
  }
  for (; j < levels; ++j) {
    if (out) (*out)[base + j] += z;
    if (out_log) (*out_log)[base + j] = logaddexp((*out_log)[base + j], lz);
    z *= s_child / (q * q);
    lz += log_ratio;
  }
}

void check_depth(const CylinderMeasure& m, int depth, const char* who) {
  if (depth < static_cast<int>(m.cut.max_depth()))
    throw std::invalid_argument(std::string(who) +
                                ": depth is smaller than the cut depth");
}

}  // namespace

std::vector<double> level_aggregates(const TreeFamily& f, double lambda,
                                     const CylinderMeasure& m, int depth) {
  check_depth(m, depth, "level_aggregates");
  std::vector<double> out(depth, 0.0);
  if (depth == 0) return out;
  for (const Address& u : m.cut.interior())
    out[u.depth()] += z_term(f, lambda, m, u);
  for (std::size_t i = 0; i < m.cut.size(); ++i) {
    const Address& b = m.cut.boundary()[i];
    const double v = m.values[i];
    if (v == 0.0) continue;
    add_subtree_levels(f, lambda, b, v, depth - static_cast<int>(b.depth()),
                       &out, nullptr);
  }
  return out;
}

std::vector<double> level_aggregates_log(const TreeFamily& f, double lambda,
                                         const CylinderMeasure& m, int depth) {
  check_depth(m, depth, "level_aggregates_log");
  std::vector<double> out(depth, kNegInf);
  if (depth == 0) return out;
  for (const Address& u : m.cut.interior()) {
    const double z = z_term(f, lambda, m, u);
    if (z > 0.0) out[u.depth()] = logaddexp(out[u.depth()], std::log(z));
  }
  for (std::size_t i = 0; i < m.cut.size(); ++i) {
    const Address& b = m.cut.boundary()[i];
    const double v = m.values[i];
    if (v == 0.0) continue;
    add_subtree_levels(f, lambda, b, v, depth - static_cast<int>(b.depth()),
                       nullptr, &out);
  }
  return out;
}

double norm_series(const TreeFamily& f, double lambda, const CylinderMeasure& m,
                   int depth) {
  const double t = total_mass(m);
  double acc = t * t;
  for (double z : level_aggregates(f, lambda, m, depth)) acc += z;
  return acc;
}

CylinderMeasure uniform_measure(const TreeFamily& f) {
  (void)f;
  return CylinderMeasure(Cut::root_cut(), {1.0});
}

double uniform_norm_closed_form(int p, double lambda) {
  const double l2p = lambda * lambda * p;
  if (!(l2p > 1.0))
    throw std::domain_error("uniform_norm_closed_form: series diverges (lambda^2 p <= 1)");
  return 1.0 + p * (1.0 - lambda * lambda) / ((p + 1) * (l2p - 1.0));
}

double ball_indicator_norm2(const TreeFamily& f, double lambda, const Address& v) {
  const double s_child = letter_sum(f, lambda, false);
  const double q = f.child_degree();
  if (!(s_child < q * q))
    throw std::domain_error("ball_indicator_norm2: series diverges");
  double acc = 1.0;
  // Path refinements: above v the child towards v holds the whole mass.
  for (std::size_t d = 0; d < v.depth(); ++d) {
    const double len = f.letter_length(d == 0, v.letter(d)).to_double();
    acc += std::pow(lambda, -2.0 * f.depth_length(v.prefix(d)).to_double()) *
           (std::pow(lambda, -2.0 * len) - 1.0);
  }
  // Geometric tail of the equal split below v.
  acc += std::pow(lambda, -2.0 * f.depth_length(v).to_double()) * (s_child - q) /
         (q * q - s_child);
  return acc;
}

double darboux_sum(const TreeFamily& f, double lambda, const CylinderMeasure& m1,
                   const CylinderMeasure& m2, const Cut& cut) {
  const CylinderMeasure a = push_to_cut(f, m1, cut);
  const CylinderMeasure b = push_to_cut(f, m2, cut);
  const std::size_t n = cut.size();
  std::vector<double> depth(n);
  for (std::size_t i = 0; i < n; ++i)
    depth[i] = f.depth_length(cut.boundary()[i]).to_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Rays inside one ball can meet exactly at its root, so the diagonal
    // minimum of lambda^{-theta} is attained at theta = 2 rho(xi, root).
    acc += std::pow(lambda, -2.0 * depth[i]) * a.values[i] * b.values[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double th =
          2.0 * f.depth_length(meet(cut.boundary()[i], cut.boundary()[j])).to_double();
      acc += std::pow(lambda, -th) *
             (a.values[i] * b.values[j] + a.values[j] * b.values[i]);
    }
  }
  return acc;
}

CylinderMeasure restrict_to_ball(const TreeFamily& f, const CylinderMeasure& m,
                                 const Address& branch_root) {
  Cut c = m.cut;
  while (true) {
    const int li = c.locate(branch_root);
    if (li < 0) break;  // the cut already resolves the ball from below
    const Address b = c.boundary()[li];
    if (b == branch_root) break;
    c = refine_cut(f, c, b);
  }
  CylinderMeasure out = push_to_cut(f, m, c);
  for (std::size_t i = 0; i < out.cut.size(); ++i)
    if (!branch_root.is_prefix_of(out.cut.boundary()[i])) out.values[i] = 0.0;
  return out;
}

double norm_lower_bound(const TreeFamily& f, const CylinderMeasure& m,
                        double lambda, int n_depth, const Rat& sigma_len) {
  const CylinderMeasure at_n = push_to_cut(f, m, depth_cut(f, n_depth));
  double sq = 0.0;
  for (double v : at_n.values) sq += v * v;
  const double s = sigma_len.to_double();
  return std::pow(lambda, -2.0 * n_depth * s) *
         (std::pow(lambda, -2.0 * s) - 1.0) * sq;
}

namespace {

struct Classification {
  bool convergent;
  double max_ratio;
  double last_log;
};

Classification classify_lambda(const TreeFamily& f, const CylinderMeasure& probe,
                               double lambda, int depth) {
  const auto logs = level_aggregates_log(f, lambda, probe, depth);
  const int window = 20;
  if (depth < window + 2)
    throw std::invalid_argument("estimate_sigma: depth too small for the ratio window");
  double max_ratio = 0.0;
  bool seen = false;
  for (int d = depth - window - 1; d + 1 < depth; ++d) {
    if (logs[d] == kNegInf || logs[d + 1] == kNegInf) continue;
    max_ratio = std::max(max_ratio, std::exp(logs[d + 1] - logs[d]));
    seen = true;
  }
  if (!seen)
    throw std::runtime_error("estimate_sigma: probe has no mass in the ratio window");
  if (std::fabs(max_ratio - 1.0) < 1e-9)
    throw std::runtime_error("estimate_sigma: non-discriminating depth (ratio at 1)");
  return {max_ratio < 1.0, max_ratio, logs[depth - 1]};
}

}  // namespace

SigmaEstimate estimate_sigma(const TreeFamily& f, const CylinderMeasure& probe,
                             int depth, double tol) {
  SigmaEstimate est;
  double lo = 0.02;
  double hi = 0.999;
  const Classification clo = classify_lambda(f, probe, lo, depth);
  const Classification chi = classify_lambda(f, probe, hi, depth);
  est.trace.push_back({lo, depth, clo.last_log, clo.max_ratio, clo.convergent});
  est.trace.push_back({hi, depth, chi.last_log, chi.max_ratio, chi.convergent});
  if (clo.convergent || !chi.convergent)
    throw std::runtime_error("estimate_sigma: bracket endpoints do not straddle the threshold");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const Classification c = classify_lambda(f, probe, mid, depth);
    est.trace.push_back({mid, depth, c.last_log, c.max_ratio, c.convergent});
    if (c.convergent)
      hi = mid;
    else
      lo = mid;
  }
  est.lower = lo;
  est.upper = hi;
  est.midpoint = 0.5 * (lo + hi);
  return est;
}

SigmaEstimate estimate_sigma(const TreeFamily& f, int depth, double tol) {
  return estimate_sigma(f, uniform_measure(f), depth, tol);
}

CylinderMeasure transform_measure(const Hierarchomorphism& g, double lambda,
                                  const CylinderMeasure& m) {
  const TreeFamily& f = g.family();
  const Cut joined = join_cuts(m.cut, g.domain_cut());
  const CylinderMeasure fine = push_to_cut(f, m, joined);
  const Hierarchomorphism ge = extend_core(g, joined);

  Cut out_cut = ge.range_cut();
  std::vector<double> values(out_cut.size(), 0.0);
  for (std::size_t i = 0; i < joined.size(); ++i) {
    const Address& b = joined.boundary()[i];
    const Address& image = ge.branch_map().at(b);
    const Rat shift = f.depth_length(b) - f.depth_length(image);
    values[out_cut.index_of(image)] =
        std::pow(lambda, -shift.to_double()) * fine.values[i];
  }
  return CylinderMeasure(std::move(out_cut), std::move(values));
}

int boundary_deviation_rank(const Hierarchomorphism& g, double lambda, int depth,
                            double tol) {
  const TreeFamily& f = g.family();
  const Cut c = depth_cut(f, depth);
  if (!cut_refines(c, g.domain_cut()))
    throw std::invalid_argument("boundary_deviation_rank: depth cut does not refine the domain cut");
  const Hierarchomorphism ge = extend_core(g, c);

  const std::size_t n = c.size();
  std::vector<Address> image(n);
  std::vector<double> shift(n);
  for (std::size_t i = 0; i < n; ++i) {
    image[i] = ge.branch_map().at(c.boundary()[i]);
    shift[i] = (f.depth_length(c.boundary()[i]) - f.depth_length(image[i])).to_double();
  }

  linalg::Matrix diff(n, n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = std::pow(lambda, -shift[i]);
    const double before_d = ball_indicator_norm2(f, lambda, c.boundary()[i]);
    const double after_d = wi * wi * ball_indicator_norm2(f, lambda, image[i]);
    diff(i, i) = after_d - before_d;
    scale = std::max({scale, std::fabs(before_d), std::fabs(after_d)});
    for (std::size_t j = i + 1; j < n; ++j) {
      const double before = std::pow(
          lambda, -theta(f, c.boundary()[i], c.boundary()[j]).to_double());
      const double after = wi * std::pow(lambda, -shift[j]) *
                           std::pow(lambda, -theta(f, image[i], image[j]).to_double());
      diff(i, j) = after - before;
      diff(j, i) = diff(i, j);
      scale = std::max({scale, std::fabs(before), std::fabs(after)});
    }
  }
  // Elements acting unitarily cancel to roundoff relative to the inner
  // products themselves, so the rank cutoff is anchored at their scale.
  const auto sv = linalg::singular_values(diff);
  if (sv.empty()) return 0;
  const double cut_at = tol * std::max(sv.front(), scale);
  int rank = 0;
  for (double s : sv)
    if (s > cut_at) ++rank;
  return rank;
}

CylinderMeasure random_charge(const TreeFamily& f, std::uint64_t seed,
                              int depth_budget) {
  Rng rng(seed * 0x6a09e667f3bcc909ULL + 0xb7e151628aed2a6bULL);
  Cut c = Cut::root_cut();
  const int steps =
      depth_budget <= 0 ? 0 : 1 + static_cast<int>(rng.below(2 * depth_budget));
  for (int s = 0; s < steps; ++s) {
    std::vector<Address> eligible;
    for (const Address& a : c.boundary())
      if (static_cast<int>(a.depth()) < depth_budget) eligible.push_back(a);
    if (eligible.empty()) break;
    c = refine_cut(f, c, eligible[rng.below(eligible.size())]);
  }
  std::vector<double> values(c.size());
  for (auto& v : values) v = rng.symmetric();
  return CylinderMeasure(std::move(c), std::move(values));
}

}  // namespace treeharm
