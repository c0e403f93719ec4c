#include "treeharm/gram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "treeharm/kernels.hpp"

namespace treeharm {

int GramContext::at(const Address& a) const {
  const auto it = index.find(a);
  if (it == index.end())
    throw std::invalid_argument("GramContext: vertex not in context: " + a.str());
  return it->second;
}

GramContext build_gram(const TreeFamily& f, double lambda,
                       std::vector<Address> vertices, bool factorize) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("build_gram: lambda must lie in (0,1)");
  GramContext ctx{f, lambda, {}, {}, {}, {}, {}};
  ctx.vertices = std::move(vertices);
  for (std::size_t i = 0; i < ctx.vertices.size(); ++i) {
    if (!f.valid(ctx.vertices[i]))
      throw std::invalid_argument("build_gram: invalid address " +
                                  ctx.vertices[i].str());
    if (!ctx.index.emplace(ctx.vertices[i], static_cast<int>(i)).second)
      throw std::invalid_argument("build_gram: duplicate vertex " +
                                  ctx.vertices[i].str());
  }

  const std::size_t n = ctx.vertices.size();
  std::vector<double> depth(n);
  for (std::size_t i = 0; i < n; ++i)
    depth[i] = f.depth_length(ctx.vertices[i]).to_double();

  ctx.gram = linalg::Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    ctx.gram(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double md = f.depth_length(meet(ctx.vertices[i], ctx.vertices[j])).to_double();
      const double rho = depth[i] + depth[j] - 2.0 * md;
      const double v = std::pow(lambda, rho);
      ctx.gram(i, j) = v;
      ctx.gram(j, i) = v;
    }
  }

  ctx.f_scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) ctx.f_scale[i] = std::pow(lambda, -depth[i]);

  if (factorize) {
    linalg::Cholesky ch = linalg::cholesky(ctx.gram);
    if (!ch.ok) {
      const double ev = linalg::smallest_eigenvalue(ctx.gram);
      throw std::runtime_error(
          "build_gram: factorization failed at pivot " +
          std::to_string(ch.pivot_index) +
          "; smallest eigenvalue " + std::to_string(ev));
    }
    ctx.factor = std::move(ch.lower);
  }
  return ctx;
}

linalg::Matrix gram_f(const GramContext& ctx) {
  const std::size_t n = ctx.vertices.size();
  linalg::Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double th =
          theta(ctx.family, ctx.vertices[i], ctx.vertices[j]).to_double();
      const double v = std::pow(ctx.lambda, -th);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

AffineEmbedding affine_embedding(const TreeFamily& f, double lambda,
                                 std::vector<Address> vertices) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("affine_embedding: lambda must lie in (0,1)");
  AffineEmbedding e{f, lambda, {}, {}};
  e.vertices = std::move(vertices);

  // One axis per edge occurring on some xi-to-vertex path, i.e. per
  // distinct non-root prefix.
  std::map<Address, std::size_t> axis;
  for (const Address& a : e.vertices)
    for (std::size_t len = 1; len <= a.depth(); ++len)
      axis.emplace(a.prefix(len), axis.size());

  const double log_inv = std::log(1.0 / lambda);
  e.points.assign(e.vertices.size(), std::vector<double>(axis.size(), 0.0));
  for (std::size_t i = 0; i < e.vertices.size(); ++i) {
    const Address& a = e.vertices[i];
    for (std::size_t len = 1; len <= a.depth(); ++len) {
      const Address edge = a.prefix(len);
      e.points[i][axis.at(edge)] =
          std::sqrt(f.edge_length_into(edge).to_double() * log_inv);
    }
  }
  return e;
}

double kernel_check(const AffineEmbedding& e) {
  double worst = 0.0;
  for (std::size_t i = 0; i < e.vertices.size(); ++i)
    for (std::size_t j = i; j < e.vertices.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < e.points[i].size(); ++k) {
        const double d = e.points[i][k] - e.points[j][k];
        d2 += d * d;
      }
      const double rho =
          distance(e.family, e.vertices[i], e.vertices[j]).to_double();
      worst = std::max(worst,
                       std::fabs(std::exp(-d2) - std::pow(e.lambda, rho)));
    }
  return worst;
}

std::vector<double> project_onto_subtree(const GramContext& ctx,
                                         const std::vector<Address>& subtree,
                                         std::span<const double> coeffs) {
  if (coeffs.size() != ctx.vertices.size())
    throw std::invalid_argument("project_onto_subtree: coefficient size mismatch");
  std::vector<int> idx;
  idx.reserve(subtree.size());
  for (const Address& a : subtree) idx.push_back(ctx.at(a));

  const std::size_t m = idx.size();
  linalg::Matrix block(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) block(i, j) = ctx.gram(idx[i], idx[j]);

  // Normal equations in the kernel inner product: G_SS x = (G v)_S.
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i)
    rhs[i] = kern::dot(ctx.gram.row(idx[i]), coeffs.data(), coeffs.size());

  const linalg::Cholesky ch = linalg::cholesky(block);
  if (!ch.ok)
    throw std::runtime_error("project_onto_subtree: singular subtree block at pivot " +
                             std::to_string(ch.pivot_index));
  const std::vector<double> x = linalg::cholesky_solve(ch.lower, rhs);

  std::vector<double> out(ctx.vertices.size(), 0.0);
  for (std::size_t i = 0; i < m; ++i) out[idx[i]] = x[i];
  return out;
}

std::vector<double> f_coefficients(const GramContext& ctx, const Address& a) {
  std::vector<double> v(ctx.vertices.size(), 0.0);
  const int i = ctx.at(a);
  v[i] = ctx.f_scale[i];
  return v;
}

double norm2(const GramContext& ctx, std::span<const double> coeffs) {
  return linalg::bilinear(coeffs, ctx.gram, coeffs);
}

double inner(const GramContext& ctx, std::span<const double> x,
             std::span<const double> y) {
  return linalg::bilinear(x, ctx.gram, y);
}

linalg::Matrix u_matrix(const GramContext& ctx, const Hierarchomorphism& g) {
  if (!g.has_interior_map())
    throw std::invalid_argument("u_matrix: element carries no interior data");
  const std::size_t n = ctx.vertices.size();
  linalg::Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Address image = g.apply_vertex(ctx.vertices[i]);
    const auto it = ctx.index.find(image);
    if (it == ctx.index.end())
      throw std::invalid_argument("u_matrix: vertex set not closed under the element (" +
                                  ctx.vertices[i].str() + " -> " + image.str() + ")");
    p(it->second, i) = 1.0;
  }
  return p;
}

std::vector<double> apply_relabel(const GramContext& ctx,
                                  const Hierarchomorphism& g,
                                  std::span<const double> coeffs) {
  if (coeffs.size() != ctx.vertices.size())
    throw std::invalid_argument("apply_relabel: coefficient size mismatch");
  std::vector<double> out(coeffs.size(), 0.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    out[ctx.at(g.apply_vertex(ctx.vertices[i]))] += coeffs[i];
  }
  return out;
}

linalg::Matrix deviation_form(const GramContext& ctx, const Hierarchomorphism& g) {
  if (!g.has_interior_map())
    throw std::invalid_argument("deviation_form: element carries no interior data");
  const std::size_t n = ctx.vertices.size();
  std::vector<Address> image(n);
  std::vector<double> image_depth(n);
  for (std::size_t i = 0; i < n; ++i) {
    image[i] = g.apply_vertex(ctx.vertices[i]);
    image_depth[i] = ctx.family.depth_length(image[i]).to_double();
  }
  linalg::Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double md =
          ctx.family.depth_length(meet(image[i], image[j])).to_double();
      const double rho = image_depth[i] + image_depth[j] - 2.0 * md;
      const double v = std::pow(ctx.lambda, rho) - ctx.gram(i, j);
      q(i, j) = v;
      q(j, i) = v;
    }
  return q;
}

}  // namespace treeharm
