#pragma once

#include <map>
#include <span>
#include <vector>

#include "treeharm/hier.hpp"
#include "treeharm/linalg.hpp"
#include "treeharm/tree.hpp"

namespace treeharm {

// Finite realization of the kernel space over a vertex set: the Gram
// matrix with entries lambda^rho(a,b) together with its triangular
// factor. Rows of the factor are coordinates of the basis vectors e_a;
// f_a = lambda^{-rho(xi,a)} e_a carries the boundary-side scaling.
struct GramContext {
  TreeFamily family;
  double lambda = 0.0;
  std::vector<Address> vertices;
  std::map<Address, int> index;
  linalg::Matrix gram;          // lambda^rho(a,b)
  linalg::Matrix factor;        // lower triangular, gram = L L^T (may be empty)
  std::vector<double> f_scale;  // lambda^{-rho(xi,a)} per vertex

  int at(const Address& a) const;  // throws if absent
};

// Builds the context; with factorize set, a failed factorization throws
// and the message reports the smallest eigenvalue.
GramContext build_gram(const TreeFamily& f, double lambda,
                       std::vector<Address> vertices, bool factorize = true);

// Matrix with entries lambda^{-theta(a,b)}; equals D * gram * D for
// D = diag(f_scale) up to roundoff.
linalg::Matrix gram_f(const GramContext& ctx);

// Points in an affine space with one axis per edge on the xi-to-vertex
// path; squared point distances are rho(a,b) * ln(1/lambda), so
// exp(-dist^2) reproduces the kernel. Kept as an independent positivity
// certificate next to the factorization route.
struct AffineEmbedding {
  TreeFamily family;
  double lambda = 0.0;
  std::vector<Address> vertices;
  std::vector<std::vector<double>> points;  // dense over collected edge axes
};

AffineEmbedding affine_embedding(const TreeFamily& f, double lambda,
                                 std::vector<Address> vertices);
// max |exp(-||N_a - N_b||^2) - lambda^rho(a,b)| over all pairs
double kernel_check(const AffineEmbedding& e);

// Orthogonal projection (in the kernel inner product) of the coefficient
// vector onto the span of the subtree's basis vectors.
std::vector<double> project_onto_subtree(const GramContext& ctx,
                                         const std::vector<Address>& subtree,
                                         std::span<const double> coeffs);

// Coefficient vector of f_a in the context.
std::vector<double> f_coefficients(const GramContext& ctx, const Address& a);
double norm2(const GramContext& ctx, std::span<const double> coeffs);
double inner(const GramContext& ctx, std::span<const double> x,
             std::span<const double> y);

// Permutation matrix of a -> g(a) in the e-basis. The vertex set must be
// closed under g; otherwise this throws.
linalg::Matrix u_matrix(const GramContext& ctx, const Hierarchomorphism& g);
// Pushes a coefficient vector through the relabeling a -> g(a); every
// vertex carrying a nonzero coefficient must have its image in the
// context. Works where a full permutation matrix does not exist.
std::vector<double> apply_relabel(const GramContext& ctx,
                                  const Hierarchomorphism& g,
                                  std::span<const double> coeffs);

// Matrix with entries lambda^rho(ga,gb) - lambda^rho(a,b) over the
// context's vertex set; the finite-rank deviation of the induced
// operator from an orthogonal one.
linalg::Matrix deviation_form(const GramContext& ctx, const Hierarchomorphism& g);

}  // namespace treeharm
