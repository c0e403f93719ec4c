#pragma once

#include <span>
#include <vector>

#include "treeharm/gram.hpp"
#include "treeharm/hier.hpp"
#include "treeharm/tree.hpp"

namespace treeharm {

// Real-valued charge on the absolute, described by its values on the
// balls of a cut and extended to finer cuts by equal splitting.
struct CylinderMeasure {
  Cut cut;
  std::vector<double> values;  // aligned with cut.boundary()

  CylinderMeasure() = default;
  CylinderMeasure(Cut c, std::vector<double> v);
};

double total_mass(const CylinderMeasure& m);
double variation(const CylinderMeasure& m);

// Re-expresses the measure on another cut: coarsening sums children,
// refining splits equally. Any target cut works since refine-then-coarsen
// passes through the common refinement.
CylinderMeasure push_to_cut(const TreeFamily& f, const CylinderMeasure& m,
                            const Cut& target);

// Mass of the ball at a vertex: the sum of cut values below it, or its
// equal-split share when the vertex lies below the cut.
double ball_mass(const TreeFamily& f, const CylinderMeasure& m, const Address& v);

// Coefficients of sum_u mu(B_u) f_u over the context's vertex set; the
// context must contain the cut boundary.
std::vector<double> psi_vector(const GramContext& ctx, const CylinderMeasure& m);
double norm_gram(const GramContext& ctx, const CylinderMeasure& m);
// Convenience: builds an unfactorized context over the cut boundary.
double norm_gram_at_cut(const TreeFamily& f, double lambda,
                        const CylinderMeasure& m, const Cut& cut);

// Contribution of the single refinement step at u to the squared norm:
// lambda^{-2 rho(xi,u)} * sum_children (lambda^{-2 len} - 1) * mass^2.
double z_term(const TreeFamily& f, double lambda, const CylinderMeasure& m,
              const Address& u);

// Squared-norm partial sum over all refinements at simplicial depth
// < depth: total^2 plus the z sums. Equals the Gram norm at the matching
// depth cut; below the measure's cut the per-level sums are closed-form,
// so the cost is O(cut size * depth). Requires depth >= cut depth.
double norm_series(const TreeFamily& f, double lambda, const CylinderMeasure& m,
                   int depth);
// Per-depth refinement sums: out[d] = sum of z terms at depth d.
std::vector<double> level_aggregates(const TreeFamily& f, double lambda,
                                     const CylinderMeasure& m, int depth);
// log of the per-depth sums (-inf for exact zeros); safe far past the
// range where the raw sums overflow.
std::vector<double> level_aggregates_log(const TreeFamily& f, double lambda,
                                         const CylinderMeasure& m, int depth);

CylinderMeasure uniform_measure(const TreeFamily& f);
// Limit squared norm of the uniform measure on the (p+1)-regular tree
// with unit edges; requires lambda^2 p > 1.
double uniform_norm_closed_form(int p, double lambda);

// Exact limit squared norm of the unit ball-indicator at a vertex
// (mass 1 on the ball, equal split below); finite when the per-level
// ratio is below one.
double ball_indicator_norm2(const TreeFamily& f, double lambda, const Address& v);

// Cut-level approximation of the boundary inner product: ball values
// weighted by the minimum of lambda^{-theta} over ball pairs. Equals the
// gram_f bilinear form at the same cut.
double darboux_sum(const TreeFamily& f, double lambda, const CylinderMeasure& m1,
                   const CylinderMeasure& m2, const Cut& cut);

// Zeroes the measure outside the ball at branch_root (refining first if
// the cut does not resolve the ball).
CylinderMeasure restrict_to_ball(const TreeFamily& f, const CylinderMeasure& m,
                                 const Address& branch_root);

// lambda^{-2 N s} (lambda^{-2 s} - 1) * sum of squared ball masses at the
// simplicial depth-N cut, s a lower bound for the edge lengths.
double norm_lower_bound(const TreeFamily& f, const CylinderMeasure& m,
                        double lambda, int n_depth, const Rat& sigma_len);

struct SigmaTraceRow {
  double lambda;
  int depth;
  double log_partial;  // log of the last per-depth aggregate
  double ratio;        // growth ratio of consecutive aggregates
  bool convergent;
};

struct SigmaEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;
  std::vector<SigmaTraceRow> trace;
};

// Bisection for the critical decay parameter: a lambda is classified by
// the growth ratio of the last per-depth aggregates of the probe's
// series (geometric decay vs growth). Throws when a probe fails to
// discriminate.
SigmaEstimate estimate_sigma(const TreeFamily& f, const CylinderMeasure& probe,
                             int depth = 160, double tol = 0.005);
SigmaEstimate estimate_sigma(const TreeFamily& f, int depth = 160,
                             double tol = 0.005);

// Boundary action on measures: the image ball g.B carries
// lambda^{-n(g,B)} times the value of B, which makes the measure action
// intertwine with the relabeling action on the kernel space.
CylinderMeasure transform_measure(const Hierarchomorphism& g, double lambda,
                                  const CylinderMeasure& m);

// Rank of the change of boundary inner products on the ball indicators
// of the depth cut; zero exactly when the element acts as an isometry of
// theta fixing xi.
int boundary_deviation_rank(const Hierarchomorphism& g, double lambda, int depth,
                            double tol = 1e-8);

// Random charge at a random cut, deterministic from the seed.
CylinderMeasure random_charge(const TreeFamily& f, std::uint64_t seed,
                              int depth_budget);

}  // namespace treeharm
