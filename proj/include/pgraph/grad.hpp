#pragma once

#include "pgraph/xproduct.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pgraph {

/// ∂E/∂x for every parameter of a policy graph, laid out like PolicyGraph.
/// Entries of forbidden parameters are 0.
struct GradientVector {
  Matrix d_psi;   // |N| x |A|
  Matrix d_eta;   // |N||O| x |N|
  Matrix d_eta0;  // |O| x |N|

  Scalar sup_norm() const;
};

struct GradientStats {
  /// Work shared by all parameters: the value solve, or forming (I - γT̄)⁻¹.
  std::uint64_t setup_ops = 0;
  /// Work spent per parameter, summed over parameters.
  std::uint64_t parameter_ops = 0;
  int parameters = 0;
};

enum class InverseMethod {
  Direct,    ///< dense LU
  Iteration  ///< W <- I + γ T̄ W until the certified error is below tolerance
};

/**
 * Gradient through the fundamental matrix W = (I - γT̄)⁻¹. With u = π̄⁰ W,
 *
 *   ∂E/∂ψ(n,a)     = Σ_s u(n,s) [r(s,a) + γ Σ_{s'} T(s,a,s') Σ_o B(s',o) Σ_{n'} η(n,o,n') V(n',s')]
 *   ∂E/∂η(n,o,n')  = γ Σ_s u(n,s) Σ_a ψ(n,a) Σ_{s'} T(s,a,s') B(s',o) V(n',s')
 *   ∂E/∂η⁰(o,n)    = Σ_s π⁰(s) B(s,o) V(n,s)
 *
 * `constraints` (optional) selects the parameters to differentiate.
 */
GradientVector gradient_matrix(const Pomdp& model, const PolicyGraph& graph,
                               const ConstraintSet* constraints = nullptr,
                               InverseMethod method = InverseMethod::Direct,
                               const SolverOptions& options = {}, GradientStats* stats = nullptr);

/// The same gradient with one vector solve per parameter: V₁ = ∂C̄ + γ ∂T̄ V,
/// V₂ = V₁ + γ T̄ V₂, ∂E = π̄⁰ V₂. Parameters are split across
/// `options.threads` workers.
GradientVector gradient_vectorwise(const Pomdp& model, const PolicyGraph& graph,
                                   const ConstraintSet* constraints = nullptr,
                                   const SolverOptions& options = {}, GradientStats* stats = nullptr);

enum class GradientMethod { Auto, Matrix, Vectorwise };

/// Auto picks the vector method unless there are more free parameters than
/// node-state pairs.
GradientVector compute_gradient(const Pomdp& model, const PolicyGraph& graph,
                                const ConstraintSet& constraints, GradientMethod method = GradientMethod::Auto,
                                const SolverOptions& options = {}, GradientStats* stats = nullptr);

/**
 * x <- x + β d for every distribution row, where d is the gradient projected
 * onto the tangent cone of the simplex over the allowed coordinates. When the
 * step reaches a face, the remaining budget continues along the projection
 * onto that face (`walk_faces`) or the step stops there.
 */
PolicyGraph project_and_step(const PolicyGraph& graph, const GradientVector& grad, Scalar step,
                             const ConstraintSet& constraints, bool walk_faces = true);

struct AscentConfig {
  Scalar step_size = 1.0;
  int max_iterations = 2000;
  /// Stop once the criterion reaches target_fraction * reference.
  Scalar target_fraction = 0.99;
  std::optional<Scalar> reference;
  /// Without a reference: stop when the criterion gained less than this
  /// (relative) over the last `patience` iterations.
  Scalar improvement_tolerance = 1e-10;
  int patience = 50;
  std::uint64_t seed = 0;
  /// Start from a random interior graph drawn with `seed` instead of the
  /// uniform one.
  bool random_init = false;
  /// Let η⁰ move; otherwise every observation starts in node 0.
  bool free_start = false;
  bool walk_faces = true;
  GradientMethod method = GradientMethod::Auto;
  SolverOptions solver;
};

struct AscentStep {
  int iteration;
  Scalar criterion;
  Scalar step_size;
  Scalar gradient_norm;
};

struct AscentResult {
  PolicyGraph best_graph;
  Scalar best_value = 0;
  std::vector<AscentStep> history;
  bool reached_target = false;
  int step_halvings = 0;
};

AscentResult gradient_ascent(const Pomdp& model, const ConstraintSet& constraints,
                             const AscentConfig& config = {}, const PolicyGraph* init = nullptr);

/// iteration,criterion,step_size,gradient_norm with 17 significant digits.
std::string history_csv(const std::vector<AscentStep>& history);

}  // namespace pgraph
