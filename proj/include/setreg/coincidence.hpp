#pragma once

#include <optional>
#include <string>
#include <vector>

#include "setreg/composition.hpp"

namespace setreg {

/// {x : F1(x) ∩ F2(x) ≠ ∅}. The sources must be the same grid; the targets
/// may differ and are matched by coordinates.
PointSet fix_set(const MultiMap& f1, const MultiMap& f2);

/// S(p) = Fix(F1(., p)⁻¹ F2) assembled as a map P ⇉ X.
MultiMap parametric_fix(const ParamMultiMap& f1, const MultiMap& f2);

struct CoincidenceInstance {
  MultiMap f1;
  MultiMap f2;
  Point x_bar;
  Point y_bar;
  double l = 0.0;  // regularity of F1 at (x̄, ȳ)
  double m = 0.0;  // Lipschitz-likeness of F2 at (x̄, ȳ)
  double alpha = 0.0;
  double beta = 0.0;
  /// Neighborhoods for the two hypotheses; epsilon also feeds the proof
  /// constraints.
  NeighborhoodConfig config;
  /// Grid for F1 - F2 (default: F1's target).
  SpacePtr diff;
};

/// One of the sufficient inequalities on alpha and beta.
struct ProofConstraint {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// α < m, α < ε, mα < β, 3β < ε, 2(l⁻¹ - m)⁻¹β < ε.
std::vector<ProofConstraint> proof_constraints(double l, double m, double alpha,
                                               double beta, double epsilon);

struct ProofRadii {
  double alpha = 0.0;
  double beta = 0.0;
  std::string binding_alpha;
  std::string binding_beta;
};

/// Half of the largest alpha and beta the five inequalities allow.
ProofRadii proof_radii(double l, double m, double epsilon);

enum class FixpVariant { Diffix, Difference };
std::string to_string(FixpVariant v);

struct FixpRow {
  Point x;
  ExtReal lhs;  // d(x, Fix)
  ExtReal rhs;
  std::optional<double> ratio;
  bool holds = false;
  /// Difference variant only: the diffix rhs at the same x.
  std::optional<ExtReal> rhs_diffix;
};

struct FixpReport {
  FixpVariant variant = FixpVariant::Diffix;
  double factor = 0.0;  // (1/l - m)⁻¹
  std::vector<HypothesisResult> hypotheses;
  std::vector<Point> fix;
  std::vector<FixpRow> rows;
  std::size_t violations = 0;
  std::vector<ProofConstraint> proof;
  std::optional<std::string> binding;  // proof constraint with least slack
  Status status = Status::Fail;
};

/// d(x, S) ≤ (l⁻¹ - m)⁻¹ d(F1(x) ∩ B(ȳ, β), F2(x)) at one x ∈ B(x̄, α).
FixpReport verify_fixp_bound(const CoincidenceInstance& inst, PointView x,
                             const EstimateOptions& opt = {});
/// d(x, S) ≤ (l⁻¹ - m)⁻¹ d(0, (F1 - F2)(x) ∩ B(0, β)).
FixpReport verify_fixp_bound_alt(const CoincidenceInstance& inst, PointView x,
                                 const EstimateOptions& opt = {});
/// Either bound at every grid x in B(x̄, α).
FixpReport sweep_fixp_bound(const CoincidenceInstance& inst, FixpVariant v,
                            const EstimateOptions& opt = {},
                            bool fail_fast = false);

}  // namespace setreg
