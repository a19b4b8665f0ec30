#pragma once

#include <optional>
#include <string>
#include <vector>

#include "setreg/composition.hpp"

namespace setreg {

/// S(p) = {x : 0 ∈ H(x, p)} for H : X × P ⇉ Y.
struct ImplicitInstance {
  ParamMultiMap h;
  Point x_bar;
  Point p_bar;
  double c = 0.0;      // partial openness rate (in x for xSp, in p for pSx)
  double gamma = 0.0;  // ball cap around 0 in Y
  double alpha = 0.0;  // x-neighborhood
  double beta = 0.0;   // p-neighborhood
  /// Neighborhoods for the partial hypotheses at ((x̄, p̄), 0);
  /// radius_w defaults to beta.
  NeighborhoodConfig config;
  /// Neighborhoods for the companion sweeps on S at (p̄, x̄); defaults to
  /// U = B(p̄, beta), V = B(x̄, alpha).
  std::optional<NeighborhoodConfig> solution_config;
};

/// Gr S = {(p, x) : ((x, p), 0) ∈ Gr H}; throws OffGridError if 0 is not
/// on H's target grid.
MultiMap implicit_map(const ParamMultiMap& h);

enum class ImplicitSide { XSp, PSx };
std::string to_string(ImplicitSide side);

struct EstimateRow {
  Point x;
  Point p;
  ExtReal lhs;
  ExtReal rhs;  // +inf when H(x, p) ∩ B(0, gamma) is empty
  std::optional<double> ratio;
  bool holds = false;
};

struct ImplicitEstimateReport {
  ImplicitSide side = ImplicitSide::XSp;
  double c = 0.0;
  HypothesisResult hypothesis;
  std::vector<EstimateRow> rows;
  std::size_t violations = 0;
  Status status = Status::Fail;
};

/// d(x, S(p)) ≤ c⁻¹ d(0, H(x, p) ∩ B(0, gamma)) with c validated as lop_x.
/// A refuted hypothesis yields a FAIL report with no rows.
ImplicitEstimateReport verify_xSp_estimate(const ImplicitInstance& inst,
                                           PointView x, PointView p,
                                           const EstimateOptions& opt = {});
/// d(p, S⁻¹(x)) ≤ c⁻¹ d(0, H(x, p) ∩ B(0, gamma)) with c validated as lop_p.
ImplicitEstimateReport verify_pSx_estimate(const ImplicitInstance& inst,
                                           PointView x, PointView p,
                                           const EstimateOptions& opt = {});
/// Either estimate at every (x, p) in B(x̄, alpha) × B(p̄, beta).
ImplicitEstimateReport sweep_estimate(const ImplicitInstance& inst,
                                      ImplicitSide side,
                                      const EstimateOptions& opt = {},
                                      bool fail_fast = false);

struct SolutionBound {
  std::string name;  // "lip_S" or "reg_S"
  double bound = 0.0;
  /// The rate c and the partial Lipschitz constant, both validated.
  std::vector<HypothesisResult> hypotheses;
  ModulusReport companion;
  bool companion_ok = false;
  Status status = Status::Fail;
};

/// lip S(p̄, x̄) ≤ c⁻¹ lip_p_H; the companion is the swept lip of S.
SolutionBound bound_lip_S(const ImplicitInstance& inst, double lip_p_h,
                          const EstimateOptions& opt = {});
/// reg S(p̄, x̄) ≤ c⁻¹ lip_x_H; the companion is the swept reg of S.
SolutionBound bound_reg_S(const ImplicitInstance& inst, double lip_x_h,
                          const EstimateOptions& opt = {});

/// Γ(z, w) = {y : w ∈ G(y, z)} for G : Y × Z ⇉ W.
struct GammaInstance {
  BiMultiMap g;
  Point y_bar;
  Point z_bar;
  Point w_bar;
  double C = 0.0;
  double D = 0.0;
  double gamma = 0.0;
  double delta = 0.01;
  /// Neighborhoods for the partial hypotheses at ((ȳ, z̄), w̄);
  /// radius_w (the z-neighborhood) defaults to radius_u.
  NeighborhoodConfig config;
};

PointSet gamma_map(const GammaInstance& inst, PointView z, PointView w);

struct GammaCheck {
  Point z, w, z2, w2;
  double radius = 0.0;  // (1 + delta)/C · (D‖z - z2‖ + ‖w - w2‖)
  ExtReal defect;
  std::optional<Point> missing;
};

/// Γ(z, w) ∩ D(ȳ, gamma) ⊂ Γ(z2, w2) + radius·D_Y, closed balls.
GammaCheck verify_gamma_lipschitz(const GammaInstance& inst, PointView z,
                                  PointView w, PointView z2, PointView w2);

struct GammaReport {
  double delta = 0.0;
  std::vector<HypothesisResult> hypotheses;
  /// G(y, z) - w is Lipschitz-like in (z, w) uniformly in y with the
  /// constant form D‖z - z'‖ + ‖w - w'‖.
  bool intermediate_holds = false;
  std::size_t intermediate_checked = 0;
  std::optional<std::string> intermediate_counterexample;
  std::vector<GammaCheck> checks;
  std::size_t violations = 0;
  Status status = Status::Fail;
};

/// Hypotheses, the intermediate claim, and the inclusion over every
/// (z, w, z', w') in the closed gamma-boxes around (z̄, w̄).
GammaReport verify_gamma_lemma(const GammaInstance& inst,
                               const EstimateOptions& opt = {},
                               bool fail_fast = false);

}  // namespace setreg
