#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "setreg/composition.hpp"

namespace setreg {

/// A metric on the EVP domain, carried with a printable name.
struct PerturbationNorm {
  std::string name;
  std::function<double(PointView, PointView)> distance;
};

/// scale * (space distance).
PerturbationNorm grid_norm(SpacePtr space, double scale = 1.0);

/// τ(LC - MD) max{‖p‖, ‖q‖/L, ‖r‖/M, ‖s‖/(LC + MD)} on X × Y × Z × W,
/// with each block measured in its own space's norm.
struct ScaledMaxNorm {
  double tau = 0.5;
  double L = 1.0, M = 1.0, C = 1.0, D = 0.0;
  SpacePtr x, y, z, w;

  double operator()(PointView a, PointView b) const;
  PerturbationNorm handle() const;
};

struct EkelandPoint {
  Point point;
  double value = 0.0;
  Point reference;
  std::string norm;
  std::size_t iterations = 0;
  std::vector<std::pair<Point, double>> trace;  // reference first
  bool ek1 = false;  // h(v) ≤ h(ref) - ‖v - ref‖
  bool ek2 = false;  // h(v) ≤ h(w) + ‖v - w‖ for every w
};

/// Strict-improvement descent from `reference`: moves to the improving
/// point of least h (ties by lexicographic order) until none is left, then
/// re-checks both conclusions over the whole domain.
EkelandPoint ekeland_point(const std::vector<Point>& domain,
                           const std::vector<double>& h, PointView reference,
                           const PerturbationNorm& norm);

enum class SolveOutcome { Success, DiscretizationGap };
std::string to_string(SolveOutcome o);

struct SolveOptions {
  std::optional<double> rho;  // default: least swept rho whose rate ball holds u
  std::optional<double> tau;  // default: (1 + ‖u - w̄‖/((LC - MD)ρ))/2
  bool check_hypotheses = true;
  EstimateOptions estimate;
};

struct SolveResult {
  SolveOutcome outcome = SolveOutcome::DiscretizationGap;
  Point u;
  Point x;  // x-component of the EVP point
  double residual = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double rate = 0.0;
  std::size_t domain_size = 0;
  std::vector<HypothesisResult> hypotheses;
  EkelandPoint evp;
  /// On SUCCESS: u ∈ H(x) and ‖x - x̄‖ < ρ, re-checked on H itself.
  bool certified = false;
};

/// Finds x with u ∈ G(F1(x), F2(x)) near x̄ by running the EVP on the
/// constraint set inside the closed box A of radii (ρ, Lρ, Mρ, (LC + MD)ρ).
/// Throws PreconditionError if u is outside B(w̄, (LC - MD)ρ) or a
/// hypothesis is refuted.
SolveResult solve_inclusion(const MultiMap& f1, const MultiMap& f2,
                            const BiMultiMap& g, const OpCompAnchor& anchor,
                            const RateConstants& k, PointView u,
                            const NeighborhoodConfig& cfg,
                            const SolveOptions& opt = {});

}  // namespace setreg
