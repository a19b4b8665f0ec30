#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "setreg/moduli.hpp"

namespace setreg {

enum class Theorem { OpComp, PartA, PartB, MainConst, LyusternikGraves };

std::string to_string(Theorem t);

/// Constants of the composition theorems; each theorem reads the ones it
/// needs and rejects missing ones.
struct RateConstants {
  std::optional<double> L;  // openness of F1 (or F)
  std::optional<double> M;  // Lipschitz-likeness of F2 (or openness of G in LG)
  std::optional<double> C;  // partial openness of G
  std::optional<double> D;  // partial Lipschitz constant of G
  std::optional<double> l;  // regularity of F1
  std::optional<double> m;  // Lipschitz-likeness of F2
};

struct HypothesisResult {
  std::string name;
  bool passed = false;
  double claimed = 0.0;
  std::optional<ModulusReport> report;
  std::string note;
};

/// One inclusion B(w, rate * rho) ⊂ H(B(x, rho)) that was checked.
struct ConclusionResult {
  std::string conclusion;  // "at_reference", "around", "graph"
  Point x;
  Point w;
  std::vector<Point> via;  // intermediate incidences (y, z, ...)
  double rho = 0.0;
  ExtReal defect;
  std::optional<Point> missing;  // a point of the left ball outside the image
};

enum class Status { Pass, Fail };
std::string to_string(Status s);

struct CompositionCertificate {
  Theorem theorem = Theorem::OpComp;
  RateConstants constants;
  double rate = 0.0;
  std::vector<HypothesisResult> hypotheses;
  double epsilon_used = 0.0;
  std::optional<double> epsilon_formula;
  std::vector<ConclusionResult> conclusions;
  Status status = Status::Fail;
  std::optional<ConclusionResult> failure;
  std::optional<std::string> failed_hypothesis;
  /// min over checks of (gap to the nearest point outside the image) / rho.
  ExtReal observed_rate = ExtReal::infinity();
  double slack = 0.0;
  // Lyusternik-Graves only: the mirrored map G - F^-1.
  std::optional<double> symmetric_rate;
  std::optional<ExtReal> symmetric_observed_rate;
  std::vector<std::string> notes;

  bool passed() const { return status == Status::Pass; }
};

struct CertifyOptions {
  EstimateOptions estimate;
  bool fail_fast = false;
};

struct OpCompAnchor {
  Point x, y, z, w;
};

/// H(x) = G(F1(x), F2(x)) with G open in y uniformly in z (C) and Lipschitz
/// in z uniformly in y (D). cfg.radius_w is the z-neighborhood for G and
/// defaults to radius_u.
CompositionCertificate certify_op_comp(const MultiMap& f1, const MultiMap& f2,
                                       const BiMultiMap& g,
                                       const OpCompAnchor& anchor,
                                       const RateConstants& k,
                                       const NeighborhoodConfig& cfg,
                                       const CertifyOptions& opt = {});

/// The hypotheses of certify_op_comp alone, without the conclusion sweep.
std::vector<HypothesisResult> op_comp_hypotheses(const MultiMap& f1,
                                                 const MultiMap& f2,
                                                 const BiMultiMap& g,
                                                 const OpCompAnchor& anchor,
                                                 const RateConstants& k,
                                                 const NeighborhoodConfig& cfg,
                                                 const EstimateOptions& opt = {});

struct PartAnchor {
  Point x, y, z;
};

/// Phi(x) = G(x, F(x)); rate LC - D. With check_cond, the disjointness
/// condition G(x, y) ∩ G(x, y') = ∅ is swept first and, if it holds, the
/// conclusion is also checked at every point of Gr Phi near the anchor.
CompositionCertificate certify_part_A(const MultiMap& f, const BiMultiMap& g,
                                      const PartAnchor& anchor,
                                      const RateConstants& k,
                                      const NeighborhoodConfig& cfg,
                                      bool check_cond,
                                      const CertifyOptions& opt = {});

/// Phi(x) = G(x, F(x)); rate C - MD. With singleton_check, F(x̄) = {ȳ}
/// and Lipschitz continuity of F near x̄ enable the Gr Phi conclusion.
CompositionCertificate certify_part_B(const MultiMap& f, const BiMultiMap& g,
                                      const PartAnchor& anchor,
                                      const RateConstants& k,
                                      const NeighborhoodConfig& cfg,
                                      bool singleton_check,
                                      const CertifyOptions& opt = {});

struct MainConstAnchor {
  Point x, y1, y2;
};

/// (F1 - F2) with F1 l-regular and F2 m-Lipschitz-like; rate 1/l - m.
/// Differences are snapped onto `diff` (default: F1's target).
CompositionCertificate certify_main_const(const MultiMap& f1,
                                          const MultiMap& f2,
                                          const MainConstAnchor& anchor,
                                          const RateConstants& k,
                                          const NeighborhoodConfig& cfg,
                                          SpacePtr diff = nullptr,
                                          const CertifyOptions& opt = {});

/// F - G^-1 for F: X ⇉ Y punctually L-open and G: Y ⇉ X punctually M-open
/// at every graph point; rate L - 1/M. With symmetric, G - F^-1 at rate
/// M - 1/L is certified as well.
CompositionCertificate certify_lyusternik_graves(
    const MultiMap& f, const MultiMap& g, const RateConstants& k,
    const NeighborhoodConfig& cfg, bool symmetric = false,
    SpacePtr diff = nullptr, SpacePtr diff_symmetric = nullptr,
    const CertifyOptions& opt = {});

/// Checks a claimed constant against a modulus report; undecided cases
/// inside the bracket are settled with the definitional check.
HypothesisResult validate_constant(std::string name, const ModulusReport& r,
                                   double claimed,
                                   const std::function<bool(double)>& feasible);

}  // namespace setreg
