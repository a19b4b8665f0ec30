#pragma once

#include <optional>
#include <string>
#include <vector>

#include "setreg/setvalued.hpp"

namespace setreg {

/// Neighborhood radii U = B(x, radius_u), V = B(y, radius_v),
/// W = B(p, radius_w) and the swept openness radii.
struct NeighborhoodConfig {
  double radius_u = 0.0;
  double radius_v = 0.0;
  std::optional<double> radius_w;
  double epsilon = 0.0;
  std::vector<double> rho_grid;

  void validate() const;
  /// The same config with the roles of U and V exchanged.
  NeighborhoodConfig mirrored() const;
  /// Radii of a quarter of the extents, epsilon half of radius_u, and eight
  /// halvings of epsilon for rho.
  static NeighborhoodConfig defaults(const GridSpace& x, const GridSpace& y,
                                     const GridSpace* p = nullptr);
};

/// Geometric grid epsilon, epsilon/2, ... (count values), increasing order.
std::vector<double> geometric_rho_grid(double epsilon, std::size_t count = 8);

enum class ModulusKind {
  Lop,
  Lip,
  Reg,
  Plop,
  Psdclm,
  Hemreg,
  LopX,
  LopP,
  LipX,
  LipP,
  RegX,
};

std::string to_string(ModulusKind kind);
ModulusKind parse_modulus_kind(const std::string& name);

/// Openness-type bounds are suprema, Lipschitz/regularity-type are infima.
enum class Direction { Sup, Inf };
Direction direction_of(ModulusKind kind);

/// A concrete tuple refuting one constant.
/// Openness: `target` lies in B(y, rho * L) but outside F(B(x, rho)).
/// Lipschitz: lhs = d(y, F(u)) exceeds L * coef with coef = ||x - u||.
/// Regularity: lhs = d(x, F^-1(y)) exceeds L * coef with coef = d(y, F(x)).
struct Witness {
  Point x;
  Point y;
  std::optional<Point> u;       // second source point (Lipschitz kinds)
  std::optional<Point> p;       // parameter held fixed
  std::optional<Point> q;       // second parameter (lip_p)
  std::optional<double> rho;    // openness kinds
  std::optional<Point> target;  // openness kinds
  ExtReal lhs;
  ExtReal coef;
};

/// Bracket of one exact bound.
/// Sup kinds: `lo` is feasible and `hi` is refuted by the witness.
/// Inf kinds: `hi` is feasible and `lo` is refuted by the witness.
/// lo = hi = 0 (inf kind) means 0 itself is feasible; lo = hi = +inf means
/// every finite constant is feasible (sup kind) or none is (inf kind).
struct ModulusReport {
  ModulusKind kind = ModulusKind::Lop;
  Point ref_x;
  Point ref_y;
  std::optional<Point> ref_p;
  NeighborhoodConfig config;
  ExtReal lo;
  ExtReal hi;
  std::optional<Witness> witness;
  double resolution = 1e-6;
  int iterations = 0;
  std::size_t checked = 0;  // constraint tuples enumerated
  std::vector<std::string> notes;

  Direction direction() const { return direction_of(kind); }
  bool contains(double value, double tol = 0.0) const;
  double width() const;
};

struct EstimateOptions {
  double resolution = 1e-6;
  int max_iterations = 200;
};

ModulusReport estimate_lop_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt = {});
ModulusReport estimate_lip_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt = {});
ModulusReport estimate_reg_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt = {});
ModulusReport estimate_plop_at(const MultiMap& f, PointView x, PointView y,
                               const NeighborhoodConfig& cfg,
                               const EstimateOptions& opt = {});
ModulusReport estimate_psdclm_at(const MultiMap& f, PointView x, PointView y,
                                 const NeighborhoodConfig& cfg,
                                 const EstimateOptions& opt = {});
ModulusReport estimate_hemreg_at(const MultiMap& f, PointView x, PointView y,
                                 const NeighborhoodConfig& cfg,
                                 const EstimateOptions& opt = {});

ModulusReport estimate(ModulusKind kind, const MultiMap& f, PointView x,
                       PointView y, const NeighborhoodConfig& cfg,
                       const EstimateOptions& opt = {});

/// Partial bounds of F(x, p), uniform over p in W (lop_x, lip_x, reg_x) or
/// over x in U (lop_p, lip_p). cfg.radius_w must be set.
ModulusReport estimate_partial(const ParamMultiMap& f, ModulusKind which,
                               PointView x, PointView p, PointView y,
                               const NeighborhoodConfig& cfg,
                               const EstimateOptions& opt = {});

/// Definitional check of one constant, evaluated directly with balls and
/// images and without the estimator's caches.
bool constant_feasible(ModulusKind kind, const MultiMap& f, PointView x,
                       PointView y, const NeighborhoodConfig& cfg, double l);
bool constant_feasible(const ParamMultiMap& f, ModulusKind which, PointView x,
                       PointView p, PointView y, const NeighborhoodConfig& cfg,
                       double l);

/// Re-evaluates the stored witness against F; true iff it refutes `l`.
bool witness_refutes(const ModulusReport& report, const MultiMap& f, double l);
bool witness_refutes(const ModulusReport& report, const ParamMultiMap& f,
                     double l);

struct EquivalenceReport {
  bool around = true;
  std::vector<ModulusReport> reports;  // F-openness, F^-1 Lipschitz, F regularity
  /// Brackets of the common value: reciprocal of the openness bracket, then
  /// the two others.
  std::vector<std::pair<double, double>> intervals;
  double tolerance = 0.0;
  bool agree = false;
};

EquivalenceReport check_equivalence_around(const MultiMap& f, PointView x,
                                           PointView y,
                                           const NeighborhoodConfig& cfg,
                                           const EstimateOptions& opt = {});
EquivalenceReport check_equivalence_at(const MultiMap& f, PointView x,
                                       PointView y,
                                       const NeighborhoodConfig& cfg,
                                       const EstimateOptions& opt = {});

struct LinearModuli {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> singular_values;  // descending
  bool surjective = false;
  ExtReal lop;     // = plop
  ExtReal reg;     // = hemreg = norm of the inverse adjoint
};

/// Euclidean-norm moduli of x -> A x from the singular values of A.
LinearModuli linear_operator_moduli(const Matrix& a);

}  // namespace setreg
