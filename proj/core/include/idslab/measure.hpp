#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "idslab/rng.hpp"

namespace idslab {

// Finite Borel probability measures on the real line, restricted to four
// representable families. Every variant has compact support, so support() is
// always a finite interval. Measures are immutable values; scaling and
// translation return fresh objects.

struct Atom {
  double position;
  double weight;
};

// Density piece on [left, right] with linear interpolation between the
// endpoint values; constant pieces have value_left == value_right.
struct DensityPiece {
  double left;
  double right;
  double value_left;
  double value_right;

  double mass() const;
  double slope() const;
  // Integral of the density over [left, min(x, right)], 0 when x <= left.
  double mass_below(double x) const;
};

struct AtomicSpec {
  std::vector<Atom> atoms;  // sorted by position, weights > 0, total 1
};

struct DensitySpec {
  std::vector<DensityPiece> pieces;  // sorted, non-overlapping, total mass 1
};

// Self-similar Cantor-type measure on [left, right]: two affine contractions
// with ratio in (0, 1/2] mapping the interval to its left and right ends, mass
// split 1/2 each, iterated `depth` times; at the truncation depth the mass is
// spread uniformly over each surviving cell. All queries resolve this
// truncated measure exactly; depth only bounds the recursion.
struct IfsCantorSpec {
  double left;
  double right;
  double ratio;
  int depth;
};

class Measure;

struct MixtureComponent {
  double weight;
  std::shared_ptr<const Measure> component;
};

struct MixtureSpec {
  std::vector<MixtureComponent> parts;  // weights > 0, total 1
};

class Measure {
 public:
  using Spec = std::variant<AtomicSpec, DensitySpec, IfsCantorSpec, MixtureSpec>;

  // Constructors validate eagerly and throw std::invalid_argument with a
  // actionable message on bad input (unsorted atoms, nonpositive weight,
  // mass != 1 beyond 1e-9, overlapping pieces, ratio outside (0, 1/2], ...).
  static Measure atomic(std::vector<Atom> atoms);
  static Measure point_mass(double position);
  static Measure density(std::vector<DensityPiece> pieces);
  static Measure uniform(double left, double right);
  static Measure ifs_cantor(double left, double right, double ratio, int depth);
  static Measure mixture(std::vector<std::pair<double, Measure>> parts);

  const Spec& spec() const { return *spec_; }
  bool is_atomic_only() const;  // true when all mass sits in atoms

  // Mass of the open interval (x - eps, x + eps); atoms exactly at the
  // endpoints are excluded. Requires eps > 0 (std::domain_error otherwise).
  double interval_mass(double x, double eps) const;

  // Right-continuous distribution function, mass of (-inf, x].
  double cdf(double x) const;
  // Mass of (-inf, x).
  double cdf_left(double x) const;
  // Total atomic mass exactly at x.
  double atom_at(double x) const;

  // Inverse-CDF sampling; consumes one or more draws from the stream.
  double sample(RandomStream& rs) const;

  // Image measures of Remark-style rescalings:
  //   scaled(c):  B -> mu(c B), i.e. pushforward of mu under x -> x / c; c != 0.
  //   translated(c):  B -> mu(B + c), pushforward under x -> x - c.
  Measure scaled(double c) const;
  Measure translated(double c) const;

  // sup over open intervals I with |I| <= eps of mu(I). Exact for atomic and
  // density variants and for the truncated IFS family; for mixtures involving
  // an IFS component the result is a certified lower bound (feature-aligned
  // candidate windows, IFS cells enumerated adaptively to the window width).
  // Nondecreasing in eps; translation-invariant bit-for-bit whenever the
  // translation offset is exactly representable against the feature set.
  double modulus_of_continuity(double eps) const;

  // Smallest closed interval carrying all mass. Width 0 for single atoms.
  std::pair<double, double> support() const;

 private:
  explicit Measure(Spec spec);
  std::shared_ptr<const Spec> spec_;
};

// Free-function aliases for the operation names used by configs and reports.
inline double interval_mass(const Measure& m, double x, double eps) { return m.interval_mass(x, eps); }
inline double cdf(const Measure& m, double x) { return m.cdf(x); }
inline Measure scale_measure(const Measure& m, double c) { return m.scaled(c); }
inline Measure translate_measure(const Measure& m, double c) { return m.translated(c); }
inline double modulus_of_continuity(const Measure& m, double eps) { return m.modulus_of_continuity(eps); }

// Flattened view used by transform sweeps and quadrature: atoms plus weighted
// density pieces, with IFS components expanded to at most `max_ifs_cells`
// cells each (as uniform cell densities when the stored depth exceeds the
// cap, as exact depth-level cells otherwise).
struct FlattenedMeasure {
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;  // piece values already carry the weight
};
FlattenedMeasure flatten(const Measure& m, int max_ifs_cells = 4096);

}  // namespace idslab
