#include "idslab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace idslab {

namespace {

constexpr double kMassTol = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("measure: " + what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double DensityPiece::mass() const { return 0.5 * (value_left + value_right) * (right - left); }

double DensityPiece::slope() const {
  return right > left ? (value_right - value_left) / (right - left) : 0.0;
}

double DensityPiece::mass_below(double x) const {
  if (x <= left) return 0.0;
  if (x >= right) return mass();
  const double t = x - left;
  return value_left * t + 0.5 * slope() * t * t;
}

Measure::Measure(Spec spec) : spec_(std::make_shared<const Spec>(std::move(spec))) {}

Measure Measure::atomic(std::vector<Atom> atoms) {
  require(!atoms.empty(), "atomic measure needs at least one atom");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    require(finite(atoms[i].position) && finite(atoms[i].weight), "atom entries must be finite");
    require(atoms[i].weight > 0.0, "atom weights must be positive");
    require(i == 0 || atoms[i - 1].position < atoms[i].position,
            "atom positions must be strictly increasing");
    total += atoms[i].weight;
  }
  require(std::abs(total - 1.0) <= kMassTol, "atom weights must sum to 1 (got " + std::to_string(total) + ")");
  return Measure(AtomicSpec{std::move(atoms)});
}

Measure Measure::point_mass(double position) { return atomic({{position, 1.0}}); }

Measure Measure::density(std::vector<DensityPiece> pieces) {
  require(!pieces.empty(), "density measure needs at least one piece");
  double total = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    require(finite(p.left) && finite(p.right) && finite(p.value_left) && finite(p.value_right),
            "density piece entries must be finite");
    require(p.left < p.right, "density pieces must have positive width");
    require(p.value_left >= 0.0 && p.value_right >= 0.0, "density values must be nonnegative");
    require(i == 0 || pieces[i - 1].right <= p.left, "density pieces must be sorted and disjoint");
    total += p.mass();
  }
  require(std::abs(total - 1.0) <= kMassTol, "density mass must be 1 (got " + std::to_string(total) + ")");
  return Measure(DensitySpec{std::move(pieces)});
}

Measure Measure::uniform(double left, double right) {
  require(finite(left) && finite(right) && left < right, "uniform needs left < right");
  const double v = 1.0 / (right - left);
  return density({{left, right, v, v}});
}

Measure Measure::ifs_cantor(double left, double right, double ratio, int depth) {
  require(finite(left) && finite(right) && left < right, "ifs support needs left < right");
  require(ratio > 0.0 && ratio <= 0.5, "ifs contraction ratio must lie in (0, 1/2]");
  require(depth >= 0 && depth <= 48, "ifs depth must lie in [0, 48]");
  return Measure(IfsCantorSpec{left, right, ratio, depth});
}

Measure Measure::mixture(std::vector<std::pair<double, Measure>> parts) {
  require(!parts.empty(), "mixture needs at least one component");
  MixtureSpec spec;
  double total = 0.0;
  for (auto& [w, m] : parts) {
    require(finite(w) && w > 0.0, "mixture weights must be positive");
    total += w;
    spec.parts.push_back({w, std::make_shared<const Measure>(std::move(m))});
  }
  require(std::abs(total - 1.0) <= kMassTol, "mixture weights must sum to 1 (got " + std::to_string(total) + ")");
  return Measure(std::move(spec));
}

bool Measure::is_atomic_only() const {
  return std::visit(
      [](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          return true;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          for (const auto& p : s.parts)
            if (!p.component->is_atomic_only()) return false;
          return true;
        } else {
          return false;
        }
      },
      spec());
}

// --- cdf family ------------------------------------------------------------

namespace {

// Mass of (-inf, x] for the truncated IFS measure on [A, B].
double ifs_cdf(double A, double B, double mass, int depth, double ratio, double x) {
  if (x < A) return 0.0;
  if (x >= B) return mass;
  if (depth == 0) return mass * (x - A) / (B - A);
  const double w = (B - A) * ratio;
  if (x < A + w) return ifs_cdf(A, A + w, 0.5 * mass, depth - 1, ratio, x);
  if (x < B - w) return 0.5 * mass;
  return 0.5 * mass + ifs_cdf(B - w, B, 0.5 * mass, depth - 1, ratio, x);
}

// Mass of the open interval (lo, hi) for the truncated IFS measure on [A, B].
double ifs_open_mass(double A, double B, double mass, int depth, double ratio, double lo, double hi) {
  if (B <= lo || A >= hi) return 0.0;
  // Cell endpoints carry no mass, so closure containment suffices.
  if (lo <= A && B <= hi) return mass;
  if (depth == 0) {
    const double a = std::max(A, lo), b = std::min(B, hi);
    return b > a ? mass * (b - a) / (B - A) : 0.0;
  }
  const double w = (B - A) * ratio;
  return ifs_open_mass(A, A + w, 0.5 * mass, depth - 1, ratio, lo, hi) +
         ifs_open_mass(B - w, B, 0.5 * mass, depth - 1, ratio, lo, hi);
}

}  // namespace

double Measure::cdf(double x) const {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          double acc = 0.0;
          for (const auto& a : s.atoms) {
            if (a.position > x) break;
            acc += a.weight;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          double acc = 0.0;
          for (const auto& p : s.pieces) {
            if (p.left >= x) break;
            acc += p.mass_below(x);
            if (p.right >= x) break;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          return ifs_cdf(s.left, s.right, 1.0, s.depth, s.ratio, x);
        } else {
          double acc = 0.0;
          for (const auto& p : s.parts) acc += p.weight * p.component->cdf(x);
          return acc;
        }
      },
      spec());
}

double Measure::atom_at(double x) const {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          auto it = std::lower_bound(s.atoms.begin(), s.atoms.end(), x,
                                     [](const Atom& a, double v) { return a.position < v; });
          return (it != s.atoms.end() && it->position == x) ? it->weight : 0.0;
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          double acc = 0.0;
          for (const auto& p : s.parts) acc += p.weight * p.component->atom_at(x);
          return acc;
        } else {
          (void)s;
          return 0.0;
        }
      },
      spec());
}

double Measure::cdf_left(double x) const { return cdf(x) - atom_at(x); }

double Measure::interval_mass(double x, double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("interval_mass: eps must be positive");
  const double lo = x - eps, hi = x + eps;
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          double acc = 0.0;
          for (const auto& a : s.atoms) {
            if (a.position >= hi) break;
            if (a.position > lo) acc += a.weight;
          }
          return acc;
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          double acc = 0.0;
          for (const auto& p : s.pieces) {
            const double a = std::max(p.left, lo), b = std::min(p.right, hi);
            if (b <= a) continue;
            const double va = p.value_left + p.slope() * (a - p.left);
            const double vb = p.value_left + p.slope() * (b - p.left);
            acc += 0.5 * (va + vb) * (b - a);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          return ifs_open_mass(s.left, s.right, 1.0, s.depth, s.ratio, lo, hi);
        } else {
          double acc = 0.0;
          for (const auto& p : s.parts) acc += p.weight * p.component->interval_mass(x, eps);
          return acc;
        }
      },
      spec());
}

// --- sampling ----------------------------------------------------------------

namespace {

double sample_piece(const DensityPiece& p, double u_rem) {
  // Solve value_left * t + slope * t^2 / 2 = u_rem for t in [0, width].
  const double s = p.slope();
  const double width = p.right - p.left;
  double t;
  if (std::abs(s) * width < 1e-14 * std::max(p.value_left, 1e-300)) {
    t = u_rem / p.value_left;
  } else {
    const double disc = p.value_left * p.value_left + 2.0 * s * u_rem;
    t = (std::sqrt(std::max(disc, 0.0)) - p.value_left) / s;
  }
  return p.left + std::clamp(t, 0.0, width);
}

}  // namespace

double Measure::sample(RandomStream& rs) const {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          const double u = rs.next();
          double acc = 0.0;
          for (const auto& a : s.atoms) {
            acc += a.weight;
            if (u < acc) return a.position;
          }
          return s.atoms.back().position;
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          const double u = rs.next();
          double acc = 0.0;
          for (const auto& p : s.pieces) {
            const double m = p.mass();
            if (u < acc + m || &p == &s.pieces.back()) {
              return sample_piece(p, std::clamp(u - acc, 0.0, m));
            }
            acc += m;
          }
          return s.pieces.back().right;
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          double u = rs.next();
          double A = s.left, B = s.right;
          for (int k = 0; k < s.depth; ++k) {
            const double w = (B - A) * s.ratio;
            if (u < 0.5) {
              u *= 2.0;
              B = A + w;
            } else {
              u = 2.0 * u - 1.0;
              A = B - w;
            }
          }
          return A + u * (B - A);
        } else {
          const double u = rs.next();
          double acc = 0.0;
          for (const auto& p : s.parts) {
            acc += p.weight;
            if (u < acc || &p == &s.parts.back()) return p.component->sample(rs);
          }
          return s.parts.back().component->sample(rs);
        }
      },
      spec());
}

// --- image measures ----------------------------------------------------------

Measure Measure::scaled(double c) const {
  if (c == 0.0 || !finite(c)) throw std::domain_error("scale_measure: factor must be finite and nonzero");
  return std::visit(
      [&](const auto& s) -> Measure {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          std::vector<Atom> atoms;
          atoms.reserve(s.atoms.size());
          for (const auto& a : s.atoms) atoms.push_back({a.position / c, a.weight});
          if (c < 0.0) std::reverse(atoms.begin(), atoms.end());
          return Measure::atomic(std::move(atoms));
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          const double ac = std::abs(c);
          std::vector<DensityPiece> pieces;
          pieces.reserve(s.pieces.size());
          for (const auto& p : s.pieces) {
            if (c > 0.0) {
              pieces.push_back({p.left / c, p.right / c, ac * p.value_left, ac * p.value_right});
            } else {
              pieces.push_back({p.right / c, p.left / c, ac * p.value_right, ac * p.value_left});
            }
          }
          if (c < 0.0) std::reverse(pieces.begin(), pieces.end());
          return Measure::density(std::move(pieces));
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          // The construction is mirror symmetric, so a flipped copy is the same
          // measure with swapped endpoints.
          const double a = s.left / c, b = s.right / c;
          return Measure::ifs_cantor(std::min(a, b), std::max(a, b), s.ratio, s.depth);
        } else {
          std::vector<std::pair<double, Measure>> parts;
          parts.reserve(s.parts.size());
          for (const auto& p : s.parts) parts.emplace_back(p.weight, p.component->scaled(c));
          return Measure::mixture(std::move(parts));
        }
      },
      spec());
}

Measure Measure::translated(double c) const {
  if (!finite(c)) throw std::domain_error("translate_measure: offset must be finite");
  return std::visit(
      [&](const auto& s) -> Measure {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          std::vector<Atom> atoms;
          atoms.reserve(s.atoms.size());
          for (const auto& a : s.atoms) atoms.push_back({a.position - c, a.weight});
          return Measure::atomic(std::move(atoms));
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          std::vector<DensityPiece> pieces;
          pieces.reserve(s.pieces.size());
          for (const auto& p : s.pieces)
            pieces.push_back({p.left - c, p.right - c, p.value_left, p.value_right});
          return Measure::density(std::move(pieces));
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          return Measure::ifs_cantor(s.left - c, s.right - c, s.ratio, s.depth);
        } else {
          std::vector<std::pair<double, Measure>> parts;
          parts.reserve(s.parts.size());
          for (const auto& p : s.parts) parts.emplace_back(p.weight, p.component->translated(c));
          return Measure::mixture(std::move(parts));
        }
      },
      spec());
}

std::pair<double, double> Measure::support() const {
  return std::visit(
      [&](const auto& s) -> std::pair<double, double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          return {s.atoms.front().position, s.atoms.back().position};
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          return {s.pieces.front().left, s.pieces.back().right};
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          return {s.left, s.right};
        } else {
          double lo = std::numeric_limits<double>::infinity(), hi = -lo;
          for (const auto& p : s.parts) {
            const auto [a, b] = p.component->support();
            lo = std::min(lo, a);
            hi = std::max(hi, b);
          }
          return {lo, hi};
        }
      },
      spec());
}

// --- modulus of continuity -----------------------------------------------------
//
// s(mu, eps) over open intervals equals the sup over the two half-open window
// families [a, a+eps) and (a, a+eps] (each half-open value is a limit of open
// intervals of length eps, and each open interval embeds in one of them). All
// window masses are evaluated in coordinates relative to an anchor feature so
// that exactly translated measures produce bit-identical results.

namespace {

struct IfsView {
  double left, right, ratio, mass;
  int depth;
};

struct ModulusView {
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;  // values carry the mixture weight
  std::vector<IfsView> ifs;
};

void build_view(const Measure& m, double weight, ModulusView& out) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          for (const auto& a : s.atoms) out.atoms.push_back({a.position, weight * a.weight});
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          for (const auto& p : s.pieces)
            out.pieces.push_back({p.left, p.right, weight * p.value_left, weight * p.value_right});
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          out.ifs.push_back({s.left, s.right, s.ratio, weight, s.depth});
        } else {
          for (const auto& p : s.parts) build_view(*p.component, weight * p.weight, out);
        }
      },
      m.spec());
}

// Mass of [0, t] measured from the left edge of an IFS cell of width W.
double ifs_corner(double W, double mass, int depth, double ratio, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= W) return mass;
  if (depth == 0) return mass * t / W;
  const double w = W * ratio;
  if (t <= w) return ifs_corner(w, 0.5 * mass, depth - 1, ratio, t);
  if (t < W - w) return 0.5 * mass;
  return 0.5 * mass + ifs_corner(w, 0.5 * mass, depth - 1, ratio, t - (W - w));
}

// max over t in [max(0, s-w), min(s, w)] of corner(t) + corner(s - t), where
// corner is the corner-mass function of one child cell (width w). Branch and
// bound on the monotone corner function; the return value is always a true
// window mass, so the overall modulus stays a certified lower bound.
double ifs_span_max(double w, double childmass, int childdepth, double ratio, double s, double prune) {
  if (s <= 0.0) return 0.0;
  if (2.0 * childmass <= prune) return 0.0;
  const auto corner = [&](double t) { return ifs_corner(w, childmass, childdepth, ratio, t); };
  const auto f = [&](double t) { return corner(t) + corner(s - t); };
  // f is symmetric about s/2; search the right half.
  double lo = std::max(0.5 * s, s - w), hi = std::min(s, w);
  if (hi < lo) return 0.0;
  double best = std::max(f(lo), f(hi));
  struct Node {
    double lo, hi, ub;
  };
  std::vector<Node> stack{{lo, hi, corner(hi) + corner(s - lo)}};
  const double tol = std::max(1e-15, childmass * 1e-13);
  int budget = 4000;
  while (!stack.empty() && budget-- > 0) {
    const Node n = stack.back();
    stack.pop_back();
    if (n.ub <= best + tol) continue;
    const double mid = 0.5 * (n.lo + n.hi);
    best = std::max(best, f(mid));
    if (mid <= n.lo || mid >= n.hi) continue;
    stack.push_back({n.lo, mid, corner(mid) + corner(s - n.lo)});
    stack.push_back({mid, n.hi, corner(n.hi) + corner(s - mid)});
  }
  return best;
}

// Exact modulus of a single truncated IFS measure: the optimal window either
// meets one child (congruent subproblem) or spans the central gap, where the
// span value is maximized over the split of the remaining length.
double ifs_modulus(const IfsView& v, double h) {
  double W = v.right - v.left, mass = v.mass;
  int k = v.depth;
  const double ratio = v.ratio;
  double best = 0.0;
  while (true) {
    if (h >= W) return std::max(best, mass);
    if (k == 0) return std::max(best, mass * h / W);
    const double w = W * ratio;
    const double gap = W - 2.0 * w;
    if (h > gap) best = std::max(best, ifs_span_max(w, 0.5 * mass, k - 1, ratio, h - gap, best));
    W = w;
    mass *= 0.5;
    k -= 1;
    if (mass <= best) return best;
  }
}

// Mass of the IFS measure over a window given in coordinates relative to some
// anchor; cell bounds are shifted once at the top so all arithmetic below is
// translation stable.
double ifs_window_rel(double A, double B, double mass, int depth, double ratio, double lo, double hi) {
  if (B <= lo || A >= hi) return 0.0;
  if (lo <= A && B <= hi) return mass;
  if (depth == 0) {
    const double a = std::max(A, lo), b = std::min(B, hi);
    return b > a ? mass * (b - a) / (B - A) : 0.0;
  }
  const double w = (B - A) * ratio;
  return ifs_window_rel(A, A + w, 0.5 * mass, depth - 1, ratio, lo, hi) +
         ifs_window_rel(B - w, B, 0.5 * mass, depth - 1, ratio, lo, hi);
}

// Mass of the window anchor + (lo, hi) with configurable endpoint inclusion.
double window_rel(const ModulusView& mv, double anchor, double lo, double hi, bool incl_lo, bool incl_hi) {
  double acc = 0.0;
  for (const auto& a : mv.atoms) {
    const double t = a.position - anchor;
    const bool in_lo = t > lo || (incl_lo && t == lo);
    const bool in_hi = t < hi || (incl_hi && t == hi);
    if (in_lo && in_hi) acc += a.weight;
  }
  for (const auto& p : mv.pieces) {
    const double tl = p.left - anchor, tr = p.right - anchor;
    const double a = std::max(tl, lo), b = std::min(tr, hi);
    if (b <= a) continue;
    const double s = p.slope();
    const double va = p.value_left + s * (a - tl);
    const double vb = p.value_left + s * (b - tl);
    acc += 0.5 * (va + vb) * (b - a);
  }
  for (const auto& v : mv.ifs)
    acc += ifs_window_rel(v.left - anchor, v.right - anchor, v.mass, v.depth, v.ratio, lo, hi);
  return acc;
}

void collect_ifs_boundaries(double A, double B, int depth, double ratio, double eps, int level,
                            std::vector<double>& out) {
  out.push_back(A);
  out.push_back(B);
  if (depth == 0 || level >= 12 || (B - A) <= 0.125 * eps) return;
  const double w = (B - A) * ratio;
  collect_ifs_boundaries(A, A + w, depth - 1, ratio, eps, level + 1, out);
  collect_ifs_boundaries(B - w, B, depth - 1, ratio, eps, level + 1, out);
}

}  // namespace

double Measure::modulus_of_continuity(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("modulus_of_continuity: eps must be positive");

  ModulusView mv;
  build_view(*this, 1.0, mv);

  // Pure IFS component: closed-form recursion is exact.
  if (mv.atoms.empty() && mv.pieces.empty() && mv.ifs.size() == 1) {
    return ifs_modulus(mv.ifs.front(), eps);
  }

  std::vector<double> features;
  for (const auto& a : mv.atoms) features.push_back(a.position);
  for (const auto& p : mv.pieces) {
    features.push_back(p.left);
    features.push_back(p.right);
  }
  for (const auto& v : mv.ifs) collect_ifs_boundaries(v.left, v.right, v.depth, v.ratio, eps, 0, features);
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  double best = 0.0;
  const auto eval = [&](double anchor, double u) {
    best = std::max(best, window_rel(mv, anchor, u, u + eps, true, false));
    best = std::max(best, window_rel(mv, anchor, u, u + eps, false, true));
  };
  for (const double f : features) {
    eval(f, 0.0);    // windows starting at the feature
    eval(f, -eps);   // windows ending at the feature
  }

  // Interior optima of the continuous part: window ends sliding inside a fixed
  // pair of linear pieces, stationary where the densities at the two ends match.
  const auto& ps = mv.pieces;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double si = ps[i].slope(), sj = ps[j].slope();
      if (si == sj) continue;
      const double dL = ps[j].left - ps[i].left;
      double t_lo = std::max(0.0, dL - eps);
      double t_hi = std::min(ps[i].right - ps[i].left, (ps[j].right - ps[i].left) - eps);
      if (t_hi <= t_lo) continue;
      const double t = (ps[j].value_left + sj * (eps - dL) - ps[i].value_left) / (si - sj);
      if (t > t_lo && t < t_hi) eval(ps[i].left, t);
    }
  }
  return best;
}

// --- flattening -----------------------------------------------------------------

namespace {

void flatten_ifs(const IfsCantorSpec& s, double weight, int max_cells, FlattenedMeasure& out) {
  int level = 0;
  while (level < s.depth && (2 << level) <= max_cells) ++level;  // cells at `level` = 2^level
  const bool exact = level >= s.depth;
  struct Cell {
    double A, B;
    int k;
  };
  std::vector<Cell> cells{{s.left, s.right, 0}};
  std::vector<Cell> next;
  for (int k = 0; k < level; ++k) {
    next.clear();
    for (const auto& c : cells) {
      const double w = (c.B - c.A) * s.ratio;
      next.push_back({c.A, c.A + w, k + 1});
      next.push_back({c.B - w, c.B, k + 1});
    }
    std::swap(cells, next);
  }
  const double cell_mass = weight / static_cast<double>(cells.size());
  for (const auto& c : cells) {
    if (exact) {
      const double v = cell_mass / (c.B - c.A);
      out.pieces.push_back({c.A, c.B, v, v});
    } else {
      out.atoms.push_back({0.5 * (c.A + c.B), cell_mass});
    }
  }
}

void flatten_rec(const Measure& m, double weight, int max_cells, FlattenedMeasure& out) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          for (const auto& a : s.atoms) out.atoms.push_back({a.position, weight * a.weight});
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          for (const auto& p : s.pieces)
            out.pieces.push_back({p.left, p.right, weight * p.value_left, weight * p.value_right});
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          flatten_ifs(s, weight, max_cells, out);
        } else {
          for (const auto& p : s.parts) flatten_rec(*p.component, weight * p.weight, max_cells, out);
        }
      },
      m.spec());
}

}  // namespace

FlattenedMeasure flatten(const Measure& m, int max_ifs_cells) {
  if (max_ifs_cells < 1) throw std::domain_error("flatten: cell budget must be positive");
  FlattenedMeasure out;
  flatten_rec(m, 1.0, max_ifs_cells, out);
  std::sort(out.atoms.begin(), out.atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  std::sort(out.pieces.begin(), out.pieces.end(),
            [](const DensityPiece& a, const DensityPiece& b) { return a.left < b.left; });
  return out;
}

}  // namespace idslab
