#pragma once

// Finite-difference realization of psi -> (nabla d psi)^- - r^- psi on the
// Kodaira-Thurston block and on a flat torus, its exact discrete transpose,
// Hessian formulas by two routes, and plane-wave symbol probes.
//
// Every operator is described by formulas: lists of (coordinate derivative,
// polynomial-in-x coefficient) terms. The same description drives matrix-free
// application and sparse assembly, so the two can never drift apart.

#include "akscal/error.hpp"
#include "akscal/lie_geometry.hpp"
#include "akscal/rational.hpp"
#include "akscal/tensor_core.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace akscal::oplab {

using Field = Eigen::VectorXd;
using Node = std::array<int, 4>;

// ---------------------------------------------------------------------------
// Grid.

enum class Boundary {
  TwistedPeriodic,  // x-wrap shifts z by the y-index: psi(i + wN, j, k) = psi(i, j, k - w j)
  Periodic,
  Patch  // no wrap; operators are evaluated on interior nodes only
};

class Grid {
 public:
  /// Kodaira-Thurston block: unit periods in x, y, z and period d in t.
  static Grid twisted(int n, int nt, double d) {
    if (n < 3 || nt < 3) throw Error("operator-lab", "grid", "need at least 3 points per axis");
    if (!(d > 0.0)) throw Error("operator-lab", "grid", "t-period must be positive");
    return Grid(Boundary::TwistedPeriodic, {n, n, n, nt}, {1.0 / n, 1.0 / n, 1.0 / n, d / nt}, {0, 0, 0, 0});
  }

  static Grid periodic(int n, int nt, double period, double tPeriod) {
    if (n < 3 || nt < 3) throw Error("operator-lab", "grid", "need at least 3 points per axis");
    if (!(period > 0.0) || !(tPeriod > 0.0)) throw Error("operator-lab", "grid", "periods must be positive");
    return Grid(Boundary::Periodic, {n, n, n, nt}, {period / n, period / n, period / n, tPeriod / nt}, {0, 0, 0, 0});
  }

  static Grid patch(Node counts, std::array<double, 4> spacing, std::array<double, 4> origin) {
    for (int a = 0; a < 4; ++a)
      if (counts[a] < 3 || !(spacing[a] > 0.0)) throw Error("operator-lab", "grid", "bad patch dimensions");
    return Grid(Boundary::Patch, counts, spacing, origin);
  }

  Boundary boundary() const { return boundary_; }
  int count(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double coord(int axis, int idx) const { return origin_[axis] + idx * h_[axis]; }
  double period(int axis) const { return n_[axis] * h_[axis]; }
  double cellVolume() const { return h_[0] * h_[1] * h_[2] * h_[3]; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2] * n_[3];
  }

  std::size_t index(const Node& p) const {
    return ((static_cast<std::size_t>(p[0]) * n_[1] + p[1]) * n_[2] + p[2]) * n_[3] + p[3];
  }
  Node node(std::size_t idx) const {
    Node p;
    for (int a = 3; a >= 0; --a) {
      p[a] = static_cast<int>(idx % n_[a]);
      idx /= n_[a];
    }
    return p;
  }

  /// Canonical storage index of a node of the covering grid; nullopt for a
  /// patch node outside the box.
  std::optional<std::size_t> lifted(Node p) const {
    if (boundary_ == Boundary::Patch) {
      for (int a = 0; a < 4; ++a)
        if (p[a] < 0 || p[a] >= n_[a]) return std::nullopt;
      return index(p);
    }
    const int w = floorDiv(p[0], n_[0]);
    p[0] -= w * n_[0];
    if (boundary_ == Boundary::TwistedPeriodic) p[2] -= w * p[1];
    for (int a = 1; a < 4; ++a) p[a] = mod(p[a], n_[a]);
    return index(p);
  }

  /// True when every node within `margin` steps exists (always true when periodic).
  bool interior(const Node& p, int margin = 1) const {
    if (boundary_ != Boundary::Patch) return true;
    for (int a = 0; a < 4; ++a)
      if (p[a] < margin || p[a] >= n_[a] - margin) return false;
    return true;
  }

  /// Samples f(x, y, z, t) at the stored nodes.
  template <class F>
  Field sample(F&& f) const {
    Field out(static_cast<Eigen::Index>(size()));
    for (std::size_t idx = 0; idx < size(); ++idx) {
      const Node p = node(idx);
      out(static_cast<Eigen::Index>(idx)) = f(coord(0, p[0]), coord(1, p[1]), coord(2, p[2]), coord(3, p[3]));
    }
    return out;
  }

 private:
  Grid(Boundary b, Node n, std::array<double, 4> h, std::array<double, 4> origin)
      : boundary_(b), n_(n), h_(h), origin_(origin) {}
  static int floorDiv(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
  static int mod(int a, int b) { return ((a % b) + b) % b; }

  Boundary boundary_;
  Node n_;
  std::array<double, 4> h_;
  std::array<double, 4> origin_;
};

// ---------------------------------------------------------------------------
// Derivative stencils and formulas.

enum class Deriv { Id, X, Y, Z, T, XX, YY, ZZ, TT, XY, XZ, XT, YZ, YT, ZT };

inline constexpr std::array<Deriv, 4> kFirst = {Deriv::X, Deriv::Y, Deriv::Z, Deriv::T};

/// Second derivative along axes a and b.
inline Deriv second(int a, int b) {
  if (a > b) std::swap(a, b);
  static const Deriv table[4][4] = {{Deriv::XX, Deriv::XY, Deriv::XZ, Deriv::XT},
                                    {Deriv::XY, Deriv::YY, Deriv::YZ, Deriv::YT},
                                    {Deriv::XZ, Deriv::YZ, Deriv::ZZ, Deriv::ZT},
                                    {Deriv::XT, Deriv::YT, Deriv::ZT, Deriv::TT}};
  return table[a][b];
}

/// Axes differentiated by d: {} for Id, {a} or {a, b}.
inline std::vector<int> axes(Deriv d) {
  switch (d) {
    case Deriv::Id: return {};
    case Deriv::X: return {0};
    case Deriv::Y: return {1};
    case Deriv::Z: return {2};
    case Deriv::T: return {3};
    case Deriv::XX: return {0, 0};
    case Deriv::YY: return {1, 1};
    case Deriv::ZZ: return {2, 2};
    case Deriv::TT: return {3, 3};
    case Deriv::XY: return {0, 1};
    case Deriv::XZ: return {0, 2};
    case Deriv::XT: return {0, 3};
    case Deriv::YZ: return {1, 2};
    case Deriv::YT: return {1, 3};
    case Deriv::ZT: return {2, 3};
  }
  return {};
}

struct Tap {
  Node off;
  double w;
};

/// Second-order centred stencils: 3-point first and pure second differences,
/// 4-point cross for mixed second differences.
inline std::vector<Tap> stencil(Deriv d, const Grid& g) {
  const auto ax = axes(d);
  auto unit = [](int a, int s) {
    Node o{0, 0, 0, 0};
    o[a] = s;
    return o;
  };
  if (ax.empty()) return {{{0, 0, 0, 0}, 1.0}};
  if (ax.size() == 1) {
    const double c = 1.0 / (2.0 * g.spacing(ax[0]));
    return {{unit(ax[0], 1), c}, {unit(ax[0], -1), -c}};
  }
  if (ax[0] == ax[1]) {
    const double c = 1.0 / (g.spacing(ax[0]) * g.spacing(ax[0]));
    return {{unit(ax[0], 1), c}, {{0, 0, 0, 0}, -2.0 * c}, {unit(ax[0], -1), c}};
  }
  const double c = 1.0 / (4.0 * g.spacing(ax[0]) * g.spacing(ax[1]));
  std::vector<Tap> out;
  for (int s : {1, -1})
    for (int t : {1, -1}) {
      Node o{0, 0, 0, 0};
      o[ax[0]] = s;
      o[ax[1]] = t;
      out.push_back({o, s * t * c});
    }
  return out;
}

/// c0 + c1 x + c2 x^2.
struct Poly {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double operator()(double x) const { return c0 + x * (c1 + x * c2); }
  Poly operator*(double s) const { return {s * c0, s * c1, s * c2}; }
  Poly operator+(const Poly& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
  bool isZero() const { return c0 == 0.0 && c1 == 0.0 && c2 == 0.0; }
  bool operator==(const Poly&) const = default;
};

inline Poly constant(double c) { return {c, 0.0, 0.0}; }
inline Poly linearX(double c) { return {0.0, c, 0.0}; }

struct Term {
  Deriv d;
  Poly c;
  bool operator==(const Term&) const = default;
};
using Formula = std::vector<Term>;

inline Formula scaled(const Formula& f, double s) {
  Formula out;
  for (const auto& t : f) out.push_back({t.d, t.c * s});
  return out;
}

inline Formula operator+(Formula a, const Formula& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Like terms merged, zero terms dropped, sorted by derivative.
inline Formula simplify(const Formula& f) {
  std::map<Deriv, Poly> acc;
  for (const auto& t : f) acc[t.d] = acc[t.d] + t.c;
  Formula out;
  for (const auto& [d, c] : acc)
    if (!c.isZero()) out.push_back({d, c});
  return out;
}

// ---------------------------------------------------------------------------
// Variants: geometry data driving the formulas.

struct Variant {
  std::string name;
  Grid grid;
  std::array<Formula, 4> frame;                 // e_i as coordinate derivatives
  std::array<std::array<Formula, 4>, 4> hessian;  // closed-form (nabla d psi)(e_i, e_j)
  Eigen::Matrix4d j;
  Eigen::Matrix4d rMinus;
  lie::FrameTensor<double, 3> gamma{4};
  std::array<std::pair<int, int>, 6> layout;  // anti-invariant component (a, b) per slot
  std::array<double, 6> weights;              // ordered entries represented by each slot
  std::array<double, 6> equationScale;        // kernel-system equation = scale * component
  std::array<Formula, 6> adjoint;             // slot formula of (nabla d psi)^- - r^- psi
};

namespace detail {

/// J e_i = sign[i] e_{perm[i]}; J must be a signed permutation.
inline std::pair<std::array<int, 4>, std::array<double, 4>> signedPermutation(const Eigen::Matrix4d& j) {
  std::array<int, 4> perm{};
  std::array<double, 4> sign{};
  for (int i = 0; i < 4; ++i) {
    int found = -1;
    for (int r = 0; r < 4; ++r)
      if (j(r, i) != 0.0) {
        if (found >= 0 || std::abs(j(r, i)) != 1.0)
          throw Error("operator-lab", "acs", "J must be a signed permutation in the frame");
        found = r;
      }
    if (found < 0) throw Error("operator-lab", "acs", "J has a zero column");
    perm[i] = found;
    sign[i] = j(found, i);
  }
  return {perm, sign};
}

inline std::pair<int, int> ordered(int a, int b) { return a <= b ? std::make_pair(a, b) : std::make_pair(b, a); }

}  // namespace detail

/// Default slot order: diagonal orbits first, then the remaining orbit
/// representatives in lexicographic order.
inline std::array<std::pair<int, int>, 6> antiInvariantLayout(const Eigen::Matrix4d& j) {
  const auto [perm, sign] = detail::signedPermutation(j);
  std::vector<std::pair<int, int>> diag, off;
  std::vector<std::pair<int, int>> seen;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      const auto p = std::make_pair(a, b);
      if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
      const auto img = detail::ordered(perm[a], perm[b]);
      seen.push_back(p);
      seen.push_back(img);
      (a == b ? diag : off).push_back(p);
    }
  std::array<std::pair<int, int>, 6> out;
  std::size_t s = 0;
  for (const auto& p : diag) out.at(s++) = p;
  for (const auto& p : off) out.at(s++) = p;
  if (s != 6) throw Error("operator-lab", "layout", "J-orbit count differs from 6");
  return out;
}

/// Completes a variant from frame, Hessian, J, r^- and the slot layout.
inline void finalize(Variant& v) {
  const auto [perm, sign] = detail::signedPermutation(v.j);
  std::vector<std::pair<int, int>> covered;
  for (int s = 0; s < 6; ++s) {
    const auto [a, b] = v.layout[s];
    const auto img = detail::ordered(perm[a], perm[b]);
    const bool self = img == std::make_pair(a, b);
    if (std::find(covered.begin(), covered.end(), v.layout[s]) != covered.end())
      throw Error("operator-lab", "layout", "two slots share a J-orbit");
    covered.push_back(v.layout[s]);
    covered.push_back(img);
    v.weights[s] = self ? 2.0 : (a == b ? 2.0 : 4.0);
    v.equationScale[s] = self ? 1.0 : 2.0;
    // (nabla d psi)^-_{ab} = 1/2 (H_ab - s_a s_b H_{pi a, pi b})
    v.adjoint[s] = simplify(scaled(v.hessian[a][b], 0.5) +
                            scaled(v.hessian[perm[a]][perm[b]], -0.5 * sign[a] * sign[b]) +
                            Formula{{Deriv::Id, constant(-v.rMinus(a, b))}});
  }
}

/// Kodaira-Thurston block. Connection, J and r^- come from the exact curvature
/// engine; the Hessian table is the closed form for e1 = d/dx,
/// e2 = d/dy + x d/dz, e3 = d/dz, e4 = d/dt.
inline Variant ktVariant(const Grid& grid) {
  if (grid.boundary() == Boundary::Periodic)
    throw Error("operator-lab", "grid", "the Kodaira-Thurston variant needs a twisted or patch grid");
  const auto spec = lie::catalog::kodairaThurston<Rational>();
  const auto cd = lie::curvature(spec);
  Variant v{"kt", grid, {}, {}, {}, {}, lie::FrameTensor<double, 3>(4), {}, {}, {}, {}};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      v.j(a, b) = toDouble(spec.j(a, b));
      v.rMinus(a, b) = toDouble(cd.ricciAnti(a, b));
      for (int c = 0; c < 4; ++c) v.gamma(a, b, c) = toDouble(cd.gamma(a, b, c));
    }
  v.frame = {Formula{{Deriv::X, constant(1)}}, Formula{{Deriv::Y, constant(1)}, {Deriv::Z, linearX(1)}},
             Formula{{Deriv::Z, constant(1)}}, Formula{{Deriv::T, constant(1)}}};
  auto& h = v.hessian;
  h[0][0] = {{Deriv::XX, constant(1)}};
  h[1][1] = {{Deriv::YY, constant(1)}, {Deriv::YZ, linearX(2)}, {Deriv::ZZ, {0, 0, 1}}};
  h[2][2] = {{Deriv::ZZ, constant(1)}};
  h[3][3] = {{Deriv::TT, constant(1)}};
  h[0][1] = {{Deriv::XY, constant(1)}, {Deriv::XZ, linearX(1)}, {Deriv::Z, constant(0.5)}};
  h[0][2] = {{Deriv::XZ, constant(1)}, {Deriv::Y, constant(0.5)}, {Deriv::Z, linearX(0.5)}};
  h[0][3] = {{Deriv::XT, constant(1)}};
  h[1][2] = {{Deriv::YZ, constant(1)}, {Deriv::ZZ, linearX(1)}, {Deriv::X, constant(-0.5)}};
  h[1][3] = {{Deriv::YT, constant(1)}, {Deriv::ZT, linearX(1)}};
  h[2][3] = {{Deriv::ZT, constant(1)}};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < a; ++b) h[a][b] = h[b][a];
  v.layout = {{{0, 0}, {1, 1}, {0, 1}, {0, 2}, {1, 2}, {0, 3}}};
  finalize(v);
  return v;
}

/// Flat metric in coordinates: Hessian = coordinate second derivatives, r^- = 0.
inline Variant flatVariant(const Grid& grid, const Eigen::Matrix4d& j) {
  if (grid.boundary() == Boundary::TwistedPeriodic)
    throw Error("operator-lab", "grid", "the flat variant needs a periodic or patch grid");
  Variant v{"flat", grid, {}, {}, j, Eigen::Matrix4d::Zero(), lie::FrameTensor<double, 3>(4), {}, {}, {}, {}};
  for (int a = 0; a < 4; ++a) {
    v.frame[a] = {{kFirst[a], constant(1)}};
    for (int b = 0; b < 4; ++b) v.hessian[a][b] = {{second(a, b), constant(1)}};
  }
  v.layout = antiInvariantLayout(j);
  finalize(v);
  return v;
}

inline Eigen::Matrix4d standardJ() { return tensor::AcsMatrix::standard(4).matrix(); }

/// Flat torus of period 2 pi in every direction with the standard J.
inline Variant flatTorus(int n, int nt) {
  return flatVariant(Grid::periodic(n, nt, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi), standardJ());
}

// ---------------------------------------------------------------------------
// Application.

/// A formula compiled to merged taps per x-index (coefficients depend on x only).
class CompiledFormula {
 public:
  CompiledFormula(const Formula& f, const Grid& g) : grid_(&g), taps_(static_cast<std::size_t>(g.count(0))) {
    for (int i = 0; i < g.count(0); ++i) {
      const double x = g.coord(0, i);
      std::map<Node, double> merged;
      for (const auto& t : f) {
        const double c = t.c(x);
        if (c == 0.0) continue;
        for (const auto& tap : stencil(t.d, g)) merged[tap.off] += c * tap.w;
      }
      for (const auto& [off, w] : merged)
        if (w != 0.0) taps_[i].push_back({off, w});
    }
  }

  /// Value at node p; NaN on patch nodes whose stencil leaves the box.
  double at(const Field& psi, const Node& p) const {
    double s = 0.0;
    for (const auto& t : taps_[p[0]]) {
      const auto idx = grid_->lifted({p[0] + t.off[0], p[1] + t.off[1], p[2] + t.off[2], p[3] + t.off[3]});
      if (!idx) return std::numeric_limits<double>::quiet_NaN();
      s += t.w * psi(static_cast<Eigen::Index>(*idx));
    }
    return s;
  }

  Field apply(const Field& psi) const {
    Field out(psi.size());
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) out(static_cast<Eigen::Index>(idx)) = at(psi, grid_->node(idx));
    return out;
  }

  /// out += scale * (transpose applied to h), restricted to rows where the
  /// stencil fits.
  void scatterTranspose(const Field& h, double scale, Field& out) const {
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) {
      const Node p = grid_->node(idx);
      if (!grid_->interior(p)) continue;
      const double v = scale * h(static_cast<Eigen::Index>(idx));
      if (v == 0.0) continue;
      for (const auto& t : taps_[p[0]]) {
        const auto j = grid_->lifted({p[0] + t.off[0], p[1] + t.off[1], p[2] + t.off[2], p[3] + t.off[3]});
        out(static_cast<Eigen::Index>(*j)) += t.w * v;
      }
    }
  }

  void triplets(Eigen::Index rowOffset, std::vector<Eigen::Triplet<double>>& out) const {
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) {
      const Node p = grid_->node(idx);
      if (!grid_->interior(p)) continue;
      for (const auto& t : taps_[p[0]]) {
        const auto j = grid_->lifted({p[0] + t.off[0], p[1] + t.off[1], p[2] + t.off[2], p[3] + t.off[3]});
        out.emplace_back(rowOffset + static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(*j), t.w);
      }
    }
  }

 private:
  const Grid* grid_;
  std::vector<std::vector<Tap>> taps_;
};

inline Field applyFormula(const Variant& v, const Formula& f, const Field& psi) {
  if (static_cast<std::size_t>(psi.size()) != v.grid.size()) throw Error("operator-lab", "dimension", "field size does not match grid");
  return CompiledFormula(f, v.grid).apply(psi);
}

/// e_1 psi .. e_4 psi with centred stencils and the node's x coefficient.
inline std::array<Field, 4> frameDerivatives(const Variant& v, const Field& psi) {
  std::array<Field, 4> out;
  for (int a = 0; a < 4; ++a) out[a] = applyFormula(v, v.frame[a], psi);
  return out;
}

/// Symmetric 4x4 field, upper triangle stored.
struct HessianField {
  std::array<Field, 10> entries;
  static int slot(int a, int b) {
    if (a > b) std::swap(a, b);
    return a * 4 - a * (a - 1) / 2 + (b - a);
  }
  Field& operator()(int a, int b) { return entries[slot(a, b)]; }
  const Field& operator()(int a, int b) const { return entries[slot(a, b)]; }
};

/// Closed-form Hessian with compact stencils.
inline HessianField ktHessian(const Variant& v, const Field& psi) {
  HessianField out;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) out(a, b) = applyFormula(v, v.hessian[a][b], psi);
  return out;
}

/// e_i(e_j psi) - (nabla_{e_i} e_j) psi from composed frame derivatives.
/// The inner derivative is taken on the covering space: at each neighbour of
/// the outer stencil the frame coefficients use the neighbour's unwrapped x,
/// so no seam is introduced where the x-lift resets the coordinate.
inline HessianField definitionalHessian(const Variant& v, const Field& psi) {
  const Grid& g = v.grid;
  if (static_cast<std::size_t>(psi.size()) != g.size()) throw Error("operator-lab", "dimension", "field size does not match grid");
  // Frame taps by unwrapped x index.
  std::map<std::pair<int, int>, std::vector<Tap>> cache;
  auto taps = [&](int a, int i) -> const std::vector<Tap>& {
    auto [it, fresh] = cache.try_emplace({a, i});
    if (fresh) {
      const double x = g.coord(0, i);
      for (const auto& t : v.frame[a]) {
        const double c = t.c(x);
        if (c == 0.0) continue;
        for (const auto& tap : stencil(t.d, g)) it->second.push_back({tap.off, c * tap.w});
      }
    }
    return it->second;
  };
  const auto first = frameDerivatives(v, psi);
  HessianField out;
  for (auto& e : out.entries) e.resize(psi.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Node p = g.node(idx);
    const auto row = static_cast<Eigen::Index>(idx);
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double s = 0.0;
        for (const auto& ta : taps(a, p[0])) {
          const Node q{p[0] + ta.off[0], p[1] + ta.off[1], p[2] + ta.off[2], p[3] + ta.off[3]};
          for (const auto& tb : taps(b, q[0])) {
            const auto j = g.lifted({q[0] + tb.off[0], q[1] + tb.off[1], q[2] + tb.off[2], q[3] + tb.off[3]});
            if (!j) {
              s = std::numeric_limits<double>::quiet_NaN();
              break;
            }
            s += ta.w * tb.w * psi(static_cast<Eigen::Index>(*j));
          }
        }
        for (int k = 0; k < 4; ++k)
          if (v.gamma(a, b, k) != 0.0) s -= v.gamma(a, b, k) * first[k](row);
        out(a, b)(row) = s;
      }
  }
  return out;
}

using AntiInvariantField = std::array<Field, 6>;

inline AntiInvariantField adjointDS(const Variant& v, const Field& psi) {
  AntiInvariantField out;
  for (int s = 0; s < 6; ++s) out[s] = applyFormula(v, v.adjoint[s], psi);
  return out;
}

/// Exact discrete transpose of adjointDS with respect to the weighted pairing
/// (a discrete double divergence minus <r, h>).
inline Field forwardDS(const Variant& v, const AntiInvariantField& h) {
  Field out = Field::Zero(static_cast<Eigen::Index>(v.grid.size()));
  for (int s = 0; s < 6; ++s) {
    if (static_cast<std::size_t>(h[s].size()) != v.grid.size())
      throw Error("operator-lab", "dimension", "tensor field size does not match grid");
    CompiledFormula(v.adjoint[s], v.grid).scatterTranspose(h[s], v.weights[s], out);
  }
  return out;
}

/// Discrete L2 pairing over nodes where both fields are defined (patch
/// operators leave NaN where the stencil does not fit).
inline double pairing(const Grid& g, const Field& a, const Field& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::isfinite(a(i)) && std::isfinite(b(i))) s += a(i) * b(i);
  return s * g.cellVolume();
}

/// Weighted pairing sum_{ij} h_ij k_ij of anti-invariant fields.
inline double pairing(const Variant& v, const AntiInvariantField& a, const AntiInvariantField& b) {
  double s = 0.0;
  for (int c = 0; c < 6; ++c) s += v.weights[c] * pairing(v.grid, a[c], b[c]);
  return s;
}

/// Per-equation discrete L2 norms of the kernel system, equation = scale * component.
struct KernelResidual {
  std::array<double, 6> norms;
  AntiInvariantField equations;
};

inline KernelResidual kernelSystemResidual(const Variant& v, const Field& psi) {
  KernelResidual r;
  const auto comp = adjointDS(v, psi);
  for (int s = 0; s < 6; ++s) {
    r.equations[s] = v.equationScale[s] * comp[s];
    r.norms[s] = std::sqrt(pairing(v.grid, r.equations[s], r.equations[s]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Assembly.

/// A: 6n x n sparse matrix of adjointDS (rows slot-major), interior rows only.
inline Eigen::SparseMatrix<double> assembleAdjoint(const Variant& v) {
  const auto n = static_cast<Eigen::Index>(v.grid.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int s = 0; s < 6; ++s) CompiledFormula(v.adjoint[s], v.grid).triplets(s * n, trip);
  Eigen::SparseMatrix<double> a(6 * n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// M = A^T W A with the pairing weights; symmetric positive semidefinite.
inline Eigen::SparseMatrix<double> normalOperator(const Variant& v) {
  const auto n = static_cast<Eigen::Index>(v.grid.size());
  const Eigen::SparseMatrix<double> a = assembleAdjoint(v);
  Eigen::VectorXd w(6 * n);
  for (int s = 0; s < 6; ++s) w.segment(s * n, n).setConstant(v.weights[s]);
  Eigen::SparseMatrix<double> m = a.transpose() * w.asDiagonal() * a;
  m = 0.5 * (m + Eigen::SparseMatrix<double>(m.transpose()));
  return m;
}

// ---------------------------------------------------------------------------
// Plane-wave symbol probe.

/// cos(xi . (x, y, z, t)) sampled on the grid; xi must be a period-compatible
/// wavevector, and z-independent on the twisted grid.
inline Field planeWave(const Grid& g, const Eigen::Vector4d& xi) {
  if (xi.norm() == 0.0) throw Error("operator-lab", "symbol", "wavevector must be nonzero");
  if (g.boundary() == Boundary::Patch) throw Error("operator-lab", "symbol", "plane waves need a periodic grid");
  if (g.boundary() == Boundary::TwistedPeriodic && xi(2) != 0.0)
    throw Error("operator-lab", "symbol", "plane waves on the twisted grid must be z-independent");
  for (int a = 0; a < 4; ++a) {
    const double cycles = xi(a) * g.period(a) / (2.0 * std::numbers::pi);
    if (std::abs(cycles - std::round(cycles)) > 1e-9)
      throw Error("operator-lab", "symbol", "wavevector is not compatible with the periods");
  }
  return g.sample([&](double x, double y, double z, double t) { return std::cos(xi(0) * x + xi(1) * y + xi(2) * z + xi(3) * t); });
}

/// <(forwardDS o adjointDS) psi_xi, psi_xi> / (|xi|^4 / 2 ||psi_xi||^2).
inline double symbolCheck(const Variant& v, const Eigen::Vector4d& xi) {
  const Field psi = planeWave(v.grid, xi);
  const Field m = forwardDS(v, adjointDS(v, psi));
  const double k2 = xi.squaredNorm();
  return pairing(v.grid, m, psi) / (0.5 * k2 * k2 * pairing(v.grid, psi, psi));
}

struct FlatSweep {
  double maxDeviation = 0.0;
  Eigen::Vector4d worst = Eigen::Vector4d::Zero();
  double bound = 0.0;  // 5 h^2
  int waves = 0;
};

/// All integer wavevectors with 0 < max |xi_a| <= N/4 on the 2 pi flat torus.
inline FlatSweep flatSymbolSweep(int n) {
  const Variant v = flatTorus(n, n);
  FlatSweep out;
  const double h = v.grid.spacing(0);
  out.bound = 5.0 * h * h;
  const int kmax = n / 4;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = -kmax; b <= kmax; ++b)
      for (int c = -kmax; c <= kmax; ++c)
        for (int d = 0; d <= kmax; ++d) {
          const Eigen::Vector4d xi(a, b, c, d);
          if (xi.norm() == 0.0) continue;
          const double dev = std::abs(symbolCheck(v, xi) - 1.0);
          ++out.waves;
          if (dev > out.maxDeviation) {
            out.maxDeviation = dev;
            out.worst = xi;
          }
        }
  return out;
}

struct KtSweep {
  std::vector<double> xiNorm;
  std::vector<double> ratio;      // Kodaira-Thurston symbol ratio
  std::vector<double> flatRatio;  // same grid, same J, no lower-order terms
  std::vector<double> relative;   // ratio / flatRatio - 1
  double slope = 0.0;             // least-squares slope of log|relative| against log|xi|
  double constant = 0.0;          // max |relative| * |xi| over the sweep
};

/// xi = 2 pi m (1, 1, 0, 0) for m = 1..N/8 (at most a quarter of Nyquist).
/// Lower-order effects are isolated by dividing by the flat discrete symbol
/// with the same J on the same grid. The waves are t-independent, so a thin
/// t-axis suffices.
inline KtSweep ktSymbolSweep(int n, double d = 1.0, int nt = 4) {
  const Grid tw = Grid::twisted(n, nt, d);
  const Variant kt = ktVariant(tw);
  const Variant flat = flatVariant(Grid::periodic(n, nt, 1.0, d), kt.j);
  KtSweep out;
  const int mmax = n / 8;
  if (mmax < 3) throw Error("operator-lab", "symbol", "sweep needs N >= 24");
  for (int m = 1; m <= mmax; ++m) {
    const Eigen::Vector4d xi = 2.0 * std::numbers::pi * m * Eigen::Vector4d(1.0, 1.0, 0.0, 0.0);
    const double r = symbolCheck(kt, xi);
    const double f = symbolCheck(flat, xi);
    out.xiNorm.push_back(xi.norm());
    out.ratio.push_back(r);
    out.flatRatio.push_back(f);
    out.relative.push_back(r / f - 1.0);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(out.xiNorm.size());
  for (std::size_t i = 0; i < out.xiNorm.size(); ++i) {
    const double lx = std::log(out.xiNorm[i]), ly = std::log(std::abs(out.relative[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    out.constant = std::max(out.constant, std::abs(out.relative[i]) * out.xiNorm[i]);
  }
  out.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return out;
}

}  // namespace akscal::oplab
