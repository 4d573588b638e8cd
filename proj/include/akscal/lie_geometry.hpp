#pragma once

// Curvature of left-invariant almost-Kaehler metrics described on an
// orthonormal frame e_1..e_2n by structure constants [e_i, e_j] = c_ij^k e_k.
// Everything is templated on the scalar so rational input is handled exactly.

#include "akscal/error.hpp"
#include "akscal/rational.hpp"
#include "akscal/tensor_core.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace akscal::lie {

/// Dense cube-shaped tensor of fixed rank over a frame of dimension dim.
template <class S, int Rank>
class FrameTensor {
 public:
  FrameTensor() = default;
  explicit FrameTensor(int dim) : dim_(dim), data_(static_cast<std::size_t>(std::pow(dim, Rank)), S(0)) {}

  template <class... I>
  S& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  const S& operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data_[offset({static_cast<int>(idx)...})];
  }
  int dim() const { return dim_; }
  const std::vector<S>& data() const { return data_; }
  bool operator==(const FrameTensor&) const = default;

 private:
  std::size_t offset(std::array<int, Rank> idx) const {
    std::size_t o = 0;
    for (int a : idx) o = o * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(a);
    return o;
  }
  int dim_ = 0;
  std::vector<S> data_;
};

template <class S>
struct LieFrameSpec {
  std::string name;
  int dim = 0;
  FrameTensor<S, 3> c;  // c(i,j,k): coefficient of e_k in [e_i, e_j]
  Mat<S> j;
  std::vector<double> latticeVolumes;

  LieFrameSpec() = default;
  LieFrameSpec(std::string n, int d) : name(std::move(n)), dim(d), c(d), j(Mat<S>::Zero(d, d)) {}

  /// Sets [e_a, e_b] += v e_k and the antisymmetric partner (0-based).
  void addBracket(int a, int b, int k, S v) {
    c(a, b, k) += v;
    c(b, a, k) -= v;
  }

  S omega(int a, int b) const { return j(b, a); }  // omega(e_a, e_b) = g(J e_a, e_b)
};

/// Throws on any violated invariant: antisymmetry, Jacobi, J^2 = -I,
/// orthogonality of J, closedness of omega.
template <class S>
void validate(const LieFrameSpec<S>& spec) {
  const int d = spec.dim;
  if (d < 2 || d % 2 != 0) throw Error("lie-geometry", "dimension", "frame dimension must be even and >= 2");
  if (spec.j.rows() != d || spec.j.cols() != d) throw Error("lie-geometry", "dimension", "J has wrong size");
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj)
      for (int k = 0; k < d; ++k)
        if (spec.c(i, jj, k) != -spec.c(jj, i, k))
          throw Error("lie-geometry", "antisymmetry", "structure constants not antisymmetric");
  for (int i = 0; i < d; ++i)
    for (int jj = i + 1; jj < d; ++jj)
      for (int k = jj + 1; k < d; ++k)
        for (int m = 0; m < d; ++m) {
          S v(0);
          for (int l = 0; l < d; ++l)
            v += spec.c(i, jj, l) * spec.c(l, k, m) + spec.c(jj, k, l) * spec.c(l, i, m) +
                 spec.c(k, i, l) * spec.c(l, jj, m);
          if (std::abs(toDouble(v)) > (is_exact_v<S> ? 0.0 : 1e-12))
            throw Error("lie-geometry", "jacobi", "Jacobi identity fails");
        }
  const Mat<S> id = Mat<S>::Identity(d, d);
  if (!tensor::nearlyZero<S>(spec.j * spec.j + id, 1e-12)) throw Error("lie-geometry", "acs", "J^2 != -I");
  if (!tensor::nearlyZero<S>(spec.j.transpose() * spec.j - id, 1e-12))
    throw Error("lie-geometry", "acs", "J is not orthogonal");
  for (int i = 0; i < d; ++i)
    for (int jj = i + 1; jj < d; ++jj)
      for (int k = jj + 1; k < d; ++k) {
        S v(0);
        for (int l = 0; l < d; ++l)
          v += -spec.c(i, jj, l) * spec.omega(l, k) + spec.c(i, k, l) * spec.omega(l, jj) -
               spec.c(jj, k, l) * spec.omega(l, i);
        if (std::abs(toDouble(v)) > (is_exact_v<S> ? 0.0 : 1e-12))
          throw Error("lie-geometry", "closedness", "omega is not closed");
      }
  for (double v : spec.latticeVolumes)
    if (!(v > 0.0)) throw Error("lie-geometry", "volume", "lattice volumes must be positive");
}

/// gamma(i,j,k) = <nabla_{e_i} e_j, e_k> from the Koszul formula; the
/// metric-derivative terms vanish for left-invariant orthonormal frames.
template <class S>
FrameTensor<S, 3> leviCivita(const LieFrameSpec<S>& spec) {
  const int d = spec.dim;
  FrameTensor<S, 3> g(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) g(i, j, k) = (spec.c(i, j, k) - spec.c(j, k, i) + spec.c(k, i, j)) / S(2);
  return g;
}

template <class S>
struct CurvatureData {
  FrameTensor<S, 3> gamma;
  /// connectionForms(i,j,k) = omega_ij(e_k) = <nabla_{e_k} e_j, e_i>, i.e. nabla e_j = sum_i e_i omega_ij.
  FrameTensor<S, 3> connectionForms;
  /// curvatureForms(i,j,a,b) = Omega_ij(e_a, e_b) from Omega = d omega + omega ^ omega.
  FrameTensor<S, 4> curvatureForms;
  /// riemann(a,b,c,e) = <R(e_a,e_b) e_c, e_e> from the second-covariant-derivative definition.
  FrameTensor<S, 4> riemann;
  Mat<S> sectional;
  Mat<S> ricci;
  Mat<S> ricciAnti;
  S scalar{0};
  /// nablaJ(i,j,k) = <(nabla_{e_i} J) e_j, e_k>.
  FrameTensor<S, 3> nablaJ;
  S normNablaJSq{0};      // from nablaJ (vector route)
  S normNablaOmegaSq{0};  // from nabla omega (form route); equals |nabla J|^2
  S starScalar{0};        // sum_{i,j} <R(e_i,e_j) J e_j, J e_i>
  S hermitianScalar{0};   // (s + s*) / 2
};

namespace detail {

template <class S>
FrameTensor<S, 4> riemannDirect(const LieFrameSpec<S>& spec, const FrameTensor<S, 3>& g) {
  const int d = spec.dim;
  FrameTensor<S, 4> r(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          S v(0);
          for (int l = 0; l < d; ++l) v += g(b, c, l) * g(a, l, e) - g(a, c, l) * g(b, l, e) - spec.c(a, b, l) * g(l, c, e);
          r(a, b, c, e) = v;
        }
  return r;
}

template <class S>
FrameTensor<S, 4> curvatureCartan(const LieFrameSpec<S>& spec, const FrameTensor<S, 3>& w) {
  const int d = spec.dim;
  FrameTensor<S, 4> omega(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          // d alpha(e_a, e_b) = -alpha([e_a, e_b]) for constant-coefficient forms.
          S v(0);
          for (int k = 0; k < d; ++k) v -= spec.c(a, b, k) * w(i, j, k);
          for (int k = 0; k < d; ++k) v += w(i, k, a) * w(k, j, b) - w(i, k, b) * w(k, j, a);
          omega(i, j, a, b) = v;
        }
  return omega;
}

}  // namespace detail

/// Full curvature computation. The Cartan-structure-equation route and the
/// direct route must agree (exactly for Rational, within 1e-12 otherwise).
template <class S>
CurvatureData<S> curvature(const LieFrameSpec<S>& spec) {
  validate(spec);
  const int d = spec.dim;
  const double tol = is_exact_v<S> ? 0.0 : 1e-12;
  CurvatureData<S> out;
  out.gamma = leviCivita(spec);
  const auto& g = out.gamma;

  out.connectionForms = FrameTensor<S, 3>(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) out.connectionForms(i, j, k) = g(k, j, i);

  out.riemann = detail::riemannDirect(spec, g);
  out.curvatureForms = detail::curvatureCartan(spec, out.connectionForms);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          if (std::abs(toDouble(out.curvatureForms(i, j, a, b) - out.riemann(a, b, j, i))) > tol)
            throw Error("lie-geometry", "cartan-vs-direct", "curvature routes disagree");

  out.sectional = Mat<S>::Zero(d, d);
  out.ricci = Mat<S>::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i != j) out.sectional(i, j) = out.riemann(i, j, j, i);
      S v(0);
      for (int k = 0; k < d; ++k) v += out.riemann(k, i, j, k);
      out.ricci(i, j) = v;
    }
  for (int i = 0; i < d; ++i) out.scalar += out.ricci(i, i);
  out.ricciAnti = tensor::antiInvariantPart<S>(out.ricci, spec.j);

  const Mat<S>& jm = spec.j;
  out.nablaJ = FrameTensor<S, 3>(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        // nabla_{e_i}(J e_j) - J nabla_{e_i} e_j
        S v(0);
        for (int m = 0; m < d; ++m) v += jm(m, j) * g(i, m, k) - jm(k, m) * g(i, j, m);
        out.nablaJ(i, j, k) = v;
        out.normNablaJSq += v * v;
      }

  // (nabla_{e_i} omega)(e_a, e_b) = -omega(nabla_{e_i} e_a, e_b) - omega(e_a, nabla_{e_i} e_b)
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        S v(0);
        for (int m = 0; m < d; ++m) v -= g(i, a, m) * spec.omega(m, b) + g(i, b, m) * spec.omega(a, m);
        out.normNablaOmegaSq += v * v;
      }

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          const S w = jm(c, j) * jm(e, i);
          if (w != S(0)) out.starScalar += w * out.riemann(i, j, c, e);
        }
  out.hermitianScalar = (out.scalar + out.starScalar) / S(2);
  return out;
}

/// Both sides of s* - s = |nabla J|^2 / 2, each |nabla J|^2 from its own route.
template <class S>
struct StarScalarIdentity {
  S lhs;           // s* - s
  S halfVector;    // |nabla J|^2 / 2, vector route
  S halfForm;      // |nabla omega|^2 / 2, form route
  bool holds(double tol = 0.0) const {
    auto close = [tol](const S& a, const S& b) {
      if constexpr (is_exact_v<S>) return a == b;
      else return std::abs(a - b) <= tol;
    };
    return close(lhs, halfVector) && close(halfVector, halfForm) && toDouble(lhs) >= -tol;
  }
};

template <class S>
StarScalarIdentity<S> starScalarIdentity(const CurvatureData<S>& data) {
  return {data.starScalar - data.scalar, data.normNablaJSq / S(2), data.normNablaOmegaSq / S(2)};
}

/// s * Vol^{1/n}: the normalized total scalar curvature of a homogeneous metric.
template <class S>
double zRatio(const LieFrameSpec<S>& spec, const CurvatureData<S>& data) {
  if (spec.latticeVolumes.empty()) throw Error("lie-geometry", "volume", "spec has no lattice volumes");
  const double vol = std::accumulate(spec.latticeVolumes.begin(), spec.latticeVolumes.end(), 1.0,
                                     std::multiplies<>());
  const double n = spec.dim / 2.0;
  return toDouble(data.scalar) * std::pow(vol, 1.0 / n);
}

template <class S>
double zRatio(const LieFrameSpec<S>& spec) {
  return zRatio(spec, curvature(spec));
}

struct BlairReport {
  double lhs = 0.0;  // integral of (s + s*)/2 over the quotient
  double rhs = 0.0;  // 4 pi c1 . [omega]^{n-1} / (n-1)!, supplied by the caller
  double discrepancy = 0.0;
  bool match = false;
  bool rhsExternal = true;
};

template <class S>
BlairReport blairCheck(const LieFrameSpec<S>& spec, const CurvatureData<S>& data, double rhs) {
  if (spec.latticeVolumes.empty()) throw Error("lie-geometry", "volume", "spec has no lattice volumes");
  const double vol = std::accumulate(spec.latticeVolumes.begin(), spec.latticeVolumes.end(), 1.0,
                                     std::multiplies<>());
  BlairReport r;
  r.lhs = toDouble(data.hermitianScalar) * vol;
  r.rhs = rhs;
  r.discrepancy = r.lhs - r.rhs;
  r.match = std::abs(r.discrepancy) <= 1e-9 * std::max(1.0, std::abs(rhs));
  return r;
}

/// Validated spec together with its curvature, computed once. Copies share
/// the same immutable data.
template <class S>
class LeftInvariantGeometry {
 public:
  explicit LeftInvariantGeometry(LieFrameSpec<S> spec)
      : spec_(std::make_shared<const LieFrameSpec<S>>(std::move(spec))),
        data_(std::make_shared<const CurvatureData<S>>(curvature(*spec_))) {}

  const LieFrameSpec<S>& spec() const { return *spec_; }
  const CurvatureData<S>& data() const { return *data_; }
  double zRatio() const { return lie::zRatio(*spec_, *data_); }
  BlairReport blair(double rhs) const { return blairCheck(*spec_, *data_, rhs); }

 private:
  std::shared_ptr<const LieFrameSpec<S>> spec_;
  std::shared_ptr<const CurvatureData<S>> data_;
};

// ---------------------------------------------------------------------------
// Catalog.

namespace catalog {

/// Flat 2n-torus with the standard block J (J e_{2i-1} = e_{2i}).
template <class S>
LieFrameSpec<S> abelianTorus(int dim, double volume = 1.0) {
  LieFrameSpec<S> spec("abelian" + std::to_string(dim), dim);
  for (int p = 0; p + 1 < dim; p += 2) {
    spec.j(p + 1, p) = S(1);
    spec.j(p, p + 1) = S(-1);
  }
  spec.latticeVolumes = {volume};
  return spec;
}

/// Kodaira-Thurston block: [e1, e2] = e3, J e4 = e1, J e2 = e3; the single
/// lattice parameter is the t-period d (the x,y,z periods are 1).
template <class S>
LieFrameSpec<S> kodairaThurston(double d = 1.0) {
  LieFrameSpec<S> spec("kodaira-thurston", 4);
  spec.addBracket(0, 1, 2, S(1));
  spec.j(0, 3) = S(1);
  spec.j(3, 0) = S(-1);
  spec.j(2, 1) = S(1);
  spec.j(1, 2) = S(-1);
  spec.latticeVolumes = {d};
  return spec;
}

/// spec (+) R^{extra} with standard blocks on the new directions.
template <class S>
LieFrameSpec<S> withFlatFactor(const LieFrameSpec<S>& base, int extra, double volume = 1.0) {
  if (extra < 0 || extra % 2 != 0) throw Error("lie-geometry", "dimension", "flat factor must be even-dimensional");
  const int d = base.dim + extra;
  LieFrameSpec<S> spec(base.name + "+R" + std::to_string(extra), d);
  for (int i = 0; i < base.dim; ++i)
    for (int j = 0; j < base.dim; ++j)
      for (int k = 0; k < base.dim; ++k) spec.c(i, j, k) = base.c(i, j, k);
  spec.j.topLeftCorner(base.dim, base.dim) = base.j;
  for (int p = base.dim; p + 1 < d; p += 2) {
    spec.j(p + 1, p) = S(1);
    spec.j(p, p + 1) = S(-1);
  }
  spec.latticeVolumes = base.latticeVolumes;
  if (extra > 0) spec.latticeVolumes.push_back(volume);
  return spec;
}

}  // namespace catalog

}  // namespace akscal::lie
