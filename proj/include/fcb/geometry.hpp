#pragma once

// Model geometries and the blown-up groupoid chart.
//
// The chart carries a base point (x0, x1, z) and arrow coordinates
// (u0, u1, v, w) with
//
//   u0 = (x0 - x0')/x0^2,  u1 = (x1 - x1')/(x0 x1),  v = (y - y')/x0,  w = z - z',
//
// valid on the patch x0 * sqrt(1 + u0^2 + u1^2 + v^2) < 1. Ratios of boundary
// defining functions are always evaluated through the closed smooth forms
//
//   x0'/x0 = 1 - x0 u0,   x1'/x1 = 1 - x0 u1,
//
// never by division, so every map below extends to x0 = 0 and x1 = 0.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "fcb/coeff.hpp"
#include "fcb/errors.hpp"

namespace fcb {

enum class GeometryKind { B_INTERVAL, B_CYLINDER, CORNER };

inline const char* to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::B_INTERVAL: return "B_INTERVAL";
    case GeometryKind::B_CYLINDER: return "B_CYLINDER";
    case GeometryKind::CORNER: return "CORNER";
  }
  return "?";
}

struct GeometrySignature {
  GeometryKind kind = GeometryKind::B_INTERVAL;
  int fiber_modes = 0;  // Fourier truncation half-width N for the S^1 fiber
  int matrix_dim = 1;   // rank of the coefficient bundles

  void validate() const {
    if (matrix_dim < 1) fail(errc::invalid_input, "matrix_dim must be >= 1");
    if (fiber_modes < 0) fail(errc::invalid_input, "fiber_modes must be >= 0");
    if ((fiber_modes == 0) != (kind == GeometryKind::B_INTERVAL))
      fail(errc::invalid_input, "fiber_modes = 0 exactly for B_INTERVAL");
  }
  bool has_phi_boundary() const { return kind == GeometryKind::CORNER; }
  bool has_fiber() const { return kind != GeometryKind::B_INTERVAL; }
  bool operator==(const GeometrySignature&) const = default;
};

namespace tol {
inline constexpr double composability = 1e-12;
inline constexpr double patch_margin = 1e-14;
inline constexpr double algebroid_step = 1e-5;
inline constexpr double algebroid_residual = 1e-8;
}  // namespace tol

inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0) r += two_pi;
  return r;
}
// signed distance between angles, in (-pi, pi]
inline double angle_diff(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(a - b, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  if (d > std::numbers::pi) d -= two_pi;
  return d;
}

struct BasePoint {
  double x0 = 0, x1 = 0, z = 0;
};

struct Arrow {
  double u0 = 0, u1 = 0, v = 0, w = 0;
};

struct GroupoidElement {
  BasePoint base;
  Arrow arrow;

  double ratio0() const { return 1.0 - base.x0 * arrow.u0; }  // x0'/x0
  double ratio1() const { return 1.0 - base.x0 * arrow.u1; }  // x1'/x1

  bool in_patch() const {
    double r = base.x0 * std::sqrt(1.0 + arrow.u0 * arrow.u0 + arrow.u1 * arrow.u1 + arrow.v * arrow.v);
    return base.x0 >= 0 && base.x1 >= 0 && r < 1.0 - tol::patch_margin &&
           base.x0 * ratio0() >= 0 && base.x1 * ratio1() >= 0;
  }
};

inline GroupoidElement unit(const BasePoint& p) { return GroupoidElement{p, Arrow{}}; }

// target (domain) point: x0' = x0 - x0^2 u0, x1' = x1 - x0 x1 u1, z' = z - w.
// delta_y = y - y' = x0 v is reported separately since y itself is suppressed.
struct TargetPoint {
  BasePoint point;
  double delta_y = 0;
};

inline TargetPoint target(const GroupoidElement& g) {
  TargetPoint t;
  t.point.x0 = g.base.x0 * g.ratio0();
  t.point.x1 = g.base.x1 * g.ratio1();
  t.point.z = wrap_angle(g.base.z - g.arrow.w);
  t.delta_y = g.base.x0 * g.arrow.v;
  return t;
}

inline void require_patch(const GroupoidElement& g, const char* who) {
  if (!g.in_patch()) fail(errc::patch_exit, std::string(who) + ": element leaves the coordinate patch");
}

// Composition law: with r0 = x0'/x0, r1 = x1'/x1 of g,
//   u0'' = u0 + r0^2 u0',  u1'' = u1 + r0 r1 u1',  v'' = v + r0 v',  w'' = w + w'.
inline GroupoidElement compose(const GroupoidElement& g, const GroupoidElement& h) {
  require_patch(g, "compose");
  require_patch(h, "compose");
  TargetPoint tg = target(g);
  if (std::abs(tg.point.x0 - h.base.x0) > tol::composability ||
      std::abs(tg.point.x1 - h.base.x1) > tol::composability ||
      std::abs(angle_diff(tg.point.z, h.base.z)) > tol::composability)
    fail(errc::composability_violation, "target(g) != base(h)");
  const double r0 = g.ratio0(), r1 = g.ratio1();
  GroupoidElement out;
  out.base = g.base;
  out.arrow.u0 = g.arrow.u0 + r0 * r0 * h.arrow.u0;
  out.arrow.u1 = g.arrow.u1 + r0 * r1 * h.arrow.u1;
  out.arrow.v = g.arrow.v + r0 * h.arrow.v;
  out.arrow.w = g.arrow.w + h.arrow.w;
  if (!out.in_patch()) fail(errc::patch_exit, "compose: product leaves the coordinate patch");
  return out;
}

// Solve the composition law for the arrow carrying target(g) back to base(g).
// r0, r1 are strictly positive on the patch, so the divisions are safe.
inline GroupoidElement inverse(const GroupoidElement& g) {
  require_patch(g, "inverse");
  const double r0 = g.ratio0(), r1 = g.ratio1();
  GroupoidElement out;
  out.base = target(g).point;
  out.arrow.u0 = -g.arrow.u0 / (r0 * r0);
  out.arrow.u1 = -g.arrow.u1 / (r0 * r1);
  out.arrow.v = -g.arrow.v / r0;
  out.arrow.w = -g.arrow.w;
  if (!out.in_patch()) fail(errc::patch_exit, "inverse: inverse leaves the coordinate patch");
  return out;
}

// Pushforward of the arrow directions under the target map at the unit,
// by central divided differences, against (-x0^2, -x0 x1, -x0, -1).
inline double algebroid_frame_check(const BasePoint& p, double step = tol::algebroid_step) {
  auto coords = [](const GroupoidElement& g) {
    TargetPoint t = target(g);
    return std::array<double, 4>{t.point.x0, t.point.x1, -t.delta_y, t.point.z};
  };
  const std::array<double, 4> expected = {-p.x0 * p.x0, -p.x0 * p.x1, -p.x0, -1.0};
  double residual = 0;
  for (int dir = 0; dir < 4; ++dir) {
    GroupoidElement gp{p, Arrow{}}, gm{p, Arrow{}};
    double* slots_p[4] = {&gp.arrow.u0, &gp.arrow.u1, &gp.arrow.v, &gp.arrow.w};
    double* slots_m[4] = {&gm.arrow.u0, &gm.arrow.u1, &gm.arrow.v, &gm.arrow.w};
    *slots_p[dir] = step;
    *slots_m[dir] = -step;
    auto cp = coords(gp), cm = coords(gm);
    for (int i = 0; i < 4; ++i) {
      double d = (cp[i] - cm[i]) / (2 * step);
      // the i-th coordinate responds only to its own direction
      double want = (i == dir) ? expected[dir] : 0.0;
      if (i == 3 && dir == 3) {
        // angular coordinate: compare through the wrapped difference
        d = (angle_diff(cp[3], p.z) - angle_diff(cm[3], p.z)) / (2 * step);
      }
      residual = std::max(residual, std::abs(d - want));
    }
  }
  return residual;
}

// --- boundary defining function changes --------------------------------------

// A change x0 -> x0~ = alpha x0 with alpha|_{x0=0} = 1/gamma, gamma in C^inf(Y).
// gamma is a trigonometric polynomial in y times a polynomial in x1, positive
// on its sample grid. When 1/gamma is itself representable (gamma constant)
// the inverse change is exact; otherwise callers receive the sampled fallback.
struct BdfChange {
  Coeff gamma;  // uses j1 (x1 powers) and ky (y harmonics) only

  void validate(int samples = 64) const {
    if (gamma.is_zero()) fail(errc::invalid_input, "gamma must be nonzero");
    for (const auto& [e, c] : gamma.terms())
      if (e.j0 != 0 || e.jl != 0 || e.kz != 0)
        fail(errc::invalid_input, "gamma must depend on (x1, y) only");
    for (int i = 0; i < samples; ++i)
      for (int j = 0; j < samples; ++j) {
        double x1v = double(i) / (samples - 1);
        double yv = 2.0 * std::numbers::pi * j / samples;
        cd g = gamma.eval(0, x1v, yv, 0);
        if (std::abs(g.imag()) > 1e-12 * (1 + std::abs(g.real())) || g.real() <= 0)
          fail(errc::invalid_input, "gamma must be real and positive on the sample grid");
      }
  }
  bool inverse_representable() const {
    // 1/gamma stays in the class only for constant gamma
    return gamma.terms().size() == 1 && gamma.terms().begin()->first == Expo{};
  }
  BdfChange inverse_exact() const {
    cd g = gamma.terms().begin()->second;
    return BdfChange{Coeff(1.0 / g)};
  }
};

// Inverse change carries gamma~ = 1/gamma, which leaves the representable
// class unless gamma is constant.
inline BdfChange inverse_change(const BdfChange& c) {
  if (c.inverse_representable()) return c.inverse_exact();
  fail(errc::class_overflow, "1/alpha leaves the representable class; use the sampled fallback");
}

// Frame vector a0 x0^2 d_x0 + a1 x0 x1 d_x1 + av x0 d_y + aw d_z with
// polynomial-trigonometric coefficients.
struct FrameVector {
  std::array<Coeff, 4> a;  // a0, a1, av, aw

  bool operator==(const FrameVector& o) const { return a == o.a; }
};

// Exact coordinate-exchange of the frame under x0~ = alpha x0, alpha = 1/gamma:
//   x0^2 d_x0   = gamma             * x0~^2 d_x0~
//   x0 x1 d_x1  = -(d_x1 gamma) x1  * x0~^2 d_x0~ + gamma * x0~ x1 d_x1
//   x0 d_y      = -(d_y gamma)      * x0~^2 d_x0~ + gamma * x0~ d_y
// Coefficients are pulled back through x0 = gamma * x0~.
inline FrameVector bdf_transform_frame(const FrameVector& v, const BdfChange& c) {
  c.validate();
  const Coeff& g = c.gamma;
  auto pullback = [&](const Coeff& f) {
    // substitute x0 -> gamma * x0~ (x0-powers pick up gamma-powers)
    Coeff out;
    for (const auto& [e, co] : f.terms()) {
      Coeff gp(cd(1.0));
      for (int p = 0; p < e.j0; ++p) gp = gp * g;
      out += gp * Coeff::monomial(e, co);
    }
    return out;
  };
  FrameVector r;
  Coeff a0 = pullback(v.a[0]), a1 = pullback(v.a[1]), av = pullback(v.a[2]), aw = pullback(v.a[3]);
  r.a[0] = g * a0 - g.d_x1().mul_x1(1) * a1 - g.d_y() * av;
  r.a[1] = g * a1;
  r.a[2] = g * av;
  r.a[3] = aw;
  return r;
}

// Sampled fallback for changes whose inverse leaves the representable class.
struct SampledFrameVector {
  std::vector<std::array<cd, 4>> values;  // per sample point
};

struct FrameSampleGrid {
  std::vector<std::array<double, 4>> pts;  // (x0, x1, y, z)
  static FrameSampleGrid standard(int n = 6) {
    FrameSampleGrid g;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          g.pts.push_back({0.05 + 0.9 * i / (n - 1.0), 0.05 + 0.9 * j / (n - 1.0),
                           2.0 * std::numbers::pi * k / n, 2.0 * std::numbers::pi * ((k * 3) % n) / n});
    return g;
  }
};

// Transform with gamma~ = 1/gamma given only by samples: the exchange formulas
// evaluated pointwise. Used to verify the round-trip property when the exact
// path raises CLASS_OVERFLOW.
inline SampledFrameVector bdf_transform_frame_sampled(const FrameVector& v, const BdfChange& forward,
                                                      const FrameSampleGrid& grid) {
  forward.validate();
  SampledFrameVector out;
  out.values.reserve(grid.pts.size());
  for (const auto& p : grid.pts) {
    // inverse change: gamma~ = 1/gamma, sampled; x0-old = x0~ / gamma = x0~ * gamma~... here we
    // evaluate the inverse exchange at the point expressed in the tilde coordinates.
    cd gval = forward.gamma.eval(0, p[1], p[2], 0);
    cd gt = 1.0 / gval;                                          // gamma~ at the sample
    cd gt_x1 = -forward.gamma.d_x1().eval(0, p[1], p[2], 0) / (gval * gval);
    cd gt_y = -forward.gamma.d_y().eval(0, p[1], p[2], 0) / (gval * gval);
    double x0_old = (p[0] * gt).real();  // pull the sample back through x0 = gamma~ * x0~
    std::array<cd, 4> a;
    for (int i = 0; i < 4; ++i) a[i] = v.a[i].eval(x0_old, p[1], p[2], p[3]);
    std::array<cd, 4> r;
    r[0] = gt * a[0] - gt_x1 * cd(p[1]) * a[1] - gt_y * a[2];
    r[1] = gt * a[1];
    r[2] = gt * a[2];
    r[3] = a[3];
    out.values.push_back(r);
  }
  return out;
}

// The G-action on R + bTY at a point of Y:
//   (tau, eta) -> (tau/gamma + (d_y gamma) eta / gamma^2, eta/gamma).
inline std::array<double, 2> g_action_NY(double tau, double eta, const BdfChange& c, double x1v, double yv) {
  c.validate();
  double g = c.gamma.eval(0, x1v, yv, 0).real();
  double gy = c.gamma.d_y().eval(0, x1v, yv, 0).real();
  return {tau / g + gy * eta / (g * g), eta / g};
}

}  // namespace fcb
