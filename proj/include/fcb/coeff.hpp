#pragma once

// Exact coefficient arithmetic for the operator calculus.
//
// Everything the calculus manipulates is a finite sum
//
//     sum  c * x0^j0 * x1^j1 * lam^jl * e^{i ky y} * e^{i kz z}
//
// with complex c. Polynomials in (x0, x1), trigonometric polynomials in the
// angle variables, and polynomial dependence on the spectral parameter lam
// all live in this one canonical basis, so equality of coefficients is map
// equality and every operation below stays inside the class.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "fcb/errors.hpp"

namespace fcb {

using cd = std::complex<double>;

struct Expo {
  std::int16_t j0 = 0;  // power of x0
  std::int16_t j1 = 0;  // power of x1
  std::int16_t jl = 0;  // power of lam (spectral parameter)
  std::int16_t ky = 0;  // harmonic in y
  std::int16_t kz = 0;  // harmonic in z
  auto operator<=>(const Expo&) const = default;
};

class Coeff {
 public:
  using Map = std::map<Expo, cd>;

  Coeff() = default;
  explicit Coeff(cd constant) {
    if (constant != cd(0.0)) terms_[Expo{}] = constant;
  }
  explicit Coeff(double constant) : Coeff(cd(constant)) {}

  static Coeff monomial(Expo e, cd c = cd(1.0)) {
    Coeff f;
    if (c != cd(0.0)) f.terms_[e] = c;
    return f;
  }
  static Coeff x0(int p = 1) { return monomial(Expo{(std::int16_t)p, 0, 0, 0, 0}); }
  static Coeff x1(int p = 1) { return monomial(Expo{0, (std::int16_t)p, 0, 0, 0}); }
  static Coeff lam(int p = 1) { return monomial(Expo{0, 0, (std::int16_t)p, 0, 0}); }
  static Coeff harmonic_y(int k, cd c = cd(1.0)) { return monomial(Expo{0, 0, 0, (std::int16_t)k, 0}, c); }
  static Coeff harmonic_z(int k, cd c = cd(1.0)) { return monomial(Expo{0, 0, 0, 0, (std::int16_t)k}, c); }
  // cos(kz), sin(kz) as trigonometric polynomials
  static Coeff cos_z(int k) { return harmonic_z(k, 0.5) + harmonic_z(-k, 0.5); }
  static Coeff sin_z(int k) { return harmonic_z(k, cd(0, -0.5)) + harmonic_z(-k, cd(0, 0.5)); }
  static Coeff cos_y(int k) { return harmonic_y(k, 0.5) + harmonic_y(-k, 0.5); }

  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(Expo e, cd c) {
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (c != cd(0.0)) terms_[e] = c;
    } else {
      it->second += c;
      if (it->second == cd(0.0)) terms_.erase(it);
    }
  }

  Coeff& operator+=(const Coeff& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Coeff& operator-=(const Coeff& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend Coeff operator+(Coeff a, const Coeff& b) { return a += b; }
  friend Coeff operator-(Coeff a, const Coeff& b) { return a -= b; }
  friend Coeff operator*(const Coeff& a, const Coeff& b) {
    Coeff r;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_)
        r.add_term(Expo{(std::int16_t)(ea.j0 + eb.j0), (std::int16_t)(ea.j1 + eb.j1),
                        (std::int16_t)(ea.jl + eb.jl), (std::int16_t)(ea.ky + eb.ky),
                        (std::int16_t)(ea.kz + eb.kz)},
                   ca * cb);
    return r;
  }
  friend Coeff operator*(cd s, const Coeff& a) {
    Coeff r;
    if (s == cd(0.0)) return r;
    for (const auto& [e, c] : a.terms_) r.terms_[e] = s * c;
    return r;
  }
  friend Coeff operator*(const Coeff& a, cd s) { return s * a; }
  Coeff operator-() const { return cd(-1.0) * *this; }

  bool operator==(const Coeff& o) const { return terms_ == o.terms_; }

  // d/dx0, d/dx1, d/dz, d/dy, d/dlam as exact operations on the basis
  Coeff d_x0() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.j0 > 0) r.add_term(Expo{(std::int16_t)(e.j0 - 1), e.j1, e.jl, e.ky, e.kz}, double(e.j0) * c);
    return r;
  }
  Coeff d_x1() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.j1 > 0) r.add_term(Expo{e.j0, (std::int16_t)(e.j1 - 1), e.jl, e.ky, e.kz}, double(e.j1) * c);
    return r;
  }
  Coeff d_z() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.kz != 0) r.add_term(e, cd(0.0, double(e.kz)) * c);
    return r;
  }
  Coeff d_y() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.ky != 0) r.add_term(e, cd(0.0, double(e.ky)) * c);
    return r;
  }
  Coeff d_lam() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.jl > 0) r.add_term(Expo{e.j0, e.j1, (std::int16_t)(e.jl - 1), e.ky, e.kz}, double(e.jl) * c);
    return r;
  }

  Coeff mul_x0(int p) const {
    Coeff r;
    for (const auto& [e, c] : terms_) r.terms_[Expo{(std::int16_t)(e.j0 + p), e.j1, e.jl, e.ky, e.kz}] = c;
    return r;
  }
  Coeff mul_x1(int p) const {
    Coeff r;
    for (const auto& [e, c] : terms_) r.terms_[Expo{e.j0, (std::int16_t)(e.j1 + p), e.jl, e.ky, e.kz}] = c;
    return r;
  }

  // restriction x0 = 0 (keeps j0 == 0 part), x1 = 0 likewise
  Coeff at_x0_zero() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.j0 == 0) r.terms_[e] = c;
    return r;
  }
  Coeff at_x1_zero() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (e.j1 == 0) r.terms_[e] = c;
    return r;
  }

  // complex conjugate of the function (conjugates coefficients, flips harmonics)
  Coeff conj() const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      r.add_term(Expo{e.j0, e.j1, e.jl, (std::int16_t)(-e.ky), (std::int16_t)(-e.kz)}, std::conj(c));
    return r;
  }

  // substitute lam -> lam + shift (binomial expansion, exact)
  Coeff shift_lam(cd shift) const {
    Coeff r;
    for (const auto& [e, c] : terms_) {
      // (lam + s)^jl
      std::vector<cd> pows(e.jl + 1);
      pows[0] = cd(1.0);
      for (int p = 1; p <= e.jl; ++p) pows[p] = pows[p - 1] * shift;
      double binom = 1.0;
      for (int q = e.jl; q >= 0; --q) {
        r.add_term(Expo{e.j0, e.j1, (std::int16_t)q, e.ky, e.kz}, c * binom * pows[e.jl - q]);
        binom = binom * q / double(e.jl - q + 1);
      }
    }
    return r;
  }

  cd eval(double x0v, double x1v, double yv, double zv, cd lamv = cd(0.0)) const {
    cd s(0.0);
    for (const auto& [e, c] : terms_) {
      cd t = c;
      for (int p = 0; p < e.j0; ++p) t *= x0v;
      for (int p = 0; p < e.j1; ++p) t *= x1v;
      for (int p = 0; p < e.jl; ++p) t *= lamv;
      if (e.ky != 0) t *= std::polar(1.0, e.ky * yv);
      if (e.kz != 0) t *= std::polar(1.0, e.kz * zv);
      s += t;
    }
    return s;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }
  int max_deg_x0() const { int m = 0; for (auto& [e, c] : terms_) m = std::max(m, (int)e.j0); return m; }
  int max_deg_x1() const { int m = 0; for (auto& [e, c] : terms_) m = std::max(m, (int)e.j1); return m; }
  int max_deg_lam() const { int m = 0; for (auto& [e, c] : terms_) m = std::max(m, (int)e.jl); return m; }
  int max_harm_z() const { int m = 0; for (auto& [e, c] : terms_) m = std::max(m, std::abs((int)e.kz)); return m; }
  int max_harm_y() const { int m = 0; for (auto& [e, c] : terms_) m = std::max(m, std::abs((int)e.ky)); return m; }

  // drop terms with |c| <= eps (used only by tests and reporting, never by the algebra)
  Coeff pruned(double eps) const {
    Coeff r;
    for (const auto& [e, c] : terms_)
      if (std::abs(c) > eps) r.terms_[e] = c;
    return r;
  }

 private:
  Map terms_;
};

inline double max_abs_diff(const Coeff& a, const Coeff& b) {
  return (a - b).max_abs();
}

// Dense matrix of coefficient functions; coefficients of matrix-valued operators.
class CoeffMatrix {
 public:
  CoeffMatrix() = default;
  CoeffMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CoeffMatrix identity(int n) {
    CoeffMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Coeff(1.0);
    return m;
  }
  static CoeffMatrix scalar(int n, const Coeff& f) {
    CoeffMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = f;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Coeff& operator()(int i, int j) { return data_[i * cols_ + j]; }
  const Coeff& operator()(int i, int j) const { return data_[i * cols_ + j]; }

  CoeffMatrix& operator+=(const CoeffMatrix& o) {
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  friend CoeffMatrix operator+(CoeffMatrix a, const CoeffMatrix& b) { return a += b; }
  friend CoeffMatrix operator*(const CoeffMatrix& a, const CoeffMatrix& b) {
    CoeffMatrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int j = 0; j < b.cols_; ++j)
        for (int k = 0; k < a.cols_; ++k) r(i, j) += a(i, k) * b(k, j);
    return r;
  }
  friend CoeffMatrix operator*(const Coeff& f, const CoeffMatrix& a) {
    CoeffMatrix r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = f * a.data_[i];
    return r;
  }
  friend CoeffMatrix operator*(cd s, const CoeffMatrix& a) {
    CoeffMatrix r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = s * a.data_[i];
    return r;
  }
  CoeffMatrix operator-() const { return cd(-1.0) * *this; }

  bool operator==(const CoeffMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }
  bool is_zero() const {
    for (const auto& f : data_)
      if (!f.is_zero()) return false;
    return true;
  }

  template <typename F>
  CoeffMatrix map(F&& fn) const {
    CoeffMatrix r(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = fn(data_[i]);
    return r;
  }
  CoeffMatrix adjoint() const {  // conjugate transpose, entrywise function conjugate
    CoeffMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j).conj();
    return r;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& f : data_) m = std::max(m, f.max_abs());
    return m;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Coeff> data_;
};

inline double max_abs_diff(const CoeffMatrix& a, const CoeffMatrix& b) {
  double m = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, max_abs_diff(a(i, j), b(i, j)));
  return m;
}

}  // namespace fcb
