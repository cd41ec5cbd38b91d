#pragma once

// Fourth-order commutator-free Magnus stepping for i dpsi/dt = H(t) psi with
//   H(t) = diag(D) + sum_j f_j(t) M_j,
// where the M_j share one sparse pattern. Each stage exponential is evaluated
// with a Chebyshev expansion whose coefficients are Bessel functions.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "spinprec/error.hpp"

namespace spinprec::magnus {

using cplx = std::complex<double>;

/// Time-independent real diagonal plus a fixed list of sparse Hermitian terms.
/// `values[j][e]` is the entry of M_j at CSR position e.
struct SparseOperator {
  int dim = 0;
  std::vector<double> diagonal;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<std::vector<cplx>> values;
  /// Upper bounds on |f_j(t)| over the whole run, used for the spectral interval.
  std::vector<double> coefficient_bound;

  std::size_t term_count() const { return values.size(); }
  std::size_t nonzeros() const { return col.size(); }
};

/// Builds CSR storage from a triplet list per term. All terms must share the
/// pattern given by `pattern` (unordered (row, col) pairs, duplicates merged).
class SparseBuilder {
 public:
  SparseBuilder(int dim, std::size_t terms) : dim_(dim), entries_(terms) {}

  void add(std::size_t term, int row, int col, cplx value) {
    if (value != cplx{}) entries_[term][{row, col}] += value;
  }

  SparseOperator build(std::vector<double> diagonal, std::vector<double> bounds) const {
    SparseOperator op;
    op.dim = dim_;
    op.diagonal = std::move(diagonal);
    op.coefficient_bound = std::move(bounds);
    std::map<std::pair<int, int>, std::size_t> slot;
    for (const auto& term : entries_)
      for (const auto& [rc, v] : term) slot.emplace(rc, 0);
    op.row_ptr.assign(static_cast<std::size_t>(dim_) + 1, 0);
    std::size_t e = 0;
    for (auto& [rc, s] : slot) {
      s = e++;
      op.col.push_back(rc.second);
      ++op.row_ptr[static_cast<std::size_t>(rc.first) + 1];
    }
    for (int r = 0; r < dim_; ++r) op.row_ptr[r + 1] += op.row_ptr[r];
    op.values.assign(entries_.size(), std::vector<cplx>(op.col.size()));
    for (std::size_t j = 0; j < entries_.size(); ++j)
      for (const auto& [rc, v] : entries_[j]) op.values[j][slot.at(rc)] = v;
    return op;
  }

 private:
  int dim_;
  std::vector<std::map<std::pair<int, int>, cplx>> entries_;
};

namespace detail {

// Plain complex product; std::complex operator* carries NaN recovery that
// blocks vectorization in the hot loops.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// J_k(x) for k = 0..K by Miller's backward recurrence in extended precision,
// normalized with J_0 + 2 sum J_2k = 1. Stops once terms drop below `floor`.
inline std::vector<long double> bessel_series(long double x, long double floor) {
  const int top = static_cast<int>(x) + 60;
  std::vector<long double> j(static_cast<std::size_t>(top) + 2, 0.0L);
  j[top] = 1e-300L;
  for (int k = top; k >= 1; --k) {
    j[k - 1] = (2.0L * k / x) * j[k] - j[k + 1];
    if (std::fabs(j[k - 1]) > 1e300L) {
      for (int m = k - 1; m <= top; ++m) j[m] *= 1e-300L;
    }
  }
  long double s = j[0];
  for (int k = 2; k <= top; k += 2) s += 2.0L * j[k];
  std::vector<long double> out;
  for (int k = 0; k <= top; ++k) {
    out.push_back(j[k] / s);
    if (k > x + 4 && std::fabs(out.back()) < floor) break;
  }
  return out;
}

}  // namespace detail

struct Options {
  /// Chebyshev truncation: terms are kept until |J_k| falls below this.
  double series_floor = 1e-20;
};

/// Stateless apart from caches; one instance per run.
class Cfme4 {
 public:
  explicit Cfme4(SparseOperator op, Options opts = {}) : op_(std::move(op)), opts_(opts) {
    if (op_.dim <= 0 || op_.diagonal.size() != static_cast<std::size_t>(op_.dim))
      throw SolverError("magnus: malformed operator");
    // Gershgorin interval of every H that a stage can produce.
    double lo = INFINITY, hi = -INFINITY;
    for (int r = 0; r < op_.dim; ++r) {
      double radius = 0.0;
      for (int e = op_.row_ptr[r]; e < op_.row_ptr[r + 1]; ++e)
        for (std::size_t j = 0; j < op_.term_count(); ++j)
          radius += op_.coefficient_bound[j] * std::abs(op_.values[j][e]);
      lo = std::min(lo, op_.diagonal[r] - radius);
      hi = std::max(hi, op_.diagonal[r] + radius);
    }
    center_ = 0.5 * (hi + lo);
    half_width_ = 0.5 * (hi - lo) + 1e-12 * (1.0 + std::abs(center_));
    combined_.resize(op_.nonzeros());
    t0_.resize(op_.dim);
    t1_.resize(op_.dim);
    t2_.resize(op_.dim);
    acc_.resize(op_.dim);
  }

  const SparseOperator& op() const { return op_; }
  double spectral_center() const { return center_; }
  double spectral_half_width() const { return half_width_; }
  std::size_t series_length(double h) { return series(h).hi.size(); }
  std::size_t matvecs() const { return matvecs_; }

  /// Advances psi from t to t + h. `coeffs(t, f)` writes f_j(t) into f.
  template <class Coeffs>
  void step(std::span<cplx> psi, double t, double h, Coeffs&& coeffs) {
    static const double s3 = std::sqrt(3.0);
    static const double a1 = (3.0 - 2.0 * s3) / 12.0, a2 = (3.0 + 2.0 * s3) / 12.0;
    const std::size_t nt = op_.term_count();
    f1_.resize(nt);
    f2_.resize(nt);
    g_.resize(nt);
    coeffs(t + (0.5 - s3 / 6.0) * h, std::span<double>(f1_));
    coeffs(t + (0.5 + s3 / 6.0) * h, std::span<double>(f2_));
    // exp(-i h (a1 H1 + a2 H2)) exp(-i h (a2 H1 + a1 H2)); the right factor acts first.
    for (std::size_t j = 0; j < nt; ++j) g_[j] = 2.0 * (a2 * f1_[j] + a1 * f2_[j]);
    exponential(psi, h, g_);
    for (std::size_t j = 0; j < nt; ++j) g_[j] = 2.0 * (a1 * f1_[j] + a2 * f2_[j]);
    exponential(psi, h, g_);
  }

  /// psi <- exp(-i (h/2) (D + sum g_j M_j)) psi.
  void exponential(std::span<cplx> psi, double h, std::span<const double> g) {
    const Series& s = series(h);
    const std::size_t nz = op_.nonzeros();
    for (std::size_t e = 0; e < nz; ++e) {
      cplx v{};
      for (std::size_t j = 0; j < g.size(); ++j) v += g[j] * op_.values[j][e];  // real scalar times complex
      combined_[e] = v;
    }
    const int n = op_.dim;
    for (int i = 0; i < n; ++i) t0_[i] = psi[i];
    scaled_apply(t0_.data(), t1_.data());
    using detail::mul;
    for (int i = 0; i < n; ++i)
      acc_[i] = (mul(s.hi[0], t0_[i]) + mul(s.lo[0], t0_[i])) + (mul(s.hi[1], t1_[i]) + mul(s.lo[1], t1_[i]));
    cplx* a = t0_.data();
    cplx* b = t1_.data();
    cplx* c = t2_.data();
    for (std::size_t k = 2; k < s.hi.size(); ++k) {
      scaled_apply(b, c);
      const cplx hk = s.hi[k], lk = s.lo[k];
      for (int i = 0; i < n; ++i) {
        c[i] = 2.0 * c[i] - a[i];
        acc_[i] += mul(hk, c[i]) + mul(lk, c[i]);
      }
      cplx* tmp = a;
      a = b;
      b = c;
      c = tmp;
    }
    for (int i = 0; i < n; ++i) psi[i] = acc_[i];
  }

 private:
  struct Series {
    std::vector<cplx> hi, lo;
  };

  // y = (H - center) x / half_width with the current combined values.
  void scaled_apply(const cplx* x, cplx* y) {
    ++matvecs_;
    const double inv = 1.0 / half_width_;
    const int* rp = op_.row_ptr.data();
    const int* cl = op_.col.data();
    const cplx* v = combined_.data();
    for (int r = 0; r < op_.dim; ++r) {
      cplx sum = (op_.diagonal[r] - center_) * x[r];
      for (int e = rp[r]; e < rp[r + 1]; ++e) sum += detail::mul(v[e], x[cl[e]]);
      y[r] = sum * inv;
    }
  }

  // Coefficients of exp(-i tau (c + r X)) = sum_k a_k T_k(X), tau = h/2, split
  // into a double pair so that their rounding does not bias the norm.
  const Series& series(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 8) cache_.clear();
    const long double tau = 0.5L * h;
    auto j = detail::bessel_series(tau * half_width_, opts_.series_floor);
    const long double phase = -tau * center_;
    const std::complex<long double> shift(std::cos(phase), std::sin(phase));
    Series s;
    std::complex<long double> mi(1.0L, 0.0L);
    for (std::size_t k = 0; k < j.size(); ++k) {
      std::complex<long double> a = (k == 0 ? 1.0L : 2.0L) * j[k] * mi * shift;
      cplx hi(static_cast<double>(a.real()), static_cast<double>(a.imag()));
      cplx lo(static_cast<double>(a.real() - hi.real()), static_cast<double>(a.imag() - hi.imag()));
      s.hi.push_back(hi);
      s.lo.push_back(lo);
      mi *= std::complex<long double>(0.0L, -1.0L);
    }
    return cache_.emplace(h, std::move(s)).first->second;
  }

  SparseOperator op_;
  Options opts_;
  double center_ = 0.0;
  double half_width_ = 1.0;
  std::vector<cplx> combined_, t0_, t1_, t2_, acc_;
  std::vector<double> f1_, f2_, g_;
  std::map<double, Series> cache_;
  std::size_t matvecs_ = 0;
};

}  // namespace spinprec::magnus
