#pragma once

// Adaptive explicit Runge-Kutta integration with the Dormand-Prince 8(5,3)
// embedded pair (DOP853, Hairer & Wanner, Solving ODEs I, 2nd ed.).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "spinprec/error.hpp"

namespace spinprec::ode {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  ///< 0 selects a step from the initial derivative
  std::size_t max_steps = 2'000'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace dop853 {
// clang-format off
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;
// clang-format on
}  // namespace dop853

/// DOP853 stepper. The system is any callable `f(t, span<const double> y, span<double> dydt)`.
///
/// The stepper keeps its step-size proposal between calls to advance(), so a
/// trajectory can be sampled at a fixed stride without losing efficiency.
class Dop853 {
 public:
  Dop853(std::size_t dim, Options opts) : dim_(dim), opts_(opts), work_(dim * 13) {}

  const Stats& stats() const { return stats_; }
  const Options& options() const { return opts_; }
  double proposed_step() const { return h_; }
  /// Forget the cached derivative, e.g. after the state was modified externally.
  void reset() { have_derivative_ = false; }

  /// Integrates from `t` to `t_end` in place. `t` is set to exactly `t_end` on return.
  template <class System>
  void advance(System& f, double& t, std::span<double> y, double t_end) {
    using namespace dop853;
    if (y.size() != dim_) throw SolverError("state dimension mismatch");
    if (t_end <= t) return;

    double* k1 = slot(0);
    double* k2 = slot(1);
    double* k3 = slot(2);
    double* k4 = slot(3);
    double* k5 = slot(4);
    double* k6 = slot(5);
    double* k7 = slot(6);
    double* k8 = slot(7);
    double* k9 = slot(8);
    double* k10 = slot(9);
    double* yw = slot(10);
    double* y1 = slot(11);
    double* f1 = slot(12);
    const std::size_t n = dim_;

    auto eval = [&](double tt, const double* in, double* out) {
      f(tt, std::span<const double>(in, n), std::span<double>(out, n));
      ++stats_.evaluations;
    };

    if (!have_derivative_ || t != t_deriv_) {
      eval(t, y.data(), k1);
      have_derivative_ = true;
      t_deriv_ = t;
    }
    if (h_ <= 0.0) h_ = initial_step(f, t, y, t_end);

    bool last_rejected = false;
    while (t < t_end) {
      if (stats_.accepted + stats_.rejected >= opts_.max_steps) {
        throw SolverError(diagnostic("step budget exhausted", t, h_));
      }
      double h = std::min(h_, opts_.max_step);
      bool clipped = false;
      if (t + h >= t_end || t + 1.01 * h >= t_end) {
        h = t_end - t;
        clipped = true;
      }
      if (h < 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        throw SolverError(diagnostic("step size underflow", t, h));
      }
      const double t_new = clipped ? t_end : t + h;
      const double* y0 = y.data();

      for (std::size_t i = 0; i < n; ++i) yw[i] = y0[i] + h * a21 * k1[i];
      eval(t + c2 * h, yw, k2);
      for (std::size_t i = 0; i < n; ++i) yw[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
      eval(t + c3 * h, yw, k3);
      for (std::size_t i = 0; i < n; ++i) yw[i] = y0[i] + h * (a41 * k1[i] + a43 * k3[i]);
      eval(t + c4 * h, yw, k4);
      for (std::size_t i = 0; i < n; ++i) yw[i] = y0[i] + h * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
      eval(t + c5 * h, yw, k5);
      for (std::size_t i = 0; i < n; ++i) yw[i] = y0[i] + h * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
      eval(t + c6 * h, yw, k6);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      eval(t + c7 * h, yw, k7);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
      eval(t + c8 * h, yw, k8);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] +
                             a98 * k8[i]);
      eval(t + c9 * h, yw, k9);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] +
                             a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
      eval(t + c10 * h, yw, k10);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] +
                             a117 * k7[i] + a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
      eval(t + c11 * h, yw, k2);
      for (std::size_t i = 0; i < n; ++i)
        yw[i] = y0[i] + h * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] +
                             a127 * k7[i] + a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] +
                             a1211 * k2[i]);
      eval(t_new, yw, k3);

      double err5 = 0.0;
      double err3 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        k4[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] +
                b11 * k2[i] + b12 * k3[i];
        y1[i] = y0[i] + h * k4[i];
        const double sk = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e3 = (k4[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k3[i]) / sk;
        const double e5 = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                           er10 * k10[i] + er11 * k2[i] + er12 * k3[i]) /
                          sk;
        err3 += e3 * e3;
        err5 += e5 * e5;
      }
      double deno = err5 + 0.01 * err3;
      if (deno <= 0.0) deno = 1.0;
      const double err = std::abs(h) * err5 * std::sqrt(1.0 / (static_cast<double>(n) * deno));

      // step-size factor, Hairer's defaults fac1 = 0.333, fac2 = 6, safe = 0.9
      const double fac11 = std::pow(err, 0.125);
      double fac = std::clamp(fac11 / 0.9, 1.0 / 6.0, 1.0 / 0.333);
      double h_new = h / fac;

      if (err <= 1.0) {
        ++stats_.accepted;
        eval(t_new, y1, f1);
        std::copy(f1, f1 + n, k1);
        std::copy(y1, y1 + n, y.data());
        t = t_new;
        t_deriv_ = t;
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        h_ = clipped ? std::max(h_, h_new) : h_new;
        h_ = std::min(h_, opts_.max_step);
      } else {
        ++stats_.rejected;
        last_rejected = true;
        h_ = h / std::min(1.0 / 0.333, fac11 / 0.9);
      }
    }
    t = t_end;
  }

 private:
  double* slot(std::size_t i) { return work_.data() + i * dim_; }

  template <class System>
  double initial_step(System& f, double t, std::span<double> y, double t_end) {
    if (opts_.initial_step > 0.0) return std::min(opts_.initial_step, opts_.max_step);
    // Hairer's hinit for order 8.
    const std::size_t n = dim_;
    double* k1 = slot(0);
    double* yw = slot(10);
    double* k2 = slot(1);
    double dnf = 0.0;
    double dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = opts_.abs_tol + opts_.rel_tol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, opts_.max_step, t_end - t});
    for (std::size_t i = 0; i < n; ++i) yw[i] = y[i] + h * k1[i];
    f(t + h, std::span<const double>(yw, n), std::span<double>(k2, n));
    ++stats_.evaluations;
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = opts_.abs_tol + opts_.rel_tol * std::abs(y[i]);
      const double d = (k2[i] - k1[i]) / sk;
      der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 1.0 / 8.0);
    return std::min({100.0 * h, h1, opts_.max_step});
  }

  std::string diagnostic(const char* what, double t, double h) const {
    std::ostringstream os;
    os.precision(17);
    os << what << " at t=" << t << " (h=" << h << ", accepted=" << stats_.accepted
       << ", rejected=" << stats_.rejected << ", evaluations=" << stats_.evaluations << ")";
    return os.str();
  }

  std::size_t dim_;
  Options opts_;
  std::vector<double> work_;
  Stats stats_{};
  double h_ = 0.0;
  bool have_derivative_ = false;
  double t_deriv_ = 0.0;
};

}  // namespace spinprec::ode
