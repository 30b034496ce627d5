#pragma once
// Closed-form DMT and DRT calculators for every scheme, the relaying optimum,
// and the Rayleigh-product eigenvalue exponent functions with a brute-force
// infimum oracle tying them to the closed-form DRT.

#include <cmath>
#include <vector>

#include "relaylab/channel.hpp"
#include "relaylab/errors.hpp"

namespace relaylab {

// d*(r) = (N_R - 2r)(min(N_S, N_D) - 2r) for 0 <= r <= N/2. The product form
// is exact at half-integer r; between those points it interpolates below the
// true piecewise-linear optimum, so dominance over the linear schemes is only
// asserted on the half-integer grid.
inline double dmt_optimal(const SystemDims& dims, double r) {
  const double n2 = dims.n() / 2.0;
  if (r < 0.0 || r > n2) {
    throw OutOfRange("multiplexing gain must satisfy 0 <= r <= N/2");
  }
  const int mn = dims.n_s < dims.n_d ? dims.n_s : dims.n_d;
  const double v = (dims.n_r - 2.0 * r) * (mn - 2.0 * r);
  return v > 0.0 ? v : 0.0;
}

enum class LinearTxKind { Mmse, Zf };

// (N_R - N_S + 1)(1 - 2r/N_S)^+ when N_S <= min(N_R, N_D), else 0.
// valid_at_r0 is false for MMSE joint encoding: its DMT statement holds for
// r > 0 only and must not be extrapolated to fixed rates.
struct LinearTxDmt {
  double value = 0.0;
  bool valid_at_r0 = true;
};

inline LinearTxDmt dmt_linear_tx(const SystemDims& dims, double r,
                                 LinearTxKind kind = LinearTxKind::Zf) {
  if (r < 0.0) throw OutOfRange("multiplexing gain must be >= 0");
  LinearTxDmt out;
  out.valid_at_r0 = kind == LinearTxKind::Zf;
  if (dims.n_s <= dims.l()) {
    const double slope = 1.0 - 2.0 * r / dims.n_s;
    out.value = (dims.n_r - dims.n_s + 1) * (slope > 0.0 ? slope : 0.0);
  }
  return out;
}

// (min(N_R, N_D) - N_S + 1)^+ (1 - 2r/N_S)^+.
inline double dmt_naive(const SystemDims& dims, double r) {
  if (r < 0.0) throw OutOfRange("multiplexing gain must be >= 0");
  const double head = dims.l() - dims.n_s + 1;
  const double slope = 1.0 - 2.0 * r / dims.n_s;
  return (head > 0.0 ? head : 0.0) * (slope > 0.0 ? slope : 0.0);
}

struct DrtBounds {
  double lower = 0.0;
  double upper = 0.0;
  double index_arg = 0.0;  // m (transceiver) or n (naive) before rounding
  int lower_index = 0;
  int upper_index = 0;
};

// D_ME(i) = min(i (N_R + N_S - 2M + i), (N_R - M + i)(N_D - M + i)^+),
// D_ME(0) = 0.
inline double drt_mmse_diversity_at_index(const SystemDims& dims, int i) {
  if (i <= 0) return 0.0;
  const int m = dims.m();
  const double a = static_cast<double>(i) * (dims.n_r + dims.n_s - 2 * m + i);
  const int ndmi = dims.n_d - m + i;
  const double b =
      static_cast<double>(dims.n_r - m + i) * (ndmi > 0 ? ndmi : 0);
  return a < b ? a : b;
}

// D_N-ME(i) = i (Y - X + i) - floor(((i - (Z - Y))^+)^2 / 4) with
// (X, Y, Z) the antenna triple sorted ascending; D_N-ME(0) = 0.
inline double drt_naive_diversity_at_index(const SystemDims& dims, int i) {
  if (i <= 0) return 0.0;
  int x = dims.n_s, y = dims.n_r, z = dims.n_d;
  if (x > y) std::swap(x, y);
  if (y > z) std::swap(y, z);
  if (x > y) std::swap(x, y);
  const int excess = i - (z - y) > 0 ? i - (z - y) : 0;
  return static_cast<double>(i) * (y - x + i) - (excess * excess) / 4;
}

namespace detail {

inline DrtBounds drt_from_index_arg(const SystemDims& dims, double arg,
                                    double (*at_index)(const SystemDims&,
                                                       int)) {
  DrtBounds out;
  out.index_arg = arg;
  const double pos = arg > 0.0 ? arg : 0.0;
  const double pos1 = arg + 1.0 > 0.0 ? arg + 1.0 : 0.0;
  out.lower_index = static_cast<int>(std::ceil(pos));
  out.upper_index = static_cast<int>(std::floor(pos1));
  out.lower = at_index(dims, out.lower_index);
  out.upper = at_index(dims, out.upper_index);
  return out;
}

}  // namespace detail

// Transceiver DRT bounds at fixed rate: m = N_S 2^{-2R/N_S} + M - N_S,
// lower = D_ME(ceil(m^+)), upper = D_ME(floor((m+1)^+)).
inline DrtBounds drt_mmse_tx(const SystemDims& dims, double rate) {
  if (!(rate > 0.0)) throw OutOfRange("rate must be > 0");
  const double m = dims.n_s * std::exp2(-2.0 * rate / dims.n_s) +
                   dims.m() - dims.n_s;
  return detail::drt_from_index_arg(dims, m, &drt_mmse_diversity_at_index);
}

// Naive-scheme DRT bounds at fixed rate: n = N_S 2^{-2R/N_S} + N - N_S over
// the sorted triple's closed form.
inline DrtBounds drt_naive(const SystemDims& dims, double rate) {
  if (!(rate > 0.0)) throw OutOfRange("rate must be > 0");
  const double n = dims.n_s * std::exp2(-2.0 * rate / dims.n_s) +
                   dims.n() - dims.n_s;
  return detail::drt_from_index_arg(dims, n, &drt_naive_diversity_at_index);
}

// Eigenvalue exponential orders of the Rayleigh product channel G H with
// G n x l and H l x m: gamma_1 <= ... <= gamma_p, p = min(l, m, n), ordered
// so the weakest eigenvalue's exponent comes last.
struct ExponentVector {
  std::vector<double> c;
  int l = 1;
  int m = 1;
  int n = 1;
};

// Per-exponent coefficients of theta(c) = sum_k coeff_k * gamma_k. The three
// regimes (l below both, between, above both of m and n) partition all
// triples; coefficients are nonnegative and nonincreasing in k. Sum lower
// bounds clamp at k = 1 for strongly asymmetric triples.
inline std::vector<double> rayleigh_exponent_coefficients(int l, int m,
                                                          int n) {
  const int p = m < n ? m : n;
  const int q = m < n ? n : m;
  const int count = l < p ? l : p;
  std::vector<double> coeffs;
  coeffs.reserve(count);
  if (l <= q) {  // regimes 1 and 2 share the coefficient formulas
    const int split = l - (q - p);
    for (int k = 1; k <= count; ++k) {
      if (k <= split) {
        coeffs.push_back(p + 1 - 2 * k + (l + k + q - p) / 2);
      } else {
        coeffs.push_back(p + l + 1 - 2 * k);
      }
    }
  } else {  // l > q
    const int split = q - (l - p);
    for (int k = 1; k <= count; ++k) {
      if (k <= split) {
        coeffs.push_back(p + 1 - 2 * k + (q + k + l - p) / 2);
      } else {
        coeffs.push_back(m + n + 1 - 2 * k);
      }
    }
  }
  return coeffs;
}

inline double rayleigh_exponent(const ExponentVector& ev) {
  const auto coeffs = rayleigh_exponent_coefficients(ev.l, ev.m, ev.n);
  if (ev.c.size() != coeffs.size()) {
    throw OutOfRange("exponent vector length must be min(l, m, n)");
  }
  double prev = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (ev.c[k] < 0.0 || ev.c[k] < prev) {
      throw OutOfRange("exponents must be nonnegative and nondecreasing");
    }
    prev = ev.c[k];
    theta += coeffs[k] * ev.c[k];
  }
  return theta;
}

// Brute-force infimum of theta over the outage event "exactly the i weakest
// eigenvalues have exponents above 1" (the event's closure: the i largest
// exponents at or above 1, the rest at or below 1). theta is linear with
// nonnegative coefficients, so the infimum sits at a 0/1 vertex; a 1e-3
// coordinate descent confirms vertex optimality. The product channel maps as
// l = N_R, m = N_S, n = N_D.
inline double drt_infimum_oracle(const SystemDims& dims, int i) {
  const int l = dims.n_r, m = dims.n_s, n = dims.n_d;
  const int p = dims.n();
  if (i < 1 || i > p) throw OutOfRange("index must satisfy 1 <= i <= N");

  ExponentVector ev;
  ev.l = l;
  ev.m = m;
  ev.n = n;
  double best = 0.0;
  std::vector<double> arg;
  for (int extra = 0; extra <= p - i; ++extra) {
    std::vector<double> g(p, 0.0);
    for (int k = p - i - extra; k < p; ++k) g[k] = 1.0;
    ev.c = g;
    const double v = rayleigh_exponent(ev);
    if (arg.empty() || v < best) {
      best = v;
      arg = g;
    }
  }

  const double step = 1e-3;
  for (int pass = 0; pass < 4; ++pass) {
    bool improved = false;
    for (int k = 0; k < p; ++k) {
      for (const double delta : {-step, step}) {
        std::vector<double> g = arg;
        g[k] += delta;
        if (g[k] < 0.0) continue;
        bool feasible = true;
        for (int a = 0; a + 1 < p; ++a) {
          if (g[a] > g[a + 1] + 1e-12) feasible = false;
        }
        for (int a = p - i; a < p; ++a) {
          if (g[a] < 1.0) feasible = false;
        }
        if (p - i - 1 >= 0 && g[p - i - 1] > 1.0) feasible = false;
        if (!feasible) continue;
        ev.c = g;
        const double v = rayleigh_exponent(ev);
        if (v < best - 1e-12) {
          best = v;
          arg = g;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace relaylab
