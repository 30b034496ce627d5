#pragma once
// System dimensions, power budget, and reproducible Rayleigh channel draws.
// One ChannelRealization carries both hops plus cached eigensystems of the
// gram matrices, which every relay design consumes.

#include <cstdint>
#include <string>

#include "relaylab/errors.hpp"
#include "relaylab/linalg.hpp"
#include "relaylab/rng.hpp"

namespace relaylab {

struct SystemDims {
  int n_s = 1;
  int n_r = 1;
  int n_d = 1;

  SystemDims() = default;
  SystemDims(int ns, int nr, int nd) : n_s(ns), n_r(nr), n_d(nd) {
    if (n_s < 1 || n_r < 1 || n_d < 1) {
      throw InvalidDims("antenna counts must be >= 1");
    }
    if (n_s > kMaxDim || n_r > kMaxDim || n_d > kMaxDim) {
      throw InvalidDims("antenna counts must be <= " +
                        std::to_string(kMaxDim));
    }
  }

  int m() const { return n_s < n_r ? n_s : n_r; }
  int n() const { return m() < n_d ? m() : n_d; }
  int l() const { return n_r < n_d ? n_r : n_d; }

  bool zf_defined() const { return n_s <= l(); }
};

struct PowerBudget {
  double rho = 1.0;  // per-source-antenna transmit power (unit noise)
  double p_r = 1.0;  // relay power budget

  PowerBudget(double rho_in, double p_r_in) : rho(rho_in), p_r(p_r_in) {
    if (!(rho > 0.0) || !(p_r > 0.0)) {
      throw OutOfRange("rho and p_r must be positive");
    }
  }

  // Default convention p_r = rho * N_S.
  static PowerBudget standard(double rho, const SystemDims& dims) {
    return PowerBudget(rho, rho * dims.n_s);
  }
};

struct ChannelRealization {
  CMat h;  // N_R x N_S
  CMat g;  // N_D x N_R
  Eigensystem eig_h;  // of H^H H (N_S x N_S)
  Eigensystem eig_g;  // of G^H G (N_R x N_R)

  static ChannelRealization from(CMat h_in, CMat g_in) {
    ChannelRealization ch;
    ch.h = std::move(h_in);
    ch.g = std::move(g_in);
    ch.eig_h = hermitian_eig(gram(ch.h));
    ch.eig_g = hermitian_eig(gram(ch.g));
    return ch;
  }
};

// Entries i.i.d. CN(0,1), filled row-major: exactly 2*rows*cols words.
inline CMat sample_channel(int rows, int cols, SeededRng& rng) {
  if (rows < 1 || cols < 1) {
    throw InvalidDims("sample_channel requires rows, cols >= 1");
  }
  CMat a(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      a(r, c) = rng.next_cn();
    }
  }
  return a;
}

// H first, then G; fixed consumption makes the draw a pure function of the
// rng key.
inline ChannelRealization sample_realization(const SystemDims& dims,
                                             SeededRng& rng) {
  CMat h = sample_channel(dims.n_r, dims.n_s, rng);
  CMat g = sample_channel(dims.n_d, dims.n_r, rng);
  return ChannelRealization::from(std::move(h), std::move(g));
}

}  // namespace relaylab
