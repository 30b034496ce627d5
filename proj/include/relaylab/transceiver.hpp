#pragma once
// Relay designs: for one channel realization, each scheme's relay matrix Q,
// destination equalizer W, exact error covariance R_e, and per-stream output
// SNRs tau. Every design obeys the relay power constraint
// Tr(Q (rho H H^H + I) Q^H) <= p_r. All rates/MI are base-2 with the
// half-duplex 1/2 pre-log applied by the MI helpers.

#include <cmath>
#include <utility>

#include "relaylab/channel.hpp"
#include "relaylab/errors.hpp"
#include "relaylab/linalg.hpp"

namespace relaylab {

enum class Scheme { MmseTx, ZfTx, NaiveMmse, NaiveZf, OptimalLb };

enum class NaiveGain { VariableGain, FixedGain };

// ZF power-allocation pairing of relay eigenmodes:
// DescendingGains pairs descending first-hop estimate gains lambda_z with
// descending lambda_g (realized by reversing the U_h column order, since the
// per-column values rho + 1/lambda_{h,k} ascend). NaturalColumns keeps U_h
// column order; it exists only for the pairing audit and is never better.
enum class ZfPairing { DescendingGains, NaturalColumns };

// Effective destination noise covariance G Q Q^H G^H + I.
struct NoiseWhitening {
  CMat r_n;
};

inline NoiseWhitening noise_whitening(const CMat& g, const CMat& q) {
  const CMat gq = g * q;
  NoiseWhitening nw;
  nw.r_n = hermitize(gq * gq.adjoint()) +
           CMat::Identity(g.rows(), g.rows());
  return nw;
}

struct RelayDesign {
  Scheme scheme = Scheme::MmseTx;
  CMat q;    // N_R x N_R
  CMat b;    // inner beamformer with q = b * (first-hop receive filter);
             // set for MmseTx/ZfTx only
  CMat w;    // N_S x N_D equalizer; empty for OptimalLb. MMSE schemes
             // estimate x = w * y_d; ZF schemes x = w * r_n^{-1/2} * y_d.
  CMat r_e;  // N_S x N_S Hermitian PSD error covariance; empty for OptimalLb
  RVec tau;  // per-stream output SNR, length N_S; empty for OptimalLb
  double mi = 0.0;              // exact end-to-end MI (bits); OptimalLb only
  double mi_closed_form = 0.0;  // closed-form cross-check; OptimalLb only

  bool per_stream() const { return tau.size() > 0; }
};

// 1/2 sum log2(1 + tau_i): joint MI across the parallel streams.
inline double stream_mi_joint(const RelayDesign& design) {
  double sum = 0.0;
  for (int i = 0; i < design.tau.size(); ++i) {
    sum += std::log2(1.0 + design.tau(i));
  }
  return 0.5 * sum;
}

namespace detail {

// Shared eigensolve for an HPD matrix: inverse, inverse square root, and
// log-determinant from one factorization, with the degeneracy gate applied.
struct HpdFactors {
  Eigen::SelfAdjointEigenSolver<CMat> es;

  explicit HpdFactors(const CMat& a) : es(a) {
    if (es.info() != Eigen::Success) {
      throw SingularSystem("hermitian eigendecomposition failed to converge");
    }
    const int n = static_cast<int>(a.rows());
    require_invertible(es.eigenvalues()(0), es.eigenvalues()(n - 1));
  }

  CMat inverse() const {
    return es.eigenvectors() *
           es.eigenvalues().cwiseInverse().asDiagonal() *
           es.eigenvectors().adjoint();
  }

  CMat inverse_sqrt() const {
    return es.eigenvectors() *
           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().adjoint();
  }

  double log2_det() const {
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      s += std::log2(es.eigenvalues()(i));
    }
    return s;
  }
};

// (H^H H + I/rho)^{-1} H^H from the cached eigensystem of H^H H.
inline CMat first_hop_wiener(const ChannelRealization& ch, double rho) {
  const RVec& lh = ch.eig_h.values;
  const int ns = static_cast<int>(lh.size());
  RVec shifted(ns);
  for (int i = 0; i < ns; ++i) shifted(i) = lh(i) + 1.0 / rho;
  require_invertible(shifted(ns - 1), shifted(0));
  return ch.eig_h.vectors * shifted.cwiseInverse().asDiagonal() *
         ch.eig_h.vectors.adjoint() * ch.h.adjoint();
}

inline RVec ry_eigenvalues(const RVec& lh, double rho, int m) {
  RVec ly(m);
  for (int k = 0; k < m; ++k) {
    ly(k) = rho * rho * lh(k) / (1.0 + rho * lh(k));
  }
  return ly;
}

inline double power_used(const CMat& q, const CMat& h, double rho) {
  const int nr = static_cast<int>(q.rows());
  const CMat x = q * (rho * (h * h.adjoint()) +
                      CMat::Identity(nr, nr)) * q.adjoint();
  return x.real().trace();
}

}  // namespace detail

// Error covariance decomposition for any relay factor B in Q = B L:
// (H^H H + I/rho)^{-1} + U~_h (U~_h^H B^H G^H G B U~_h + L~_y^{-1})^{-1} U~_h^H.
// b is N_R x N_S, or N_R x M extended with zero columns.
inline CMat mmse_ecd_covariance(const ChannelRealization& ch,
                                const PowerBudget& pw, const SystemDims& dims,
                                const CMat& b) {
  const int ns = dims.n_s;
  const int m = dims.m();
  if (b.rows() != dims.n_r || (b.cols() != ns && b.cols() != m)) {
    throw InvalidDims("ecd factor must be N_R x N_S (or N_R x M)");
  }
  CMat bx = b;
  if (b.cols() != ns) {
    bx = CMat::Zero(dims.n_r, ns);
    bx.leftCols(m) = b;
  }
  const double rho = pw.rho;
  const RVec& lh = ch.eig_h.values;
  const CMat uh = ch.eig_h.vectors.leftCols(m);
  const RVec ly = detail::ry_eigenvalues(lh, rho, m);
  require_invertible(ly(m - 1), ly(0));

  const CMat gbu = ch.g * bx * uh;
  CMat inner = hermitize(gbu.adjoint() * gbu);
  inner += CMat(ly.cwiseInverse().asDiagonal());

  RVec shifted(ns);
  for (int i = 0; i < ns; ++i) shifted(i) = lh(i) + 1.0 / rho;
  const CMat first = ch.eig_h.vectors * shifted.cwiseInverse().asDiagonal() *
                     ch.eig_h.vectors.adjoint();
  return hermitize(first + uh * inv_hpd(inner) * uh.adjoint());
}

// Joint MMSE transceiver: first-hop Wiener receiver, waterfilling over the
// paired eigenmodes of R_y and G^H G (active set is a prefix because the
// gain products descend), then the destination Wiener filter.
// The stored r_e is the direct form (I/rho + F^H R_n^{-1} F)^{-1}.
inline RelayDesign design_mmse_relay(const ChannelRealization& ch,
                                     const PowerBudget& pw,
                                     const SystemDims& dims) {
  const int ns = dims.n_s;
  const int nr = dims.n_r;
  const int m = dims.m();
  const double rho = pw.rho;

  const CMat l = detail::first_hop_wiener(ch, rho);
  const RVec ly = detail::ry_eigenvalues(ch.eig_h.values, rho, m);
  const RVec& lg = ch.eig_g.values;

  // waterfilling: |phi_k|^2 = (ly lg)_k^{-1} (nu sqrt((ly lg)_k) - 1)^+,
  // full power used; streams with lambda_g = 0 stay silent.
  int active_max = 0;
  while (active_max < m && lg(active_max) > 0.0) ++active_max;
  RVec phi2 = RVec::Zero(m);
  for (int j = active_max; j >= 1; --j) {
    double inv_g = 0.0;
    double root = 0.0;
    for (int k = 0; k < j; ++k) {
      inv_g += 1.0 / lg(k);
      root += std::sqrt(ly(k) / lg(k));
    }
    const double nu = (pw.p_r + inv_g) / root;
    if (nu * std::sqrt(ly(j - 1) * lg(j - 1)) > 1.0) {
      for (int k = 0; k < j; ++k) {
        const double prod = ly(k) * lg(k);
        phi2(k) = (nu * std::sqrt(prod) - 1.0) / prod;
      }
      break;
    }
  }

  const CMat b = ch.eig_g.vectors.leftCols(m) *
                 phi2.cwiseSqrt().asDiagonal() *
                 ch.eig_h.vectors.leftCols(m).adjoint();

  RelayDesign d;
  d.scheme = Scheme::MmseTx;
  d.b = b;
  d.q = b * l;
  const CMat f = ch.g * d.q * ch.h;
  const NoiseWhitening nw = noise_whitening(ch.g, d.q);
  const detail::HpdFactors rn(nw.r_n);
  const CMat rn_inv = rn.inverse();
  d.r_e = inv_hpd(hermitize(CMat::Identity(ns, ns) / rho +
                            f.adjoint() * rn_inv * f));
  d.w = rho * f.adjoint() *
        detail::HpdFactors(hermitize(rho * (f * f.adjoint()) + nw.r_n))
            .inverse();
  d.tau.resize(ns);
  for (int k = 0; k < ns; ++k) {
    d.tau(k) = rho / d.r_e(k, k).real() - 1.0;
  }
  return d;
}

// ZF transceiver (requires N_S <= min(N_R, N_D)): first-hop ZF receiver,
// closed-form allocation |phi_k|^2 = sqrt(mu / (lambda_z lambda_g)), and the
// whitened zero-forcing equalizer satisfying W R_n^{-1/2} G Q H = I.
// The stored r_e is (H^H H)^{-1} + (B^H G^H G B)^{-1}.
inline RelayDesign design_zf_relay(const ChannelRealization& ch,
                                   const PowerBudget& pw,
                                   const SystemDims& dims,
                                   ZfPairing pairing =
                                       ZfPairing::DescendingGains) {
  const int ns = dims.n_s;
  if (!dims.zf_defined()) {
    throw InvalidDims("ZF transceiver requires N_S <= min(N_R, N_D)");
  }
  const double rho = pw.rho;
  const RVec& lh = ch.eig_h.values;
  const RVec& lg = ch.eig_g.values;
  require_invertible(lh(ns - 1), lh(0));
  require_invertible(lg(ns - 1), lg(0));

  const CMat lz_rx = ch.eig_h.vectors * lh.cwiseInverse().asDiagonal() *
                     ch.eig_h.vectors.adjoint() * ch.h.adjoint();

  // lambda_z per U_h column is rho + 1/lambda_{h,k}, ascending in k;
  // descending order means reversed columns.
  CMat v(ns, ns);
  RVec lz(ns);
  for (int k = 0; k < ns; ++k) {
    const int col = pairing == ZfPairing::DescendingGains ? ns - 1 - k : k;
    v.col(k) = ch.eig_h.vectors.col(col);
    lz(k) = rho + 1.0 / lh(col);
  }

  double denom = 0.0;
  for (int k = 0; k < ns; ++k) denom += std::sqrt(lz(k) / lg(k));
  const double sqrt_mu = pw.p_r / denom;
  RVec phi2(ns);
  for (int k = 0; k < ns; ++k) phi2(k) = sqrt_mu / std::sqrt(lz(k) * lg(k));

  const CMat b = ch.eig_g.vectors.leftCols(ns) *
                 phi2.cwiseSqrt().asDiagonal() * v.adjoint();

  RelayDesign d;
  d.scheme = Scheme::ZfTx;
  d.b = b;
  d.q = b * lz_rx;

  // (B^H G^H G B)^{-1} = V diag(1 / (phi_k^2 lambda_{g,k})) V^H
  RVec hop2(ns);
  for (int k = 0; k < ns; ++k) hop2(k) = phi2(k) * lg(k);
  require_invertible(hop2.minCoeff(), hop2.maxCoeff());
  const CMat hh_inv = ch.eig_h.vectors * lh.cwiseInverse().asDiagonal() *
                      ch.eig_h.vectors.adjoint();
  d.r_e = hermitize(hh_inv + v * hop2.cwiseInverse().asDiagonal() *
                                 v.adjoint());

  const CMat f = ch.g * d.q * ch.h;
  const NoiseWhitening nw = noise_whitening(ch.g, d.q);
  const detail::HpdFactors rn(nw.r_n);
  const CMat rn_inv = rn.inverse();
  d.w = inv_hpd(hermitize(f.adjoint() * rn_inv * f)) * f.adjoint() *
        rn.inverse_sqrt();
  d.tau.resize(ns);
  for (int k = 0; k < ns; ++k) {
    d.tau(k) = rho / d.r_e(k, k).real();
  }
  return d;
}

// Naive isotropic relay Q = delta * I with exact (not asymptotic) destination
// covariances. VariableGain sets delta^2 = p_r / Tr(rho H H^H + I); FixedGain
// uses the supplied constant.
inline RelayDesign design_naive_relay(const ChannelRealization& ch,
                                      const PowerBudget& pw,
                                      const SystemDims& dims,
                                      NaiveGain gain, Scheme equalizer,
                                      double fixed_c = 1.0) {
  if (equalizer != Scheme::NaiveMmse && equalizer != Scheme::NaiveZf) {
    throw InvalidDims("naive design requires a naive equalizer scheme");
  }
  const int ns = dims.n_s;
  const int nr = dims.n_r;
  if (equalizer == Scheme::NaiveZf && !dims.zf_defined()) {
    throw InvalidDims("naive ZF requires N_S <= min(N_R, N_D)");
  }
  const double rho = pw.rho;
  double delta2;
  if (gain == NaiveGain::VariableGain) {
    const double tr =
        rho * ch.h.squaredNorm() + static_cast<double>(nr);
    delta2 = pw.p_r / tr;
  } else {
    delta2 = fixed_c * fixed_c;
  }

  RelayDesign d;
  d.scheme = equalizer;
  d.q = std::sqrt(delta2) * CMat::Identity(nr, nr);
  const CMat f = ch.g * d.q * ch.h;
  const NoiseWhitening nw = noise_whitening(ch.g, d.q);
  const detail::HpdFactors rn(nw.r_n);
  const CMat rn_inv = rn.inverse();
  const CMat x = hermitize(f.adjoint() * rn_inv * f);
  d.tau.resize(ns);
  if (equalizer == Scheme::NaiveMmse) {
    d.r_e = inv_hpd(hermitize(CMat::Identity(ns, ns) / rho + x));
    d.w = rho * f.adjoint() *
          detail::HpdFactors(hermitize(rho * (f * f.adjoint()) + nw.r_n))
              .inverse();
    for (int k = 0; k < ns; ++k) d.tau(k) = rho / d.r_e(k, k).real() - 1.0;
  } else {
    d.r_e = inv_hpd(x);
    d.w = d.r_e * f.adjoint() * rn.inverse_sqrt();
    for (int k = 0; k < ns; ++k) d.tau(k) = rho / d.r_e(k, k).real();
  }
  return d;
}

// High-SNR approximate naive error covariance (c H^H G^H G H + I/rho)^{-1};
// kept behind this separate entry point for asymptotic studies only.
inline CMat naive_asymptotic_covariance(const ChannelRealization& ch,
                                        const PowerBudget& pw, double c) {
  const int ns = static_cast<int>(ch.h.cols());
  const CMat gh = ch.g * ch.h;
  return inv_hpd(hermitize(c * (gh.adjoint() * gh) +
                           CMat::Identity(ns, ns) / pw.rho));
}

// MI-optimal relaying lower bound: Q = U~_g sqrt(rho) (I + rho L~_h)^{-1/2}
// V~_h^H with V~_h the first M left singular vectors of H. Evaluated by MI
// only; mi is the exact log-det, mi_closed_form the per-mode product bound
// (equal up to roundoff for this construction).
inline RelayDesign optimal_mi_lower_bound(const ChannelRealization& ch,
                                          const PowerBudget& pw,
                                          const SystemDims& dims) {
  const int ns = dims.n_s;
  const int m = dims.m();
  const double rho = pw.rho;
  const RVec& lh = ch.eig_h.values;
  const RVec& lg = ch.eig_g.values;

  Eigen::JacobiSVD<CMat> svd(ch.h, Eigen::ComputeThinU);
  const CMat vh = svd.matrixU().leftCols(m);
  RVec x(m);
  for (int k = 0; k < m; ++k) {
    x(k) = std::sqrt(rho / (1.0 + rho * lh(k)));
  }

  RelayDesign d;
  d.scheme = Scheme::OptimalLb;
  d.q = ch.eig_g.vectors.leftCols(m) * x.asDiagonal() * vh.adjoint();

  const CMat f = ch.g * d.q * ch.h;
  const NoiseWhitening nw = noise_whitening(ch.g, d.q);
  const CMat rn_inv = detail::HpdFactors(nw.r_n).inverse();
  const CMat a = hermitize(rho * (f.adjoint() * rn_inv * f) +
                           CMat::Identity(ns, ns));
  d.mi = 0.5 * detail::HpdFactors(a).log2_det();

  double closed = 0.0;
  for (int k = 0; k < m; ++k) {
    const double num = (1.0 + rho * lh(k)) * (1.0 + rho * lg(k));
    const double den = 1.0 + rho * lh(k) + rho * lg(k);
    closed += std::log2(num / den);
  }
  d.mi_closed_form = 0.5 * closed;
  return d;
}

// Relay power actually spent by a design: Tr(Q (rho H H^H + I) Q^H).
inline double relay_power_used(const RelayDesign& d,
                               const ChannelRealization& ch, double rho) {
  return detail::power_used(d.q, ch.h, rho);
}

}  // namespace relaylab
