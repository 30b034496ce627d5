#pragma once
// Command-line front end: strict JSON config loading, simulation runs with
// manifest emission, analytic DMT/DRT tables, slope-vs-theory reports, and
// the invariant verification battery.
//
// Exit codes: 0 success, 1 verification/comparison failure, 2 config or
// argument error, 3 invalid dimensions, 4 insufficient data.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relaylab/asymptotics.hpp"
#include "relaylab/channel.hpp"
#include "relaylab/errors.hpp"
#include "relaylab/montecarlo.hpp"
#include "relaylab/transceiver.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace relaylab {
namespace cli {

constexpr const char* kToolVersion = "1.0.0";

// --- config loading ---------------------------------------------------------

inline Scheme scheme_from_name(const std::string& s) {
  if (s == "mmse_tx") return Scheme::MmseTx;
  if (s == "zf_tx") return Scheme::ZfTx;
  if (s == "naive_mmse") return Scheme::NaiveMmse;
  if (s == "naive_zf") return Scheme::NaiveZf;
  if (s == "optimal_lb") return Scheme::OptimalLb;
  throw ConfigError("field 'scheme': unknown value '" + s +
                    "' (expected mmse_tx|zf_tx|naive_mmse|naive_zf|optimal_lb)");
}

inline Encoding encoding_from_name(const std::string& s) {
  if (s == "joint") return Encoding::Joint;
  if (s == "separate") return Encoding::Separate;
  if (s == "mi_only") return Encoding::MiOnly;
  throw ConfigError("field 'encoding': unknown value '" + s +
                    "' (expected joint|separate|mi_only)");
}

// Strict schema: required dims/scheme/encoding/rate_policy, defaults for the
// rest, unknown fields rejected so typos surface as exit-2 diagnostics.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  static const std::vector<std::string> known = {
      "dims",        "scheme",           "encoding", "rate_policy",
      "snr_grid_db", "trials_per_point", "master_seed", "naive"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == it.key();
    if (!ok) throw ConfigError("unknown config field '" + it.key() + "'");
  }
  for (const char* req : {"dims", "scheme", "encoding", "rate_policy"}) {
    if (!j.contains(req)) {
      throw ConfigError(std::string("missing required config field '") + req +
                        "'");
    }
  }

  const auto& jd = j.at("dims");
  if (!jd.is_array() || jd.size() != 3) {
    throw ConfigError("field 'dims': expected an array [N_S, N_R, N_D]");
  }
  for (const auto& v : jd) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw InvalidDims("field 'dims': antenna counts must be integers >= 1");
    }
  }
  ExperimentConfig cfg{SystemDims(jd.at(0).get<int>(), jd.at(1).get<int>(),
                                  jd.at(2).get<int>())};

  cfg.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  cfg.encoding = encoding_from_name(j.at("encoding").get<std::string>());

  const auto& rp = j.at("rate_policy");
  if (!rp.is_object() || !rp.contains("kind")) {
    throw ConfigError("field 'rate_policy': expected {kind, bits|r}");
  }
  const std::string kind = rp.at("kind").get<std::string>();
  if (kind == "fixed_rate") {
    if (!rp.contains("bits")) {
      throw ConfigError("field 'rate_policy': fixed_rate requires 'bits'");
    }
    cfg.rate_policy.kind = RatePolicy::Kind::FixedRate;
    cfg.rate_policy.value = rp.at("bits").get<double>();
  } else if (kind == "multiplexing") {
    if (!rp.contains("r")) {
      throw ConfigError("field 'rate_policy': multiplexing requires 'r'");
    }
    cfg.rate_policy.kind = RatePolicy::Kind::Multiplexing;
    cfg.rate_policy.value = rp.at("r").get<double>();
  } else {
    throw ConfigError("field 'rate_policy.kind': expected fixed_rate or "
                      "multiplexing, got '" + kind + "'");
  }

  if (j.contains("snr_grid_db")) {
    cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
  } else {
    cfg.snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
  }
  cfg.trials_per_point =
      j.contains("trials_per_point")
          ? j.at("trials_per_point").get<std::uint64_t>()
          : 10000ULL;
  cfg.master_seed =
      j.contains("master_seed") ? j.at("master_seed").get<std::uint64_t>()
                                : 0ULL;

  if (j.contains("naive")) {
    const auto& nv = j.at("naive");
    const std::string gain = nv.at("gain").get<std::string>();
    if (gain == "variable") {
      cfg.naive_gain = NaiveGain::VariableGain;
    } else if (gain == "fixed") {
      cfg.naive_gain = NaiveGain::FixedGain;
      cfg.fixed_gain_c = nv.at("c").get<double>();
    } else {
      throw ConfigError("field 'naive.gain': expected variable or fixed");
    }
  }

  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

// --- small arg helpers ------------------------------------------------------

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw ConfigError("malformed grid entry '" + tok + "'");
    }
    if (pos != tok.size()) {
      throw ConfigError("malformed grid entry '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty grid");
  return out;
}

inline SystemDims parse_dims(const std::string& s) {
  const std::vector<double> v = parse_grid(s);
  if (v.size() != 3) throw ConfigError("dims must be three integers A,B,C");
  for (double x : v) {
    if (x != static_cast<int>(x)) {
      throw ConfigError("dims must be integers");
    }
  }
  return SystemDims(static_cast<int>(v[0]), static_cast<int>(v[1]),
                    static_cast<int>(v[2]));
}

inline std::string utc_now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- simulate ---------------------------------------------------------------

inline int cmd_simulate(const std::string& config_path, int workers,
                        std::optional<std::uint64_t> seed_override,
                        const std::string& out_dir) {
  ExperimentConfig cfg = load_config_file(config_path);
  if (seed_override) cfg.master_seed = *seed_override;

  const OutageCurve curve = run_outage_experiment(cfg, workers);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string stem = fs::path(config_path).stem().string();
  const fs::path csv_path = fs::path(out_dir) / (stem + ".csv");
  const fs::path json_path = fs::path(out_dir) / (stem + ".json");
  const fs::path manifest_path = fs::path(out_dir) / (stem + ".manifest.json");

  {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + csv_path.string());
    write_curve_csv(curve, os);
  }
  {
    std::ofstream os(json_path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + json_path.string());
    os << curve_to_json(curve).dump(2) << "\n";
  }
  {
    nlohmann::json manifest;
    manifest["config_digest"] = config_digest(cfg);
    manifest["tool_version"] = kToolVersion;
    manifest["created_utc"] = utc_now_iso8601();
    manifest["outputs"] = {csv_path.string(), json_path.string()};
    std::ofstream os(manifest_path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + manifest_path.string());
    os << manifest.dump(2) << "\n";
  }
  std::cout << "wrote " << csv_path.string() << " " << json_path.string()
            << " " << manifest_path.string() << "\n";
  return 0;
}

// --- dmt / drt tables -------------------------------------------------------

inline int cmd_dmt(const std::string& dims_arg, const std::string& scheme,
                   const std::string& grid_arg, std::ostream& os) {
  const SystemDims dims = parse_dims(dims_arg);
  const std::vector<double> grid = parse_grid(grid_arg);

  enum class Kind { Optimal, Zf, Mmse, Naive } kind;
  if (scheme == "optimal") {
    kind = Kind::Optimal;
  } else if (scheme == "zf_tx" || scheme == "linear_tx") {
    kind = Kind::Zf;
  } else if (scheme == "mmse_tx") {
    kind = Kind::Mmse;
  } else if (scheme == "naive") {
    kind = Kind::Naive;
  } else {
    throw ConfigError("unknown dmt scheme '" + scheme +
                      "' (expected optimal|zf_tx|mmse_tx|naive)");
  }
  if (kind == Kind::Mmse) {
    os << "# mmse_tx d(0) is the r->0+ limit; the exact zero-multiplexing "
          "diversity follows the fixed-rate tradeoff (see drt)\n";
  }
  os << "r,d_" << scheme << ",d_optimal\n";
  char line[128];
  for (double r : grid) {
    double d;
    switch (kind) {
      case Kind::Optimal: d = dmt_optimal(dims, r); break;
      case Kind::Zf: d = dmt_linear_tx(dims, r, LinearTxKind::Zf).value; break;
      case Kind::Mmse:
        d = dmt_linear_tx(dims, r, LinearTxKind::Mmse).value;
        break;
      case Kind::Naive: d = dmt_naive(dims, r); break;
      default: d = 0.0; break;
    }
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g\n", r, d,
                  dmt_optimal(dims, r));
    os << line;
  }
  return 0;
}

inline int cmd_drt(const std::string& dims_arg, const std::string& scheme,
                   const std::string& grid_arg, std::ostream& os) {
  const SystemDims dims = parse_dims(dims_arg);
  const std::vector<double> grid = parse_grid(grid_arg);
  const bool naive = scheme == "naive_mmse";
  if (!naive && scheme != "mmse_tx") {
    throw ConfigError("unknown drt scheme '" + scheme +
                      "' (expected mmse_tx|naive_mmse)");
  }
  os << "rate,lower,upper,jump\n";
  char line[160];
  for (double rate : grid) {
    const DrtBounds b =
        naive ? drt_naive(dims, rate) : drt_mmse_tx(dims, rate);
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%d\n", rate, b.lower,
                  b.upper, b.lower != b.upper ? 1 : 0);
    os << line;
  }
  return 0;
}

// --- slope ------------------------------------------------------------------

struct TheoryBlock {
  bool bounds = false;
  double lo = 0.0;
  double hi = 0.0;
  std::string kind;
  bool valid_at_r0 = true;
};

// Fixed-rate MMSE-family schemes are judged against the rate tradeoff bounds,
// not the multiplexing tradeoff value, whose r=0 point is a right-limit.
inline TheoryBlock slope_theory(const SystemDims& dims, Scheme scheme,
                                const RatePolicy& rp) {
  TheoryBlock t;
  if (rp.kind == RatePolicy::Kind::Multiplexing) {
    const double r = rp.value;
    switch (scheme) {
      case Scheme::MmseTx: {
        const LinearTxDmt v = dmt_linear_tx(dims, r, LinearTxKind::Mmse);
        t = {false, v.value, v.value, "dmt_linear_tx(mmse)", v.valid_at_r0};
        break;
      }
      case Scheme::ZfTx: {
        const LinearTxDmt v = dmt_linear_tx(dims, r, LinearTxKind::Zf);
        t = {false, v.value, v.value, "dmt_linear_tx(zf)", v.valid_at_r0};
        break;
      }
      case Scheme::NaiveMmse:
      case Scheme::NaiveZf: {
        const double v = dmt_naive(dims, r);
        t = {false, v, v, "dmt_naive", true};
        break;
      }
      case Scheme::OptimalLb: {
        const double v = dmt_optimal(dims, r);
        t = {false, v, v, "dmt_optimal", true};
        break;
      }
    }
  } else {
    switch (scheme) {
      case Scheme::MmseTx: {
        const DrtBounds b = drt_mmse_tx(dims, rp.value);
        t = {true, b.lower, b.upper, "drt_mmse_tx", true};
        break;
      }
      case Scheme::NaiveMmse: {
        const DrtBounds b = drt_naive(dims, rp.value);
        t = {true, b.lower, b.upper, "drt_naive", true};
        break;
      }
      case Scheme::ZfTx: {
        const double v = dmt_linear_tx(dims, 0.0, LinearTxKind::Zf).value;
        t = {false, v, v, "dmt_linear_tx(zf) at r=0", true};
        break;
      }
      case Scheme::NaiveZf: {
        const double v = dmt_naive(dims, 0.0);
        t = {false, v, v, "dmt_naive at r=0", true};
        break;
      }
      case Scheme::OptimalLb: {
        const double v = dmt_optimal(dims, 0.0);
        t = {false, v, v, "dmt_optimal at r=0", true};
        break;
      }
    }
  }
  return t;
}

inline int cmd_slope(const std::string& csv_path, const SystemDims& dims,
                     Scheme scheme, const RatePolicy& rp, double tol,
                     std::uint64_t min_count, std::ostream& os) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open curve CSV: " + csv_path);
  const OutageCurve curve = parse_curve_csv(in);

  // The companion JSON report embeds the config the curve was generated
  // from; when present its dims must match the theory block.
  bool dims_verified = false;
  namespace fs = std::filesystem;
  fs::path companion = fs::path(csv_path);
  companion.replace_extension(".json");
  if (fs::exists(companion)) {
    std::ifstream cj(companion);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(cj);
      const auto jd = j.at("config").at("dims");
      const SystemDims cd(jd.at(0).get<int>(), jd.at(1).get<int>(),
                          jd.at(2).get<int>());
      if (cd.n_s != dims.n_s || cd.n_r != dims.n_r || cd.n_d != dims.n_d) {
        throw ConfigError(
            "theory dims disagree with the curve's embedded config dims");
      }
      dims_verified = true;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("companion report unreadable: ") +
                        e.what());
    }
  }

  const SlopeFit fit = fit_diversity_slope(curve, min_count);
  const TheoryBlock theory = slope_theory(dims, scheme, rp);
  const bool pass = theory.bounds
                        ? fit.slope >= theory.lo - tol &&
                              fit.slope <= theory.hi + tol
                        : std::abs(fit.slope - theory.lo) <= tol;

  nlohmann::json report;
  report["csv"] = csv_path;
  report["fit"] = {{"slope", fit.slope},
                   {"stderr", fit.stderr_slope},
                   {"intercept", fit.intercept},
                   {"window_begin", fit.window_begin},
                   {"window_end", fit.window_end},
                   {"points_used", fit.window_end - fit.window_begin}};
  report["theory"] = {{"kind", theory.kind},
                      {"lower", theory.lo},
                      {"upper", theory.hi},
                      {"bounds", theory.bounds},
                      {"valid_at_r0", theory.valid_at_r0}};
  report["tolerance"] = tol;
  report["dims_verified"] = dims_verified;
  report["pass"] = pass;
  os << report.dump(2) << "\n";
  return pass ? 0 : 1;
}

// --- verification battery ---------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CMat direct_mmse_covariance(const ChannelRealization& ch,
                                   const PowerBudget& pw, const CMat& q) {
  const int ns = static_cast<int>(ch.h.cols());
  const CMat f = ch.g * q * ch.h;
  const NoiseWhitening nw = noise_whitening(ch.g, q);
  const CMat rn_inv = relaylab::detail::HpdFactors(nw.r_n).inverse();
  return inv_hpd(hermitize(CMat::Identity(ns, ns) / pw.rho +
                           f.adjoint() * rn_inv * f));
}

inline double min_eigenvalue(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a),
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct ScalarChainPoint {
  double snr_db = 0.0;
  double p_engine = 0.0;
  double p_scalar = 0.0;
  double z = 0.0;  // |difference| in joint standard errors
};

// Scalar end-to-end simulator written directly from
// y = g q h x + g q n_r + n_d with the single-stream relay gain; no matrix
// machinery shared with the transceiver module.
inline double scalar_chain_outage(double rho, double rate,
                                  std::uint64_t seed, std::uint64_t point,
                                  std::uint64_t trials) {
  std::uint64_t outages = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    SeededRng rng(seed, point * trials + t);
    const std::complex<double> h = rng.next_cn();
    const std::complex<double> g = rng.next_cn();
    const double ah = std::norm(h);
    const double ly = rho * rho * ah / (1.0 + rho * ah);
    double tau = 0.0;
    if (ly > 0.0) {
      const std::complex<double> l = std::conj(h) / (ah + 1.0 / rho);
      const std::complex<double> q = std::sqrt(rho / ly) * l;  // p_r = rho
      const std::complex<double> gq = g * q;
      tau = rho * std::norm(gq * h) / (std::norm(gq) + 1.0);
    }
    if (0.5 * std::log2(1.0 + tau) < rate) ++outages;
  }
  return static_cast<double>(outages) / static_cast<double>(trials);
}

inline std::vector<ScalarChainPoint> scalar_chain_compare(
    std::uint64_t engine_seed, std::uint64_t scalar_seed,
    std::uint64_t trials, int workers) {
  ExperimentConfig cfg{SystemDims(1, 1, 1)};
  cfg.scheme = Scheme::MmseTx;
  cfg.encoding = Encoding::Joint;
  cfg.rate_policy = {RatePolicy::Kind::FixedRate, 1.0};
  cfg.snr_grid_db = {0.0, 10.0, 20.0};
  cfg.trials_per_point = trials;
  cfg.master_seed = engine_seed;
  const OutageCurve curve = run_outage_experiment(cfg, workers);

  std::vector<ScalarChainPoint> out;
  for (std::size_t p = 0; p < curve.points.size(); ++p) {
    const OutagePoint& pt = curve.points[p];
    ScalarChainPoint s;
    s.snr_db = pt.snr_db;
    s.p_engine = pt.p_hat;
    s.p_scalar =
        scalar_chain_outage(pt.rho, pt.rate_bits, scalar_seed, p, trials);
    const double n = static_cast<double>(trials);
    const double var = s.p_engine * (1.0 - s.p_engine) / n +
                       s.p_scalar * (1.0 - s.p_scalar) / n;
    s.z = var > 0.0 ? std::abs(s.p_engine - s.p_scalar) / std::sqrt(var)
                    : (s.p_engine == s.p_scalar ? 0.0 : 1e30);
    out.push_back(s);
  }
  return out;
}

}  // namespace detail

// Invariant battery shared by `verify` and the acceptance checks. fast: 50
// draws per configuration and oracle dims <= 4; full: 200 draws, oracle
// dims <= 5, plus the scalar-chain Monte Carlo oracle.
inline std::vector<CheckResult> run_verification(bool full,
                                                 std::uint64_t seed,
                                                 int workers) {
  std::vector<CheckResult> results;
  const int draws = full ? 200 : 50;
  const std::vector<SystemDims> configs = {
      {2, 2, 2}, {2, 4, 2}, {3, 3, 2}, {4, 3, 3}, {3, 2, 3}};
  const double rhos[3] = {1.0, 1e2, 1e4};

  double ecd_opt = 0.0, ecd_rand = 0.0;
  double ry_viol = 0.0, rz_lo_viol = 0.0, rz_hi_viol = 0.0;
  double pow_mmse = 0.0, pow_zf = 0.0;
  std::uint64_t stream = 0;
  for (const SystemDims& dims : configs) {
    for (const double rho : rhos) {
      const PowerBudget pw = PowerBudget::standard(rho, dims);
      for (int d = 0; d < draws; ++d) {
        SeededRng rng(seed, stream++);
        const ChannelRealization ch = sample_realization(dims, rng);

        const RelayDesign mm = design_mmse_relay(ch, pw, dims);
        const CMat ecd = mmse_ecd_covariance(ch, pw, dims, mm.b);
        ecd_opt = std::max(ecd_opt, (mm.r_e - ecd).norm() / mm.r_e.norm());

        const CMat rb = sample_channel(dims.n_r, dims.n_s, rng);
        const CMat q_rb =
            rb * relaylab::detail::first_hop_wiener(ch, rho);
        const CMat dir = detail::direct_mmse_covariance(ch, pw, q_rb);
        const CMat ecd_r = mmse_ecd_covariance(ch, pw, dims, rb);
        ecd_rand = std::max(ecd_rand, (dir - ecd_r).norm() / dir.norm());

        const CMat l = relaylab::detail::first_hop_wiener(ch, rho);
        const CMat cov = rho * (ch.h * ch.h.adjoint()) +
                         CMat::Identity(dims.n_r, dims.n_r);
        const CMat ry = l * cov * l.adjoint();
        const CMat ry_gap =
            rho * CMat::Identity(dims.n_s, dims.n_s) - ry;
        ry_viol = std::max(ry_viol,
                           -detail::min_eigenvalue(ry_gap) / rho);

        pow_mmse = std::max(
            pow_mmse,
            std::abs(relay_power_used(mm, ch, rho) - pw.p_r) / pw.p_r);

        if (dims.zf_defined()) {
          const RelayDesign zf = design_zf_relay(ch, pw, dims);
          pow_zf = std::max(
              pow_zf,
              std::abs(relay_power_used(zf, ch, rho) - pw.p_r) / pw.p_r);

          const CMat hhi = inv_hpd(gram(ch.h));
          const CMat lz = hhi * ch.h.adjoint();
          const CMat rz = lz * cov * lz.adjoint();
          const CMat eye = CMat::Identity(dims.n_s, dims.n_s);
          rz_lo_viol = std::max(
              rz_lo_viol,
              -detail::min_eigenvalue(rz - rho * eye) / rho);
          const double top =
              rho + 1.0 / ch.eig_h.values(dims.n_s - 1);
          rz_hi_viol = std::max(
              rz_hi_viol, -detail::min_eigenvalue(top * eye - rz) / top);
        }
      }
    }
  }

  auto push = [&results](const std::string& name, bool pass,
                         const std::string& detail) {
    results.push_back({name, pass, detail});
  };
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max rel gap %.3e (tol 1e-8)", ecd_opt);
  push("ecd_identity_at_design", ecd_opt <= 1e-8, buf);
  std::snprintf(buf, sizeof(buf), "max rel gap %.3e (tol 1e-8)", ecd_rand);
  push("ecd_identity_arbitrary_b", ecd_rand <= 1e-8, buf);
  std::snprintf(buf, sizeof(buf), "worst normalized violation %.3e (tol 1e-10)",
                ry_viol);
  push("relay_wiener_output_below_rho", ry_viol <= 1e-10, buf);
  std::snprintf(buf, sizeof(buf), "worst normalized violation %.3e (tol 1e-10)",
                rz_lo_viol);
  push("zf_output_above_rho", rz_lo_viol <= 1e-10, buf);
  std::snprintf(buf, sizeof(buf), "worst normalized violation %.3e (tol 1e-10)",
                rz_hi_viol);
  push("zf_output_upper_sandwich", rz_hi_viol <= 1e-10, buf);
  std::snprintf(buf, sizeof(buf), "max rel error %.3e (tol 1e-6)", pow_mmse);
  push("relay_power_equality_mmse", pow_mmse <= 1e-6, buf);
  std::snprintf(buf, sizeof(buf), "max rel error %.3e (tol 1e-6)", pow_zf);
  push("relay_power_equality_zf", pow_zf <= 1e-6, buf);

  // Interference-free constraint W R_n^{-1/2} G Q H = I on ZF-capable dims.
  {
    double worst = 0.0;
    std::uint64_t s2 = 1ULL << 32;
    for (const SystemDims& dims :
         std::vector<SystemDims>{{2, 3, 2}, {2, 4, 2}}) {
      for (int d = 0; d < draws; ++d) {
        SeededRng rng(seed, s2++);
        const ChannelRealization ch = sample_realization(dims, rng);
        const PowerBudget pw = PowerBudget::standard(10.0, dims);
        const RelayDesign zf = design_zf_relay(ch, pw, dims);
        const NoiseWhitening nw = noise_whitening(ch.g, zf.q);
        const CMat white = inv_sqrt_hpd(nw.r_n);
        const CMat resp = zf.w * white * ch.g * zf.q * ch.h;
        const CMat eye = CMat::Identity(dims.n_s, dims.n_s);
        worst = std::max(worst, (resp - eye).norm());
      }
    }
    std::snprintf(buf, sizeof(buf), "max deviation %.3e (tol 1e-8)", worst);
    push("zf_interference_free", worst <= 1e-8, buf);
  }

  // Exponent-infimum oracle vs the closed-form staircase.
  {
    const int cap = full ? 5 : 4;
    double worst = 0.0;
    for (int ns = 1; ns <= cap; ++ns) {
      for (int nr = 1; nr <= cap; ++nr) {
        for (int nd = 1; nd <= cap; ++nd) {
          const SystemDims dims(ns, nr, nd);
          for (int i = 1; i <= dims.n(); ++i) {
            const double oracle = drt_infimum_oracle(dims, i);
            const double closed = drt_naive_diversity_at_index(dims, i);
            worst = std::max(worst, std::abs(oracle - closed));
          }
        }
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "max |oracle - closed form| %.3e over dims <= %d (tol 1e-9)",
                  worst, cap);
    push("exponent_oracle_equality", worst <= 1e-9, buf);
  }

  if (full) {
    const auto pts =
        detail::scalar_chain_compare(seed, seed + 1000, 200000, workers);
    double worst_z = 0.0;
    for (const auto& p : pts) worst_z = std::max(worst_z, p.z);
    std::snprintf(buf, sizeof(buf),
                  "max |engine - scalar| %.2f joint standard errors (tol 3)",
                  worst_z);
    push("scalar_chain_oracle", worst_z <= 3.0, buf);
  }

  return results;
}

inline int cmd_verify(const std::string& level, std::uint64_t seed,
                      int workers, std::ostream& os) {
  if (level != "fast" && level != "full") {
    throw ConfigError("verify level must be fast or full");
  }
  const auto results = run_verification(level == "full", seed, workers);
  bool all = true;
  for (const auto& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail
       << "\n";
    all = all && r.pass;
  }
  os << (all ? "verification passed" : "verification FAILED") << "\n";
  return all ? 0 : 1;
}

// --- top-level argument wiring ----------------------------------------------

template <typename F>
inline int guarded(F&& f) {
  try {
    return f();
  } catch (const InvalidDims& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const OutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  CLI::App app{"linear amplify-and-forward relay transceiver experiments"};
  app.require_subcommand(1);

  unsigned hw = std::thread::hardware_concurrency();
  int workers = hw ? static_cast<int>(hw) : 1;
  std::uint64_t seed_value = 0;
  std::string out_dir = ".";
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the master seed");
  app.add_option("--workers", workers, "simulation worker threads");
  app.add_option("--out", out_dir, "output directory (default .)");

  auto* sim = app.add_subcommand(
      "simulate", "run an outage experiment from a JSON config");
  sim->fallthrough();
  std::string config_path;
  sim->add_option("config", config_path, "experiment config file")->required();

  auto* dmt = app.add_subcommand(
      "dmt", "diversity-multiplexing tradeoff table");
  dmt->fallthrough();
  std::string dmt_dims, dmt_scheme = "optimal", dmt_grid;
  dmt->add_option("--dims", dmt_dims, "N_S,N_R,N_D")->required();
  dmt->add_option("--scheme", dmt_scheme, "optimal|zf_tx|mmse_tx|naive");
  dmt->add_option("--r-grid", dmt_grid, "comma-separated multiplexing gains")
      ->required();

  auto* drt = app.add_subcommand("drt", "diversity-rate tradeoff table");
  drt->fallthrough();
  std::string drt_dims, drt_scheme, drt_grid;
  drt->add_option("--dims", drt_dims, "N_S,N_R,N_D")->required();
  drt->add_option("--scheme", drt_scheme, "mmse_tx|naive_mmse")->required();
  drt->add_option("--rate-grid", drt_grid, "comma-separated rates (bits)")
      ->required();

  auto* slope = app.add_subcommand(
      "slope", "fit a curve's diversity slope and compare against theory");
  slope->fallthrough();
  std::string slope_csv, th_dims, th_scheme;
  double th_rate = 0.0, th_r = 0.0, tol = 0.35;
  std::uint64_t min_count = 50;
  slope->add_option("csv", slope_csv, "curve CSV from simulate")->required();
  slope->add_option("--theory-dims", th_dims, "N_S,N_R,N_D")->required();
  slope->add_option("--theory-scheme", th_scheme,
                    "mmse_tx|zf_tx|naive_mmse|naive_zf|optimal_lb")
      ->required();
  auto* rate_opt = slope->add_option(
      "--theory-rate", th_rate, "fixed rate in bits (rate tradeoff theory)");
  auto* r_opt = slope->add_option(
      "--theory-r", th_r, "multiplexing gain (multiplexing tradeoff theory)");
  slope->add_option("--tol", tol, "pass tolerance on the slope");
  slope->add_option("--min-count", min_count,
                    "minimum outage events per admissible point");

  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  verify->fallthrough();
  std::string level = "fast";
  verify->add_option("--level", level, "fast|full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  return guarded([&]() -> int {
    if (sim->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return cmd_simulate(config_path, workers, seed, out_dir);
    }
    if (dmt->parsed()) {
      return cmd_dmt(dmt_dims, dmt_scheme, dmt_grid, std::cout);
    }
    if (drt->parsed()) {
      return cmd_drt(drt_dims, drt_scheme, drt_grid, std::cout);
    }
    if (slope->parsed()) {
      if ((rate_opt->count() > 0) == (r_opt->count() > 0)) {
        throw ConfigError(
            "provide exactly one of --theory-rate and --theory-r");
      }
      RatePolicy rp;
      if (rate_opt->count() > 0) {
        rp = {RatePolicy::Kind::FixedRate, th_rate};
      } else {
        rp = {RatePolicy::Kind::Multiplexing, th_r};
      }
      return cmd_slope(slope_csv, parse_dims(th_dims),
                       scheme_from_name(th_scheme), rp, tol, min_count,
                       std::cout);
    }
    if (verify->parsed()) {
      const std::uint64_t seed =
          seed_opt->count() > 0 ? seed_value : 0x5eedbeefULL;
      return cmd_verify(level, seed, workers, std::cout);
    }
    throw ConfigError("no subcommand given");
  });
}

}  // namespace cli
}  // namespace relaylab
