#pragma once
// Outage-probability estimation over an SNR grid: reproducible parallel
// trials keyed by (master_seed, point*trials + trial), Wilson confidence
// intervals, diversity-slope fitting, and CSV/JSON emission. Aggregation is
// order-independent integer summation, so results are bit-identical under
// any worker schedule.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "relaylab/asymptotics.hpp"
#include "relaylab/channel.hpp"
#include "relaylab/errors.hpp"
#include "relaylab/transceiver.hpp"

#include "json.hpp"

namespace relaylab {

enum class Encoding { Joint, Separate, MiOnly };

// FixedRate holds R in b/s/Hz; Multiplexing holds r with R(rho) = r log2 rho.
struct RatePolicy {
  enum class Kind { FixedRate, Multiplexing };
  Kind kind = Kind::FixedRate;
  double value = 1.0;

  double rate_at(double rho) const {
    return kind == Kind::FixedRate ? value : value * std::log2(rho);
  }
};

struct ExperimentConfig {
  SystemDims dims;
  Scheme scheme = Scheme::MmseTx;
  Encoding encoding = Encoding::Joint;
  RatePolicy rate_policy;
  std::vector<double> snr_grid_db;  // rho * N_S in dB
  std::uint64_t trials_per_point = 10000;
  std::uint64_t master_seed = 0;
  NaiveGain naive_gain = NaiveGain::VariableGain;
  double fixed_gain_c = 1.0;

  void validate() const {
    if (trials_per_point < 1) throw ConfigError("trials_per_point must be >= 1");
    if (snr_grid_db.empty()) throw ConfigError("snr_grid_db must be nonempty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i) {
      if (!(snr_grid_db[i] > snr_grid_db[i - 1])) {
        throw ConfigError("snr_grid_db must be strictly increasing");
      }
    }
    if (scheme == Scheme::OptimalLb && encoding != Encoding::MiOnly) {
      throw ConfigError(
          "joint/separate encoding requires a per-stream scheme");
    }
    if ((scheme == Scheme::ZfTx || scheme == Scheme::NaiveZf) &&
        !dims.zf_defined()) {
      throw InvalidDims("ZF schemes require N_S <= min(N_R, N_D)");
    }
    if (rate_policy.kind == RatePolicy::Kind::FixedRate &&
        rate_policy.value < 0.0) {
      throw ConfigError("fixed rate must be >= 0");
    }
  }
};

struct OutagePoint {
  double snr_db = 0.0;
  double rho = 0.0;
  double rate_bits = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t outages = 0;
  std::uint64_t discards = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct OutageCurve {
  ExperimentConfig config;
  std::vector<OutagePoint> points;
};

struct SlopeFit {
  double slope = 0.0;      // diversity estimate: decades of P per decade of rho
  double intercept = 0.0;  // of the log10 p vs log10 rho fit
  double stderr_slope = 0.0;
  int window_begin = 0;  // index range [begin, end) into curve.points
  int window_end = 0;
};

// 95% Wilson score interval; valid at small counts in deep-outage tails.
inline std::pair<double, double> wilson_interval(std::uint64_t successes,
                                                 std::uint64_t trials) {
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // At the boundary counts the score bound equals the endpoint exactly;
  // rounding residue from center - half must not leak past it.
  const double lo = successes == 0 ? 0.0 : center - half;
  const double hi = successes == trials ? 1.0 : center + half;
  return {lo > 0.0 ? lo : 0.0, hi < 1.0 ? hi : 1.0};
}

namespace detail {

inline RelayDesign build_design(const ExperimentConfig& cfg,
                                const ChannelRealization& ch,
                                const PowerBudget& pw) {
  switch (cfg.scheme) {
    case Scheme::MmseTx:
      return design_mmse_relay(ch, pw, cfg.dims);
    case Scheme::ZfTx:
      return design_zf_relay(ch, pw, cfg.dims);
    case Scheme::NaiveMmse:
      return design_naive_relay(ch, pw, cfg.dims, cfg.naive_gain,
                                Scheme::NaiveMmse, cfg.fixed_gain_c);
    case Scheme::NaiveZf:
      return design_naive_relay(ch, pw, cfg.dims, cfg.naive_gain,
                                Scheme::NaiveZf, cfg.fixed_gain_c);
    case Scheme::OptimalLb:
      return optimal_mi_lower_bound(ch, pw, cfg.dims);
  }
  throw ConfigError("unknown scheme");
}

inline bool outage_event(const ExperimentConfig& cfg, const RelayDesign& d,
                         double rate_bits) {
  switch (cfg.encoding) {
    case Encoding::Joint:
      return stream_mi_joint(d) < rate_bits;
    case Encoding::Separate: {
      const double per_stream = rate_bits / cfg.dims.n_s;
      for (int i = 0; i < d.tau.size(); ++i) {
        if (0.5 * std::log2(1.0 + d.tau(i)) < per_stream) return true;
      }
      return false;
    }
    case Encoding::MiOnly:
      return (d.scheme == Scheme::OptimalLb ? d.mi : stream_mi_joint(d)) <
             rate_bits;
  }
  return false;
}

// Primary stream for trial t of point p is p*trials + t (< 2^48 enforced).
// Resample attempt j reuses that base inside a reserved namespace: top bit
// set, retry depth in bits 48..62. Primary streams never set the top bit, so
// the namespaces are disjoint and retries stay deterministic per trial.
inline std::uint64_t retry_stream(std::uint64_t base, int attempt) {
  return (1ULL << 63) |
         (static_cast<std::uint64_t>(attempt - 1) << 48) | base;
}

struct TrialOutcome {
  bool outage = false;
  std::uint32_t discards = 0;
};

inline TrialOutcome run_trial(const ExperimentConfig& cfg,
                              const PowerBudget& pw, double rate_bits,
                              std::uint64_t base_stream) {
  TrialOutcome out;
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t stream =
        attempt == 0 ? base_stream : retry_stream(base_stream, attempt);
    SeededRng rng(cfg.master_seed, stream);
    try {
      const ChannelRealization ch = sample_realization(cfg.dims, rng);
      const RelayDesign d = build_design(cfg, ch, pw);
      out.outage = outage_event(cfg, d, rate_bits);
      return out;
    } catch (const SingularSystem&) {
      ++out.discards;
      if (attempt >= 1024) throw;
    }
  }
}

}  // namespace detail

// Runs trials_per_point draws per grid point; trial t of point p draws from
// stream p*trials + t regardless of scheduling. workers <= 1 runs inline.
inline OutageCurve run_outage_experiment(const ExperimentConfig& cfg,
                                         int workers = 1) {
  cfg.validate();
  const std::uint64_t trials = cfg.trials_per_point;
  const std::size_t n_points = cfg.snr_grid_db.size();
  if (n_points * trials >= (1ULL << 48)) {
    throw ConfigError("grid x trials exceeds the primary stream namespace");
  }

  OutageCurve curve;
  curve.config = cfg;
  curve.points.resize(n_points);

  std::vector<double> rho(n_points), rate(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    rho[p] = std::pow(10.0, cfg.snr_grid_db[p] / 10.0) / cfg.dims.n_s;
    rate[p] = cfg.rate_policy.rate_at(rho[p]);
  }

  const std::uint64_t chunk = 8192;
  const std::uint64_t chunks_per_point = (trials + chunk - 1) / chunk;
  const std::uint64_t total_chunks = chunks_per_point * n_points;
  std::vector<std::atomic<std::uint64_t>> outages(n_points);
  std::vector<std::atomic<std::uint64_t>> discards(n_points);
  for (auto& a : outages) a.store(0);
  for (auto& a : discards) a.store(0);
  std::atomic<std::uint64_t> next_chunk{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    for (;;) {
      const std::uint64_t c =
          next_chunk.fetch_add(1, std::memory_order_relaxed);
      if (c >= total_chunks || failed.load(std::memory_order_relaxed)) {
        return;
      }
      const std::size_t p = static_cast<std::size_t>(c / chunks_per_point);
      const std::uint64_t t0 = (c % chunks_per_point) * chunk;
      const std::uint64_t t1 = t0 + chunk < trials ? t0 + chunk : trials;
      const PowerBudget pw = PowerBudget::standard(rho[p], cfg.dims);
      std::uint64_t local_outages = 0;
      std::uint64_t local_discards = 0;
      try {
        for (std::uint64_t t = t0; t < t1; ++t) {
          const auto res =
              detail::run_trial(cfg, pw, rate[p], p * trials + t);
          local_outages += res.outage ? 1 : 0;
          local_discards += res.discards;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (!failure) failure = std::current_exception();
        return;
      }
      outages[p].fetch_add(local_outages, std::memory_order_relaxed);
      discards[p].fetch_add(local_discards, std::memory_order_relaxed);
    }
  };

  const int n_workers = workers > 1 ? workers : 1;
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) std::rethrow_exception(failure);

  for (std::size_t p = 0; p < n_points; ++p) {
    OutagePoint& pt = curve.points[p];
    pt.snr_db = cfg.snr_grid_db[p];
    pt.rho = rho[p];
    pt.rate_bits = rate[p];
    pt.trials = trials;
    pt.outages = outages[p].load();
    pt.discards = discards[p].load();
    pt.p_hat = static_cast<double>(pt.outages) / static_cast<double>(trials);
    const auto ci = wilson_interval(pt.outages, trials);
    pt.ci_low = ci.first;
    pt.ci_high = ci.second;
  }
  return curve;
}

// Least-squares fit of log10 p_hat against log10 rho over the highest-SNR
// contiguous run of points with outage_count >= min_count. Returned slope is
// the positive diversity estimate d = -fitted slope.
inline SlopeFit fit_diversity_slope(const OutageCurve& curve,
                                    std::uint64_t min_count = 50) {
  if (min_count < 1) min_count = 1;
  const auto& pts = curve.points;
  const int n = static_cast<int>(pts.size());
  int end = n;
  while (end > 0 && pts[end - 1].outages < min_count) --end;
  int begin = end;
  while (begin > 0 && pts[begin - 1].outages >= min_count) --begin;
  if (end - begin < 2) {
    throw InsufficientData(
        "need >= 2 contiguous points with enough outage events");
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = end - begin;
  for (int i = begin; i < end; ++i) {
    const double x = std::log10(pts[i].rho);
    const double y = std::log10(pts[i].p_hat);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  const double b = (m * sxy - sx * sy) / denom;
  const double a = (sy - b * sx) / m;

  double ss_res = 0;
  for (int i = begin; i < end; ++i) {
    const double x = std::log10(pts[i].rho);
    const double y = std::log10(pts[i].p_hat);
    const double r = y - (a + b * x);
    ss_res += r * r;
  }
  SlopeFit fit;
  fit.slope = -b;
  fit.intercept = a;
  fit.stderr_slope =
      m > 2 ? std::sqrt(ss_res / (m - 2) / (sxx - sx * sx / m)) : 0.0;
  fit.window_begin = begin;
  fit.window_end = end;
  return fit;
}

// --- serialization ---------------------------------------------------------

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::MmseTx: return "mmse_tx";
    case Scheme::ZfTx: return "zf_tx";
    case Scheme::NaiveMmse: return "naive_mmse";
    case Scheme::NaiveZf: return "naive_zf";
    case Scheme::OptimalLb: return "optimal_lb";
  }
  return "?";
}

inline const char* encoding_name(Encoding e) {
  switch (e) {
    case Encoding::Joint: return "joint";
    case Encoding::Separate: return "separate";
    case Encoding::MiOnly: return "mi_only";
  }
  return "?";
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["dims"] = {cfg.dims.n_s, cfg.dims.n_r, cfg.dims.n_d};
  j["scheme"] = scheme_name(cfg.scheme);
  j["encoding"] = encoding_name(cfg.encoding);
  if (cfg.rate_policy.kind == RatePolicy::Kind::FixedRate) {
    j["rate_policy"] = {{"kind", "fixed_rate"}, {"bits", cfg.rate_policy.value}};
  } else {
    j["rate_policy"] = {{"kind", "multiplexing"}, {"r", cfg.rate_policy.value}};
  }
  j["snr_grid_db"] = cfg.snr_grid_db;
  j["trials_per_point"] = cfg.trials_per_point;
  j["master_seed"] = cfg.master_seed;
  if (cfg.scheme == Scheme::NaiveMmse || cfg.scheme == Scheme::NaiveZf) {
    if (cfg.naive_gain == NaiveGain::VariableGain) {
      j["naive"] = {{"gain", "variable"}};
    } else {
      j["naive"] = {{"gain", "fixed"}, {"c", cfg.fixed_gain_c}};
    }
  }
  return j;
}

// FNV-1a 64 over the canonical (sorted-key, no-whitespace) config dump.
inline std::string config_digest(const ExperimentConfig& cfg) {
  const std::string canon = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

inline void write_curve_csv(const OutageCurve& curve, std::ostream& os) {
  os << "snr_db,rho,rate_bits,trials,outages,discards,p_hat,ci_low,ci_high\n";
  char line[320];
  for (const auto& p : curve.points) {
    std::snprintf(line, sizeof(line),
                  "%.12g,%.12g,%.12g,%" PRIu64 ",%" PRIu64 ",%" PRIu64
                  ",%.12g,%.12g,%.12g\n",
                  p.snr_db, p.rho, p.rate_bits, p.trials, p.outages,
                  p.discards, p.p_hat, p.ci_low, p.ci_high);
    os << line;
  }
}

// JSON report embedding the config (and its digest) for provenance.
inline nlohmann::json curve_to_json(const OutageCurve& curve) {
  nlohmann::json j;
  j["config"] = config_to_json(curve.config);
  j["config_digest"] = config_digest(curve.config);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"snr_db", p.snr_db},
                   {"rho", p.rho},
                   {"rate_bits", p.rate_bits},
                   {"trials", p.trials},
                   {"outages", p.outages},
                   {"discards", p.discards},
                   {"p_hat", p.p_hat},
                   {"ci_low", p.ci_low},
                   {"ci_high", p.ci_high}});
  }
  j["points"] = pts;
  return j;
}

// Parses the CSV written by write_curve_csv; config is left default.
inline OutageCurve parse_curve_csv(std::istream& is) {
  OutageCurve curve;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV");
  const std::string header =
      "snr_db,rho,rate_bits,trials,outages,discards,p_hat,ci_low,ci_high";
  if (line != header) throw ConfigError("unexpected CSV header: " + line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    OutagePoint p;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    if (!(ss >> p.snr_db >> p.rho >> p.rate_bits >> p.trials >> p.outages >>
          p.discards >> p.p_hat >> p.ci_low >> p.ci_high)) {
      throw ConfigError("malformed CSV row: " + line);
    }
    curve.points.push_back(p);
  }
  return curve;
}

}  // namespace relaylab
