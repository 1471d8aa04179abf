#include "isac_aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "isac_aoi/errors.hpp"
#include "isac_aoi/parallel.hpp"
#include "isac_aoi/random.hpp"
#include "isac_aoi/sensing.hpp"

namespace isac_aoi::sim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxBacklog = 1'000'000;

struct Waiting {
  long long index;
  double t_gen;
};

void finish_stats(SimStats& s) {
  const auto n = static_cast<std::uint64_t>(s.paoi_samples.size());
  s.pavp_hat = n ? static_cast<double>(s.violations) / static_cast<double>(n) : 0.0;
  s.pavp_ci = wilson_interval(s.violations, n);
  s.pavp_std_error = binomial_std_error(s.violations, n);
  s.sdp_hat = s.scans ? static_cast<double>(s.detections) / static_cast<double>(s.scans) : 0.0;
}

}  // namespace

SimResult run_sim(const SystemParams& p, const SimOptions& opts) {
  return run_sim(sensing::make_arrival_model(p), service::build_service_model(p),
                 p.paoi_threshold, opts);
}

SimResult run_sim(const sensing::ArrivalModel& arrival, const service::ServiceModel& svc,
                  double paoi_threshold, const SimOptions& opts) {
  if (opts.n_packets < 1) throw std::invalid_argument("run_sim: n_packets must be >= 1");
  const bool per_attempt = opts.gain_mode == service::GainMode::per_attempt;

  Rng scan_rng = make_stream(opts.seed, 2 * opts.stream);
  Rng svc_rng = make_stream(opts.seed, 2 * opts.stream + 1);
  std::bernoulli_distribution detect(arrival.detect_prob);
  std::bernoulli_distribution acceptable(svc.p_accept);
  std::bernoulli_distribution decoded(svc.eta);

  const long long n = opts.n_packets;
  const long long warmup = static_cast<long long>(std::floor(opts.warmup_fraction * n));

  SimResult result;
  SimStats& st = result.stats;
  st.seed = opts.seed;
  st.n_packets = n;
  if (opts.keep_trace) result.trace.resize(static_cast<std::size_t>(n));
  st.paoi_samples.reserve(static_cast<std::size_t>(std::max(0LL, n - warmup - 1)));

  std::deque<Waiting> queue;
  long long generated = 0;
  long long departed = 0;
  long long next_scan = 1;

  // Packet in service.
  bool busy = false;
  PacketTrace cur;
  double gain = 0.0;
  double service_event = kInf;
  bool event_is_attempt_end = false;

  double prev_gen = 0.0;  // T^A of the last departed packet
  std::uint64_t attempts_sum = 0;
  std::uint64_t deferrals_sum = 0;

  auto channel_check = [&](double t) {
    if (acceptable(svc_rng)) {
      if (per_attempt) gain = service::sample_gain(svc, svc_rng);
      service_event = t + svc.airtime(gain);
      event_is_attempt_end = true;
    } else {
      ++cur.deferrals;
      service_event = t + svc.deferral;
      event_is_attempt_end = false;
    }
  };

  auto start_service = [&](double t) {
    const Waiting w = queue.front();
    queue.pop_front();
    busy = true;
    cur = PacketTrace{};
    cur.index = w.index;
    cur.t_gen = w.t_gen;
    cur.t_start_service = t;
    if (!per_attempt) gain = service::sample_gain(svc, svc_rng);
    channel_check(t);
  };

  auto depart = [&](double t) {
    cur.t_depart = t;
    const long long i = cur.index - 1;  // 0-based
    if (departed > 0) {
      const double paoi = t - prev_gen;
      if (i - 1 >= warmup) {
        st.paoi_samples.push_back(paoi);
        if (paoi > paoi_threshold) ++st.violations;
      }
      if (opts.keep_trace) result.trace[static_cast<std::size_t>(i - 1)].paoi = paoi;
    }
    if (i >= warmup) {
      attempts_sum += static_cast<std::uint64_t>(cur.attempts);
      deferrals_sum += static_cast<std::uint64_t>(cur.deferrals);
    }
    if (opts.keep_trace) result.trace[static_cast<std::size_t>(i)] = cur;
    prev_gen = cur.t_gen;
    ++departed;
    busy = false;
    service_event = kInf;
    if (!queue.empty()) start_service(t);
  };

  while (departed < n) {
    const double t_scan =
        generated < n ? static_cast<double>(next_scan) * arrival.scan_period : kInf;
    if (busy && service_event <= t_scan) {
      const double t = service_event;
      if (event_is_attempt_end) {
        ++cur.attempts;
        if (decoded(svc_rng)) {
          depart(t);
        } else {
          channel_check(t);
        }
      } else {
        channel_check(t);
      }
      continue;
    }
    if (!std::isfinite(t_scan)) {
      throw std::logic_error("run_sim: idle server with no pending scans");
    }
    ++next_scan;
    ++st.scans;
    if (detect(scan_rng)) {
      ++st.detections;
      ++generated;
      queue.push_back({generated, t_scan});
      if (queue.size() > kMaxBacklog) {
        throw NonProgress(fmt::format(
            "more than {} packets waiting at t = {:.6g} s; the queue is unstable", kMaxBacklog,
            t_scan));
      }
      if (!busy) start_service(t_scan);
    }
  }

  const auto counted = static_cast<double>(std::max(1LL, n - warmup));
  st.mean_attempts = static_cast<double>(attempts_sum) / counted;
  st.mean_deferrals = static_cast<double>(deferrals_sum) / counted;
  finish_stats(st);
  return result;
}

SimStats pool(std::span<const SimStats> parts) {
  SimStats out;
  if (parts.empty()) return out;
  out.seed = parts.front().seed;
  double attempts = 0.0;
  double deferrals = 0.0;
  for (const auto& s : parts) {
    out.violations += s.violations;
    out.paoi_samples.insert(out.paoi_samples.end(), s.paoi_samples.begin(),
                            s.paoi_samples.end());
    out.scans += s.scans;
    out.detections += s.detections;
    out.n_packets += s.n_packets;
    attempts += s.mean_attempts * static_cast<double>(s.n_packets);
    deferrals += s.mean_deferrals * static_cast<double>(s.n_packets);
  }
  out.mean_attempts = attempts / static_cast<double>(out.n_packets);
  out.mean_deferrals = deferrals / static_cast<double>(out.n_packets);
  finish_stats(out);
  return out;
}

SimStats run_replications(const SystemParams& p, const SimOptions& opts, int replications,
                          unsigned workers) {
  if (replications < 1) throw std::invalid_argument("run_replications: replications must be >= 1");
  std::vector<SimStats> parts(static_cast<std::size_t>(replications));
  parallel_for(
      parts.size(),
      [&](std::size_t r) {
        SimOptions o = opts;
        o.keep_trace = false;
        o.stream = opts.stream + r;
        parts[r] = run_sim(p, o).stats;
      },
      workers);
  return pool(parts);
}

RecursionCheck departure_recursion_check(std::span<const PacketTrace> trace, double tolerance) {
  RecursionCheck c;
  // T^D(n) = max_v {T^A(v) + P(n) - P(v - 1)} with P the prefix sum of
  // service times, i.e. P(n) + running max of T^A(v) - P(v - 1).
  double prefix = 0.0;
  double best = -kInf;
  double prev_start = 0.0;
  double prev_service = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& pk = trace[k];
    best = std::max(best, pk.t_gen - prefix);
    prefix += pk.service_time();
    const double depart = prefix + best;
    c.max_departure_error = std::max(c.max_departure_error, std::abs(depart - pk.t_depart));

    const double start = k == 0 ? pk.t_gen : std::max(pk.t_gen, prev_start + prev_service);
    c.max_start_error = std::max(c.max_start_error, std::abs(start - pk.t_start_service));
    prev_start = pk.t_start_service;
    prev_service = pk.service_time();
  }
  c.pass = c.max_departure_error < tolerance && c.max_start_error < tolerance;
  return c;
}

void write_trace_csv(std::ostream& out, std::span<const PacketTrace> trace) {
  out << "n,t_gen,t_start,attempts,deferrals,t_depart,paoi\n";
  for (const auto& t : trace) {
    out << fmt::format("{},{:.9f},{:.9f},{},{},{:.9f},", t.index, t.t_gen, t.t_start_service,
                       t.attempts, t.deferrals, t.t_depart);
    if (std::isfinite(t.paoi)) out << fmt::format("{:.9f}", t.paoi);
    out << '\n';
  }
}

}  // namespace isac_aoi::sim
