#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "isac_aoi/params.hpp"
#include "isac_aoi/sensing.hpp"
#include "isac_aoi/service.hpp"
#include "isac_aoi/stats.hpp"

namespace isac_aoi::sim {

/// Timestamps of one packet, all in seconds.
struct PacketTrace {
  long long index = 0;          // n, 1-based
  double t_gen = 0.0;           // T^A(n)
  double t_start_service = 0.0; // Z(n)
  int attempts = 0;             // b + 1
  long long deferrals = 0;      // c
  double t_depart = 0.0;        // T^D(n)
  double paoi = std::numeric_limits<double>::quiet_NaN();  // T^D(n+1) - T^A(n)

  double service_time() const { return t_depart - t_start_service; }
};

struct SimStats {
  double pavp_hat = 0.0;         // fraction of PAoI samples above zeta
  Interval pavp_ci{0.0, 1.0};    // Wilson 95 %
  double pavp_std_error = 0.0;
  std::uint64_t violations = 0;
  std::vector<double> paoi_samples;
  double sdp_hat = 0.0;          // detections / scans
  std::uint64_t scans = 0;
  std::uint64_t detections = 0;
  double mean_attempts = 0.0;
  double mean_deferrals = 0.0;
  long long n_packets = 0;       // packets generated and served
  std::uint64_t seed = 0;
};

struct SimOptions {
  long long n_packets = 100000;
  std::uint64_t seed = 1;
  service::GainMode gain_mode = service::GainMode::per_packet;
  bool keep_trace = false;
  double warmup_fraction = 0.01;
  std::uint64_t stream = 0;  // replication index, selects an independent stream
};

struct SimResult {
  SimStats stats;
  std::vector<PacketTrace> trace;  // filled when keep_trace
};

/// Event-driven simulation of scan-driven packet generation, a FCFS buffer,
/// channel evaluation with deferrals, and FBC transmissions with
/// retransmission. Throws TauTooLow (via the service model) and NonProgress
/// when more than 10^6 packets wait.
SimResult run_sim(const SystemParams& p, const SimOptions& opts);

/// Same event loop on explicit arrival and service models.
SimResult run_sim(const sensing::ArrivalModel& arrival, const service::ServiceModel& svc,
                  double paoi_threshold, const SimOptions& opts);

/// Runs `replications` independent streams in parallel and pools the samples.
SimStats run_replications(const SystemParams& p, const SimOptions& opts, int replications,
                          unsigned workers = 0);

/// Pools replications: sums counts and concatenates PAoI samples in order.
SimStats pool(std::span<const SimStats> parts);

struct RecursionCheck {
  bool pass = false;
  double max_departure_error = 0.0;  // |T^D(n) - max_v {T^A(v) + sum_{l=v..n} T^S(l)}|
  double max_start_error = 0.0;      // |Z(n) - max{T^A(n), Z(n-1) + T^S(n-1)}|
};

/// Recomputes every departure with the max-plus form of the FCFS queue and
/// compares against the simulated trace (tolerance 1e-9 s).
RecursionCheck departure_recursion_check(std::span<const PacketTrace> trace,
                                         double tolerance = 1e-9);

/// Trace dump: header row, then n,t_gen,t_start,attempts,deferrals,t_depart,paoi
/// with seconds printed to 9 decimals (paoi empty for the final packet).
void write_trace_csv(std::ostream& out, std::span<const PacketTrace> trace);

}  // namespace isac_aoi::sim
