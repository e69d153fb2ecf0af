#pragma once

#include <cstdint>
#include <vector>

#include "shardqn/params.hpp"

namespace shardqn::sim {

enum class ShardingMode { Full, Computation };

// One simulation run. Per shard, transactions arrive Poisson(lambda) and
// are served twice by the network: raw on arrival and as block components
// after mining. Network queues are processor sharing with two service
// classes (mu_nc for raw TRXs, mu_ns for block components); consensus
// queues hold an exponential(mu_p) block timer while non-empty and remove
// min(n, b) jobs per firing. In computation mode all shards share one
// network queue and receipts are handed to destination consensus queues
// directly.
struct SimConfig {
  ShardingParams params;
  double lambda = 0.0;
  ShardingMode mode = ShardingMode::Full;
  double horizon = 10000.0;
  double warmup = 1000.0;
  std::uint64_t seed = 1;
  // Saturation detector: a consensus queue is saturated when
  // drift_windows consecutive windows show positive (arrivals -
  // departures) drift totaling at least drift_threshold. Zeros pick
  // defaults: window = (horizon - warmup)/20, threshold = max(50 b, 100).
  double window = 0.0;
  double drift_threshold = 0.0;
  int drift_windows = 3;
  // Disseminate a whole block as one aggregate job (service rate mu_nb)
  // instead of one job per component; sensitivity switch only.
  bool aggregate_blocks = false;

  bool operator==(const SimConfig&) const = default;
};

struct QueueStats {
  std::uint64_t arrivals = 0;    // after warmup
  std::uint64_t departures = 0;  // after warmup
  std::uint64_t lifetime_arrivals = 0;
  std::uint64_t lifetime_departures = 0;
  std::uint64_t size_end = 0;
  double utilization = 0.0;  // busy-time fraction after warmup
  double mean_qlen = 0.0;

  bool operator==(const QueueStats&) const = default;
};

struct SimReport {
  bool stable = true;
  bool conservation_ok = true;
  double time_simulated = 0.0;  // < horizon when saturation ends the run early
  double measured_span = 0.0;
  std::vector<QueueStats> network;
  std::vector<QueueStats> consensus;
  std::vector<double> committed_rate;        // per shard, TX/s
  std::vector<double> class_c_arrival_rate;  // raw TRX arrivals per network queue
  double committed_total = 0.0;
  double mean_block = 0.0;
  std::uint64_t blocks = 0;
  double rho_n_measured = 0.0;  // network busy fraction (mean over queues)
  double rho_p_measured = 0.0;  // consensus busy fraction (mean over shards)

  bool operator==(const SimReport&) const = default;
};

// Runs one deterministic replication. Saturated runs still return a
// report, with stable = false.
SimReport run(const SimConfig& config);

// Sweeps lambda upward from base.lambda in the given step until the
// saturation detector trips, and returns the largest stable lambda (0 if
// even the first point saturates). Each point runs with a derived seed;
// points may be evaluated jobs at a time in parallel, which leaves the
// result unchanged. The drift threshold is auto-scaled to the sweep step
// unless base.drift_threshold is set.
double find_saturation_lambda(const SimConfig& base, double step,
                              int max_steps = 400, int jobs = 1);

// Computation sharding: grows the shard count until the measured shared
// network utilization reaches gamma or consensus saturates first, and
// returns the last compliant count (0 if m = 1 already violates).
// base.lambda > 0 fixes the per-shard rate; lambda <= 0 means
// consensus-saturated demand (each m is fed its own saturation rate).
int max_shards_by_simulation(const SimConfig& base, double gamma);

}  // namespace shardqn::sim
