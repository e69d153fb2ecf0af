#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace shardqn {

// System-level parameters of a sharded blockchain.
//
//   m         number of shards
//   b         maximum number of TRXs per block
//   mu_p      block production (consensus) service rate, 1/s
//   mu_nc     network service rate for raw TRXs, 1/s
//   zeta      block-component speedup; block components are served at
//             zeta * mu_nc
//   dest_dist dest_dist[i] = probability that a transaction carries i+1
//             destination fields
//   gamma     network load cap in (0,1]; meaningful for computation
//             sharding only
//   mu_nh     beacon-chain header service rate, optional
//
// Derived quantities are recomputed on demand and never stored.
struct ShardingParams {
  int m = 1;
  int b = 1;
  double mu_p = 1.0;
  double mu_nc = 1.0;
  double zeta = 1.0;
  std::vector<double> dest_dist{1.0};
  double gamma = 1.0;
  std::optional<double> mu_nh;

  int d_max() const { return static_cast<int>(dest_dist.size()); }

  // Largest stage a receipt fan-out signal can carry: min(m-1, d_max) - 1.
  // Negative when m == 1; all cross-shard sums are then empty.
  int max_signal_stage() const { return std::min(m - 1, d_max()) - 1; }

  double mean_destinations() const {
    double e = 0.0;
    for (std::size_t i = 0; i < dest_dist.size(); ++i)
      e += static_cast<double>(i + 1) * dest_dist[i];
    return e;
  }

  double mu_ns() const { return zeta * mu_nc; }

  // Service rate of a full block's worth of components.
  double mu_nb() const { return mu_ns() / b; }

  bool operator==(const ShardingParams&) const = default;
};

// Checks every invariant and returns all violations, not just the first.
// Total: never throws, regardless of input values.
std::vector<std::string> validate(const ShardingParams& p);

// Throws InvalidParams with the joined violation list if any check fails.
void require_valid(const ShardingParams& p);

// Per-shard TX rate and every per-queue rate solving the traffic equations.
// Stage vectors follow the conventions:
//   alpha_ns_pos[i-1]  rate of the stage-i block signal into the network
//                      queue, i = 1..b
//   alpha_ps_neg[i-1]  rate of the stage-i removal signal into the
//                      consensus queue, i = 1..b-1
//   alpha_nck[k]       rate of stage-k receipt signals into the network
//                      queue, k = 0..max(U,0); stage 0 is the plain
//                      customer class
//   r_stage[k]         rate a serviced block component spawns a stage-k
//                      signal for one other shard, k = 0..U
struct TrafficSolution {
  double lambda = 0.0;
  double rho_p = 0.0;
  double alpha_pc = 0.0;
  std::vector<double> alpha_ps_neg;
  std::vector<double> alpha_ns_pos;
  std::vector<double> alpha_nck;
  std::vector<double> r_stage;
  double rho_nc = 0.0;
  double rho_ns = 0.0;
  double rho_n = 0.0;
  double mean_block = 0.0;
  // Set by the computation-sharding solver: whether rho_n < gamma.
  std::optional<bool> network_within_cap;
};

}  // namespace shardqn
