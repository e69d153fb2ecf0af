#pragma once

#include <optional>
#include <vector>

#include "shardqn/params.hpp"

namespace shardqn::analytic {

// Mean produced block size at consensus load rho_p:
// b_bar = (1 - rho_p^b)/(1 - rho_p), evaluated as sum_{j=0}^{b-1} rho_p^j
// so the rho_p -> 1 limit (= b) needs no special casing.
double mean_block_size(double rho_p, int b);

// Expected number of distinct foreign shards a transaction touches, i.e.
// the expected number of receipts it spawns:
//   sum_{k=0}^{U} (k+1) sum_{d=k+1}^{d_max} S(d+1,k+2) D[d]
//                 prod_{z=1}^{k+1}(m-z) / m^d
// with U = min(m-1, d_max) - 1. Zero when m == 1. The inner numerators are
// exact 128-bit integers converted to double once per term.
double cross_shard_coefficient(int m, const std::vector<double>& dest_dist);
double cross_shard_coefficient(const ShardingParams& p);

// Per-shard TX input rate sustaining consensus load rho_p, single
// destination: rho_p*b_bar(rho_p)*mu_p / (1 + (m-1)/m).
double lambda_single(double rho_p, const ShardingParams& p);

// General multi-destination form:
// rho_p*b_bar(rho_p)*mu_p / (1 + cross_shard_coefficient).
double lambda_general(double rho_p, const ShardingParams& p);

// Saturation throughput per shard (rho_p = 1). Upper bound, valid while
// the network queues stay far from their own stability limits
// (min(mu_nc, mu_ns) >> b*mu_p).
double lambda_max(const ShardingParams& p);

// Many-shard limit of lambda_max: b*mu_p / (1 + E[d]).
double lambda_max_limit(const ShardingParams& p);

// Full-sharding traffic solver: finds rho_p by monotone bisection of
// lambda_general(rho_p) = lambda (tolerance tol on rho_p, then polished to
// the residual floor), and reconstructs every per-queue rate. Throws
// UnstableInput when lambda >= lambda_max(p).
TrafficSolution solve_traffic_full(double lambda, const ShardingParams& p,
                                   double tol = 1e-12);

// Computation-sharding variant: identical per-shard consensus solution,
// shared network loads rho_nc = m*lambda/mu_nc and
// rho_ns = m*alpha_pc/mu_ns, and the rho_n < gamma flag.
TrafficSolution solve_traffic_computation(double lambda, const ShardingParams& p);

// Shared-network load for computation sharding at per-shard rate lambda:
// rho_n = m*lambda*(zeta + 1 + cross_shard_coefficient)/mu_ns.
double network_load_computation(const ShardingParams& p, double lambda);

// System throughput cap m*lambda < gamma*mu_ns/(zeta + 1 + F(m)) for
// computation sharding.
double throughput_bound_computation(const ShardingParams& p, int m);

// Largest shard count keeping the shared network below gamma. lambda is
// the per-shard demand; nullopt means consensus-saturated demand
// (lambda = lambda_max at each m). Integer scan seeded at the large-m
// closed form, corrected by exact evaluation at finite m. Returns 0 when
// even m = 1 violates the cap.
int max_shards_computation(const ShardingParams& p,
                           std::optional<double> lambda = std::nullopt);

// Beacon-chain variant: floor(mu_nh / mu_p).
int beacon_max_shards(double mu_nh, double mu_p);

// Relative residuals of every traffic equation for a returned solution;
// used by tests and the duality checks. Order: consensus stage links,
// network stage links, class-c balance, flow identities, utilizations.
std::vector<double> traffic_residuals(const TrafficSolution& s, const ShardingParams& p,
                                      bool computation_mode = false);

}  // namespace shardqn::analytic
