#include "shardqn/analytic.hpp"

#include <cmath>
#include <numeric>

#include "shardqn/combinatorics.hpp"
#include "shardqn/errors.hpp"

namespace shardqn::analytic {

namespace {

// Stage terms T_k = sum_{d=k+1}^{d_max} S(d+1,k+2) D[d] ff(m-1,k+1) / m^d
// for k = 0..U. The cross-shard coefficient is sum (k+1) T_k and the
// per-stage spawn rates are lambda T_k / (m-1).
std::vector<double> stage_terms(int m, const std::vector<double>& dest_dist) {
  const int d_max = static_cast<int>(dest_dist.size());
  const int stages = std::min(m - 1, d_max);  // U + 1
  std::vector<double> t;
  if (stages <= 0) return t;
  t.resize(static_cast<std::size_t>(stages), 0.0);
  std::vector<double> m_pow(static_cast<std::size_t>(d_max) + 1, 1.0);
  for (int d = 1; d <= d_max; ++d) m_pow[d] = m_pow[d - 1] * m;
  for (int k = 0; k < stages; ++k) {
    double sum = 0.0;
    for (int d = k + 1; d <= d_max; ++d) {
      if (dest_dist[d - 1] == 0.0) continue;
      sum += dest_dist[d - 1] *
             comb::to_double(comb::distinct_shard_sets(m, d, k + 1)) / m_pow[d];
    }
    t[k] = sum;
  }
  return t;
}

double throughput_denominator(int m, const std::vector<double>& dest_dist) {
  double f = 0.0;
  const auto t = stage_terms(m, dest_dist);
  for (std::size_t k = 0; k < t.size(); ++k)
    f += static_cast<double>(k + 1) * t[k];
  return 1.0 + f;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

}  // namespace

double mean_block_size(double rho_p, int b) {
  double sum = 0.0, pw = 1.0;
  for (int j = 0; j < b; ++j) {
    sum += pw;
    pw *= rho_p;
  }
  return sum;
}

double cross_shard_coefficient(int m, const std::vector<double>& dest_dist) {
  return throughput_denominator(m, dest_dist) - 1.0;
}

double cross_shard_coefficient(const ShardingParams& p) {
  return cross_shard_coefficient(p.m, p.dest_dist);
}

double lambda_single(double rho_p, const ShardingParams& p) {
  const double denom = 1.0 + static_cast<double>(p.m - 1) / p.m;
  return rho_p * mean_block_size(rho_p, p.b) * p.mu_p / denom;
}

double lambda_general(double rho_p, const ShardingParams& p) {
  return rho_p * mean_block_size(rho_p, p.b) * p.mu_p /
         throughput_denominator(p.m, p.dest_dist);
}

double lambda_max(const ShardingParams& p) { return lambda_general(1.0, p); }

double lambda_max_limit(const ShardingParams& p) {
  return p.b * p.mu_p / (1.0 + p.mean_destinations());
}

TrafficSolution solve_traffic_full(double lambda, const ShardingParams& p, double tol) {
  require_valid(p);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidParams("lambda must be finite and >= 0");
  const double cap = lambda_max(p);
  if (lambda >= cap)
    throw UnstableInput("lambda >= lambda_max: consensus queues unstable");
  if (!(tol > 0.0)) throw InvalidParams("tol must be > 0");

  const double denom = throughput_denominator(p.m, p.dest_dist);
  double rho = 0.0;
  if (lambda > 0.0) {
    // lambda_general is strictly increasing in rho_p, so bisection cannot
    // fail to bracket.
    double lo = 0.0, hi = 1.0;
    int iter = 0;
    const int max_iter = 200;
    while (hi - lo > tol && iter < max_iter) {
      const double mid = 0.5 * (lo + hi);
      if (lambda_general(mid, p) < lambda)
        lo = mid;
      else
        hi = mid;
      ++iter;
    }
    if (hi - lo > tol)
      throw NonConvergence("bisection did not reach tolerance");
    rho = 0.5 * (lo + hi);
    // Newton polish pushes the scalar residual to the floating-point
    // floor; the derivative mu_p * sum j rho^{j-1} / denom is exact.
    for (int i = 0; i < 8; ++i) {
      const double f = lambda_general(rho, p) - lambda;
      if (f == 0.0) break;
      double dsum = 0.0, pw = 1.0;
      for (int j = 1; j <= p.b; ++j) {
        dsum += j * pw;
        pw *= rho;
      }
      const double deriv = p.mu_p * dsum / denom;
      const double next = rho - f / deriv;
      if (!(next > 0.0 && next < 1.0)) break;
      rho = next;
    }
  }

  TrafficSolution s;
  s.lambda = lambda;
  s.rho_p = rho;
  s.mean_block = mean_block_size(rho, p.b);

  // Telescoped stage rates: alpha_ns_pos[i-1] = rho^{b-i+1} mu_p.
  s.alpha_ns_pos.assign(static_cast<std::size_t>(p.b), 0.0);
  s.alpha_ns_pos[p.b - 1] = rho * p.mu_p;
  for (int i = p.b - 1; i >= 1; --i)
    s.alpha_ns_pos[i - 1] = rho * s.alpha_ns_pos[i];
  s.alpha_ps_neg.assign(s.alpha_ns_pos.begin() + 1, s.alpha_ns_pos.end());
  s.alpha_pc = std::accumulate(s.alpha_ns_pos.begin(), s.alpha_ns_pos.end(), 0.0);

  const int stages = p.max_signal_stage() + 1;  // U + 1
  if (stages <= 0) {
    s.alpha_nck = {lambda};
  } else {
    const auto t = stage_terms(p.m, p.dest_dist);
    s.r_stage.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
      s.r_stage[k] = lambda * t[k] / (p.m - 1);
    s.alpha_nck.assign(t.size(), 0.0);
    for (int k = static_cast<int>(t.size()) - 1; k >= 0; --k) {
      double a = (k == 0 ? lambda : 0.0) + (p.m - 1) * s.r_stage[k];
      if (k + 1 < static_cast<int>(t.size())) a += s.alpha_nck[k + 1];
      s.alpha_nck[k] = a;
    }
  }

  s.rho_nc = std::accumulate(s.alpha_nck.begin(), s.alpha_nck.end(), 0.0) / p.mu_nc;
  s.rho_ns = s.alpha_pc / p.mu_ns();
  s.rho_n = s.rho_nc + s.rho_ns;
  return s;
}

TrafficSolution solve_traffic_computation(double lambda, const ShardingParams& p) {
  TrafficSolution s = solve_traffic_full(lambda, p);
  // Shared pool: class-c arrivals aggregate to m*lambda (receipts ride
  // inside blocks), block components from all m consensus queues.
  s.alpha_nck = {p.m * lambda};
  s.r_stage.clear();
  s.rho_nc = p.m * lambda / p.mu_nc;
  s.rho_ns = p.m * s.alpha_pc / p.mu_ns();
  s.rho_n = s.rho_nc + s.rho_ns;
  s.network_within_cap = s.rho_n < p.gamma;
  return s;
}

double network_load_computation(const ShardingParams& p, double lambda) {
  return p.m * lambda * (p.zeta + throughput_denominator(p.m, p.dest_dist)) /
         p.mu_ns();
}

double throughput_bound_computation(const ShardingParams& p, int m) {
  ShardingParams q = p;
  q.m = m;
  return q.gamma * q.mu_ns() / (q.zeta + throughput_denominator(m, q.dest_dist));
}

int max_shards_computation(const ShardingParams& p, std::optional<double> lambda) {
  require_valid(p);
  if (lambda && !(*lambda > 0.0))
    throw InvalidParams("explicit lambda must be > 0");

  auto compliant = [&](int m) {
    ShardingParams q = p;
    q.m = m;
    double lam;
    if (lambda) {
      lam = *lambda;
      if (lam >= lambda_max(q)) return false;  // consensus saturates first
    } else {
      lam = lambda_max(q);
    }
    return network_load_computation(q, lam) < q.gamma;
  };

  if (!compliant(1)) return 0;

  const double ed = p.mean_destinations();
  const double seed = lambda
      ? p.gamma * p.mu_ns() / (*lambda * (p.zeta + 1.0 + ed))
      : p.gamma * p.mu_nb() / (p.zeta * p.mu_p / (1.0 + ed) + p.mu_p);
  int m = 1;
  if (seed > 1.0) m = seed > 1e7 ? 10000000 : static_cast<int>(seed);

  int guard = 0;
  while (m > 1 && !compliant(m)) {
    --m;
    if (++guard > 100000000) throw NonConvergence("max_shards scan diverged");
  }
  while (compliant(m + 1)) {
    ++m;
    if (++guard > 100000000) throw NonConvergence("max_shards scan diverged");
  }
  return m;
}

int beacon_max_shards(double mu_nh, double mu_p) {
  if (!(mu_nh > 0.0) || !(mu_p > 0.0))
    throw InvalidParams("beacon_max_shards: rates must be > 0");
  // The 1e-9 absorbs representation error when the ratio is an integer.
  return static_cast<int>(std::floor(mu_nh / mu_p + 1e-9));
}

std::vector<double> traffic_residuals(const TrafficSolution& s, const ShardingParams& p,
                                      bool computation_mode) {
  std::vector<double> res;
  const int b = p.b;
  for (int i = 1; i <= b - 1; ++i)
    res.push_back(rel_diff(s.alpha_ps_neg[i - 1], s.alpha_ns_pos[i]));
  res.push_back(rel_diff(s.alpha_ns_pos[b - 1], s.rho_p * p.mu_p));
  for (int i = 1; i <= b - 1; ++i)
    res.push_back(rel_diff(s.alpha_ns_pos[i - 1], s.rho_p * s.alpha_ps_neg[i - 1]));
  const double sum_ns = std::accumulate(s.alpha_ns_pos.begin(), s.alpha_ns_pos.end(), 0.0);
  res.push_back(rel_diff(s.alpha_pc, sum_ns));
  const double sum_neg = std::accumulate(s.alpha_ps_neg.begin(), s.alpha_ps_neg.end(), 0.0);
  res.push_back(rel_diff(s.rho_p * (p.mu_p + sum_neg), s.alpha_pc));
  res.push_back(rel_diff(s.mean_block, mean_block_size(s.rho_p, b)));

  const double sum_nck = std::accumulate(s.alpha_nck.begin(), s.alpha_nck.end(), 0.0);
  if (computation_mode) {
    res.push_back(rel_diff(sum_nck, p.m * s.lambda));
    res.push_back(rel_diff(s.rho_nc, p.m * s.lambda / p.mu_nc));
    res.push_back(rel_diff(s.rho_ns, p.m * s.alpha_pc / p.mu_ns()));
  } else {
    if (p.m > 1) {
      const auto t = stage_terms(p.m, p.dest_dist);
      for (std::size_t k = 0; k < t.size(); ++k) {
        double a = (k == 0 ? s.lambda : 0.0) + (p.m - 1) * s.r_stage[k];
        if (k + 1 < t.size()) a += s.alpha_nck[k + 1];
        res.push_back(rel_diff(s.alpha_nck[k], a));
        if (sum_nck > 0.0) {
          // eqRk2 in its unreduced form.
          const double rk = s.rho_ns * p.mu_ns() / (p.m - 1) * (s.lambda / sum_nck) * t[k];
          res.push_back(rel_diff(s.r_stage[k], rk));
        }
      }
    } else {
      res.push_back(rel_diff(s.alpha_nck.front(), s.lambda));
    }
    // Every class-c customer in the network queue ends up mined.
    res.push_back(rel_diff(sum_nck, s.alpha_pc));
    res.push_back(rel_diff(s.rho_nc, sum_nck / p.mu_nc));
    res.push_back(rel_diff(s.rho_ns, s.alpha_pc / p.mu_ns()));
    res.push_back(rel_diff(s.lambda * throughput_denominator(p.m, p.dest_dist), s.alpha_pc));
  }
  res.push_back(rel_diff(s.rho_n, s.rho_nc + s.rho_ns));
  return res;
}

}  // namespace shardqn::analytic
