#pragma once

#include "shardqn/ctmc.hpp"

namespace shardqn::qr {

// Two queues in tandem where the first serves customers in batches of up
// to two and forwards them to the second. The batch movement is modeled
// with a positive signal into queue N whose triggered copy returns to
// queue P as a negative signal.
//
// Traffic rates solving the network's balance equations; rho_p is the
// positive root of rho(1+rho) = lambda_p/mu_p and
// rho_n = (lambda_p + lambda_n)/mu_n.
struct TandemRates {
  double rho_p = 0.0;
  double rho_n = 0.0;
  double alpha_pc = 0.0;      // customer arrivals to P
  double alpha_nc = 0.0;      // customer arrivals to N
  double alpha_ns_pos = 0.0;  // positive-signal rate into N (= rho_p mu_p)
  double alpha_ps_neg = 0.0;  // negative-signal rate into P
};

TandemRates solve_tandem_traffic(double lambda_p, double lambda_n,
                                 double mu_p, double mu_n);

struct TandemModel {
  CtmcModel ctmc;
  TandemRates rates;
  int truncation = 0;
};

// Reversible form: the returned positive signal is kept with probability
// rho_n (dropped otherwise), and queue N emits extra positive signals at
// rate rho_n^-1 alpha_ns_pos while empty. Its stationary distribution
// factorizes into the product of geometric marginals with ratios rho_p
// and rho_n. Throws UnstableTandem when either implied load is >= 1.
TandemModel tandem_signal_model(double lambda_p, double lambda_n,
                                double mu_p, double mu_n, int truncation);

// Plain form: the triggered signal always returns (deterministic routing)
// and there is no empty-state emission. Matches the batch dynamics
// exactly but is not reversible, so its joint distribution does not
// factorize.
CtmcModel tandem_deterministic_model(double lambda_p, double lambda_n,
                                     double mu_p, double mu_n, int truncation);

// L1 distance between the joint stationary distribution and the product
// of its own marginals, restricted to the interior (all coordinates below
// the cap). Requires model.dims. Throws TruncationTooSmall when the
// boundary-layer mass is >= tail_guard.
double product_form_distance(const CtmcModel& model, const Eigen::VectorXd& pi,
                             double tail_guard = 1e-8);

// Truncated geometric pmf (1-rho) rho^n, renormalized on 0..len-1.
Eigen::VectorXd geometric_pmf(double rho, int len);

}  // namespace shardqn::qr
