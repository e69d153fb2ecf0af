#include "shardqn/tandem.hpp"

#include <cmath>

#include "shardqn/errors.hpp"

namespace shardqn::qr {

namespace {

struct Grid {
  int k;
  int idx(int p, int n) const { return p * (k + 1) + n; }
  int clampn(int n) const { return n > k ? k : n; }
};

void check_inputs(double lambda_p, double lambda_n, double mu_p, double mu_n,
                  int truncation) {
  if (lambda_p < 0.0 || lambda_n < 0.0)
    throw InvalidParams("arrival rates must be >= 0");
  if (!(mu_p > 0.0) || !(mu_n > 0.0))
    throw InvalidParams("service rates must be > 0");
  if (truncation < 3) throw InvalidParams("truncation must be >= 3");
}

}  // namespace

TandemRates solve_tandem_traffic(double lambda_p, double lambda_n,
                                 double mu_p, double mu_n) {
  if (lambda_p < 0.0 || lambda_n < 0.0 || !(mu_p > 0.0) || !(mu_n > 0.0))
    throw InvalidParams("tandem rates out of range");
  TandemRates r;
  // alpha_ns_pos = rho_p mu_p and rho_p = lambda_p/(mu_p + alpha_ps_neg)
  // with alpha_ps_neg = alpha_ns_pos collapse to rho(1+rho) = lambda_p/mu_p.
  r.rho_p = 0.5 * (std::sqrt(1.0 + 4.0 * lambda_p / mu_p) - 1.0);
  r.alpha_pc = lambda_p;
  r.alpha_ns_pos = r.rho_p * mu_p;
  r.alpha_ps_neg = r.alpha_ns_pos;
  r.alpha_nc = lambda_n + r.rho_p * r.alpha_ps_neg;
  r.rho_n = (r.alpha_nc + r.alpha_ns_pos) / mu_n;
  if (!(r.rho_p < 1.0) || !(r.rho_n < 1.0))
    throw UnstableTandem("implied load >= 1");
  return r;
}

TandemModel tandem_signal_model(double lambda_p, double lambda_n,
                                double mu_p, double mu_n, int truncation) {
  check_inputs(lambda_p, lambda_n, mu_p, mu_n, truncation);
  TandemModel tm;
  tm.rates = solve_tandem_traffic(lambda_p, lambda_n, mu_p, mu_n);
  tm.truncation = truncation;
  const double rho_n = tm.rates.rho_n;
  const double a_pos = tm.rates.alpha_ns_pos;

  Grid g{truncation};
  CtmcModel& m = tm.ctmc;
  m.n_states = (truncation + 1) * (truncation + 1);
  m.dims = {truncation + 1, truncation + 1};
  m.class_names = {"Pc", "Nc", "Ns1+", "Ps1-"};
  auto add = [&m](int from, int to, double rate, EventKind kind, int cls) {
    if (rate > 0.0) m.transitions.push_back({from, to, rate, kind, cls, -1});
  };

  for (int p = 0; p <= truncation; ++p) {
    for (int n = 0; n <= truncation; ++n) {
      const int s = g.idx(p, n);
      if (p < truncation) add(s, g.idx(p + 1, n), lambda_p, EventKind::Arrival, 0);
      if (n < truncation) add(s, g.idx(p, n + 1), lambda_n, EventKind::Arrival, 1);
      if (n >= 1) add(s, g.idx(p, n - 1), mu_n, EventKind::Departure, 1);
      if (p >= 2) {
        // Triggered signal kept with probability rho_n: removes a second
        // customer from P and feeds it to N as a regular customer.
        add(s, g.idx(p - 2, g.clampn(n + 2)), mu_p * rho_n, EventKind::Internal, 2);
        add(s, g.idx(p - 1, g.clampn(n + 1)), mu_p * (1.0 - rho_n), EventKind::Internal, 2);
      } else if (p == 1) {
        // A kept signal meets an empty queue P and vanishes.
        add(s, g.idx(0, g.clampn(n + 1)), mu_p, EventKind::Internal, 2);
      }
      if (n == 0 && a_pos > 0.0) {
        // Empty-state emission; kept copies act as negative signals on P.
        if (p >= 1) add(s, g.idx(p - 1, 1), a_pos, EventKind::Internal, 2);
        // Dropped or vanished copies leave the state unchanged.
        const double residue = p >= 1 ? a_pos / rho_n - a_pos : a_pos / rho_n;
        add(s, s, residue, EventKind::Departure, 2);
      }
    }
  }
  return tm;
}

CtmcModel tandem_deterministic_model(double lambda_p, double lambda_n,
                                     double mu_p, double mu_n, int truncation) {
  check_inputs(lambda_p, lambda_n, mu_p, mu_n, truncation);
  Grid g{truncation};
  CtmcModel m;
  m.n_states = (truncation + 1) * (truncation + 1);
  m.dims = {truncation + 1, truncation + 1};
  m.class_names = {"Pc", "Nc", "Ns1+", "Ps1-"};
  auto add = [&m](int from, int to, double rate, EventKind kind, int cls) {
    if (rate > 0.0) m.transitions.push_back({from, to, rate, kind, cls, -1});
  };
  for (int p = 0; p <= truncation; ++p) {
    for (int n = 0; n <= truncation; ++n) {
      const int s = g.idx(p, n);
      if (p < truncation) add(s, g.idx(p + 1, n), lambda_p, EventKind::Arrival, 0);
      if (n < truncation) add(s, g.idx(p, n + 1), lambda_n, EventKind::Arrival, 1);
      if (n >= 1) add(s, g.idx(p, n - 1), mu_n, EventKind::Departure, 1);
      if (p >= 2)
        add(s, g.idx(p - 2, g.clampn(n + 2)), mu_p, EventKind::Internal, 2);
      else if (p == 1)
        add(s, g.idx(0, g.clampn(n + 1)), mu_p, EventKind::Internal, 2);
    }
  }
  return m;
}

double product_form_distance(const CtmcModel& model, const Eigen::VectorXd& pi,
                             double tail_guard) {
  if (model.dims.size() < 2)
    throw InvalidParams("product_form_distance needs a factorized state space");
  long expect = 1;
  for (int d : model.dims) expect *= d;
  if (expect != model.n_states || expect != pi.size())
    throw InvalidParams("dims inconsistent with state count");

  const int nq = static_cast<int>(model.dims.size());
  std::vector<Eigen::VectorXd> marg(nq);
  for (int j = 0; j < nq; ++j) marg[j] = Eigen::VectorXd::Zero(model.dims[j]);

  std::vector<int> coord(nq, 0);
  double tail = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    int rem = s;
    bool boundary = false;
    for (int j = nq - 1; j >= 0; --j) {
      coord[j] = rem % model.dims[j];
      rem /= model.dims[j];
      if (coord[j] == model.dims[j] - 1) boundary = true;
    }
    for (int j = 0; j < nq; ++j) marg[j](coord[j]) += pi(s);
    if (boundary) tail += pi(s);
  }
  if (tail >= tail_guard)
    throw TruncationTooSmall("boundary tail mass " + std::to_string(tail) +
                             " >= " + std::to_string(tail_guard));

  double l1 = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    int rem = s;
    double prod = 1.0;
    bool boundary = false;
    for (int j = nq - 1; j >= 0; --j) {
      const int c = rem % model.dims[j];
      rem /= model.dims[j];
      if (c == model.dims[j] - 1) boundary = true;
      prod *= marg[j](c);
    }
    if (!boundary) l1 += std::fabs(pi(s) - prod);
  }
  return l1;
}

Eigen::VectorXd geometric_pmf(double rho, int len) {
  Eigen::VectorXd v(len);
  double pw = 1.0;
  for (int i = 0; i < len; ++i) {
    v(i) = pw;
    pw *= rho;
  }
  v /= v.sum();
  return v;
}

}  // namespace shardqn::qr
