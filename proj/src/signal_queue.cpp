#include "shardqn/signal_queue.hpp"

#include <algorithm>

#include "shardqn/errors.hpp"

namespace shardqn::qr {

CtmcModel compile(const SignalQueueSpec& spec, int truncation) {
  if (truncation < 2) throw InvalidParams("truncation must be >= 2");
  if (!(spec.service_rate > 0.0)) throw InvalidParams("service_rate must be > 0");
  if (spec.arrival_rate < 0.0 || spec.neg_signal_rate < 0.0 || spec.pos_signal_rate < 0.0)
    throw InvalidParams("rates must be >= 0");
  if (spec.pos_signal_rate > 0.0 && !(spec.load() < 1.0))
    throw UnstableInput("queue load >= 1; empty-state emission rate undefined");

  const int k = truncation;
  CtmcModel m;
  m.n_states = k + 1;
  m.class_names = {"c", "s-", "s+"};
  m.dims = {k + 1};
  auto add = [&m](int from, int to, double rate, EventKind kind, int cls, int trig = -1) {
    if (rate <= 0.0) return;
    m.transitions.push_back({from, to, rate, kind, cls, trig});
  };

  for (int n = 0; n <= k; ++n) {
    if (n < k) add(n, n + 1, spec.arrival_rate, EventKind::Arrival, kClassCustomer);
    if (n >= 1) add(n, n - 1, spec.service_rate, EventKind::Departure, kClassCustomer);
    if (spec.neg_signal_rate > 0.0) {
      if (n >= 1)
        add(n, n - 1, spec.neg_signal_rate, EventKind::Arrival, kClassNegSignal, kClassNegSignal);
      else
        // Vanishes without a trigger, but still counts as an arrival so
        // the arrival flow stays state-independent.
        add(0, 0, spec.neg_signal_rate, EventKind::Arrival, kClassNegSignal);
    }
    if (spec.pos_signal_rate > 0.0 && n < k)
      add(n, n + 1, spec.pos_signal_rate, EventKind::Arrival, kClassPosSignal, kClassPosSignal);
  }
  if (spec.pos_signal_rate > 0.0 && spec.empty_state_emission)
    add(0, 0, spec.pos_signal_rate / spec.load(), EventKind::Departure, kClassPosSignal);
  return m;
}

QrReport check_qr(const SignalQueueSpec& spec, int truncation) {
  const CtmcModel m = compile(spec, truncation);
  const Eigen::VectorXd pi = stationary(m);
  const int n = m.n_states;
  const int ncls = static_cast<int>(m.class_names.size());
  const int interior = n - 1;  // exclude the reflecting cap level

  QrReport rep;
  rep.truncation_tail_mass = pi(n - 1);

  // Condition 1: per-class arrival row sums constant over states.
  Eigen::MatrixXd arr = Eigen::MatrixXd::Zero(n, ncls);
  for (const auto& t : m.transitions)
    if (t.kind == EventKind::Arrival) arr(t.from, t.cls) += t.rate;
  // Condition 2: beta_u(x) = sum_x' pi(x')(q_u^D(x',x) + q^A(x',x) f) / pi(x).
  Eigen::MatrixXd dep_flow = Eigen::MatrixXd::Zero(n, ncls);
  for (const auto& t : m.transitions) {
    if (t.kind == EventKind::Departure)
      dep_flow(t.to, t.cls) += pi(t.from) * t.rate;
    else if (t.kind == EventKind::Arrival && t.triggered >= 0)
      dep_flow(t.to, t.triggered) += pi(t.from) * t.rate;
  }

  rep.arrival_rates.assign(ncls, 0.0);
  rep.departure_rates.assign(ncls, 0.0);
  for (int c = 0; c < ncls; ++c) {
    bool class_present = false;
    for (const auto& t : m.transitions)
      if (t.cls == c || t.triggered == c) class_present = true;
    if (!class_present) continue;

    std::vector<double> beta(interior);
    for (int x = 0; x < interior; ++x) beta[x] = dep_flow(x, c) / pi(x);
    std::vector<double> alpha(interior);
    for (int x = 0; x < interior; ++x) alpha[x] = arr(x, c);

    auto med = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    rep.arrival_rates[c] = med(alpha);
    rep.departure_rates[c] = med(beta);

    const auto [amin, amax] = std::minmax_element(alpha.begin(), alpha.end());
    const auto [bmin, bmax] = std::minmax_element(beta.begin(), beta.end());
    rep.max_arrival_violation = std::max(rep.max_arrival_violation, *amax - *amin);
    rep.max_departure_violation = std::max(rep.max_departure_violation, *bmax - *bmin);
  }
  return rep;
}

}  // namespace shardqn::qr
