#pragma once

#include <vector>

#include "shardqn/ctmc.hpp"

namespace shardqn::qr {

enum class RemovalOrder { Head, Random };

// Single M/M/1 queue with optional negative and positive signal streams.
//
// A negative signal removes one customer (position chosen per
// removal_order, which does not affect the count-level chain) and
// instantly triggers a negative-signal departure; at an empty queue it
// vanishes. A positive signal adds one customer and instantly triggers a
// positive-signal departure. Reversibility additionally requires the
// queue to emit positive signals at rate load()^-1 * pos_signal_rate
// while empty; empty_state_emission switches that extra departure on and
// off so its necessity can be demonstrated.
struct SignalQueueSpec {
  double arrival_rate = 0.0;
  double service_rate = 1.0;
  double neg_signal_rate = 0.0;
  double pos_signal_rate = 0.0;
  bool empty_state_emission = true;
  RemovalOrder removal_order = RemovalOrder::Head;

  double load() const {
    return (arrival_rate + pos_signal_rate) / (service_rate + neg_signal_rate);
  }
};

// Classes used by compiled single-queue models.
inline constexpr int kClassCustomer = 0;
inline constexpr int kClassNegSignal = 1;
inline constexpr int kClassPosSignal = 2;

// Compiles the spec to a tagged CTMC on queue lengths 0..truncation with
// a reflecting cap (customer-adding arrivals at the cap are dropped).
CtmcModel compile(const SignalQueueSpec& spec, int truncation);

// Numerical check of the two reversibility conditions on the truncated
// chain: constancy of per-class arrival row sums, and constancy of the
// per-class departure rates beta_u recovered through the stationary
// distribution. Violations are max-minus-min over the interior; the
// outermost truncation level is excluded, where constancy cannot hold by
// construction.
struct QrReport {
  std::vector<double> arrival_rates;    // per class, interior median
  std::vector<double> departure_rates;  // beta_u per class, interior median
  double max_arrival_violation = 0.0;
  double max_departure_violation = 0.0;
  double truncation_tail_mass = 0.0;
};

QrReport check_qr(const SignalQueueSpec& spec, int truncation);

}  // namespace shardqn::qr
