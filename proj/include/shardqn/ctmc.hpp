#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shardqn::qr {

enum class EventKind { Arrival, Departure, Internal };

// One tagged transition of a queueing CTMC. Self-loops (from == to) carry
// event semantics for the reversibility checks but do not enter the
// generator. An arrival that instantaneously triggers a departure carries
// the triggered class in `triggered` (-1 otherwise).
struct Transition {
  int from = 0;
  int to = 0;
  double rate = 0.0;
  EventKind kind = EventKind::Internal;
  int cls = -1;
  int triggered = -1;
};

// Finite CTMC over an enumerated state space with every transition tagged
// by (kind, class). `dims` optionally factorizes the state index
// row-major into per-queue coordinates for marginalization.
struct CtmcModel {
  int n_states = 0;
  std::vector<std::string> class_names;
  std::vector<Transition> transitions;
  std::vector<int> dims;
};

enum class StationaryMethod { Auto, Gth, SparseLu, Power };

// Stationary distribution of the truncated chain: solves pi Q = 0,
// sum pi = 1 with ||pi Q||_inf < 1e-12. Dense GTH elimination (no
// subtractions, componentwise-accurate) for small chains, sparse LU with
// a uniformized power-iteration fallback for larger ones. Throws
// SingularChain when the reachable set is not a single closed class.
Eigen::VectorXd stationary(const CtmcModel& model,
                           StationaryMethod method = StationaryMethod::Auto);

// Dense generator with the diagonal assembled as the negated off-diagonal
// row sum, so rows sum to zero exactly. Intended for tests and small
// chains only.
Eigen::MatrixXd assemble_generator(const CtmcModel& model);

}  // namespace shardqn::qr
