#include "shardqn/ctmc.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "shardqn/errors.hpp"

namespace shardqn::qr {

namespace {

constexpr int kGthLimit = 2048;
constexpr double kResidualCap = 1e-12;

// Off-diagonal rate matrix (self-loops dropped), duplicate edges merged.
Eigen::MatrixXd off_diagonal_dense(const CtmcModel& m) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.n_states, m.n_states);
  for (const auto& t : m.transitions)
    if (t.from != t.to) a(t.from, t.to) += t.rate;
  return a;
}

double residual_inf(const CtmcModel& m, const Eigen::VectorXd& pi) {
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(m.n_states);
  for (const auto& t : m.transitions) {
    if (t.from == t.to) continue;
    flow(t.to) += pi(t.from) * t.rate;
    flow(t.from) -= pi(t.from) * t.rate;
  }
  return flow.cwiseAbs().maxCoeff();
}

// Grassmann-Taksar-Heyman elimination: only additions and multiplications
// of nonnegative numbers, so even components of size ~1e-60 keep full
// relative accuracy, which the reversibility checks divide by.
Eigen::VectorXd solve_gth(const CtmcModel& m) {
  const int n = m.n_states;
  Eigen::MatrixXd a = off_diagonal_dense(m);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int k = n - 1; k >= 1; --k) {
    double sk = 0.0;
    for (int j = 0; j < k; ++j) sk += a(k, j);
    if (sk <= 0.0)
      throw SingularChain("state cannot reach the rest of the chain; no single closed class");
    s(k) = sk;
    for (int j = 0; j < k; ++j) a(k, j) /= sk;
    for (int i = 0; i < k; ++i) {
      const double f = a(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < k; ++j)
        if (j != i) a(i, j) += f * a(k, j);
    }
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  pi(0) = 1.0;
  for (int k = 1; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i) acc += pi(i) * a(i, k);
    pi(k) = acc / s(k);
  }
  pi /= pi.sum();
  return pi;
}

Eigen::VectorXd solve_sparse_lu(const CtmcModel& m) {
  const int n = m.n_states;
  // Q^T pi = 0 with the last balance equation replaced by normalization.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.transitions.size() * 2 + static_cast<std::size_t>(n));
  for (const auto& t : m.transitions) {
    if (t.from == t.to) continue;
    if (t.to != n - 1) trip.emplace_back(t.to, t.from, t.rate);
    if (t.from != n - 1) trip.emplace_back(t.from, t.from, -t.rate);
  }
  for (int j = 0; j < n; ++j) trip.emplace_back(n - 1, j, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw SingularChain("sparse factorization failed; chain not irreducible?");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !pi.allFinite())
    throw SingularChain("sparse solve failed");
  // Round tiny negative leakage back into the simplex.
  for (int i = 0; i < n; ++i)
    if (pi(i) < 0.0) pi(i) = 0.0;
  pi /= pi.sum();
  return pi;
}

Eigen::VectorXd solve_power(const CtmcModel& m) {
  const int n = m.n_states;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (const auto& t : m.transitions)
    if (t.from != t.to) diag(t.from) += t.rate;
  const double unif = diag.maxCoeff() * 1.05 + 1e-12;
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd next(n);
  for (long iter = 0; iter < 2000000; ++iter) {
    next = pi - pi.cwiseProduct(diag) / unif;
    for (const auto& t : m.transitions)
      if (t.from != t.to) next(t.to) += pi(t.from) * t.rate / unif;
    next /= next.sum();
    const double delta = (next - pi).cwiseAbs().maxCoeff();
    pi.swap(next);
    if (delta < 1e-16 && iter > 100) break;
  }
  return pi;
}

}  // namespace

Eigen::VectorXd stationary(const CtmcModel& model, StationaryMethod method) {
  if (model.n_states <= 0) throw InvalidParams("empty state space");
  if (method == StationaryMethod::Auto)
    method = model.n_states <= kGthLimit ? StationaryMethod::Gth
                                         : StationaryMethod::SparseLu;
  Eigen::VectorXd pi;
  switch (method) {
    case StationaryMethod::Gth: pi = solve_gth(model); break;
    case StationaryMethod::SparseLu: pi = solve_sparse_lu(model); break;
    case StationaryMethod::Power: pi = solve_power(model); break;
    default: pi = solve_gth(model); break;
  }
  double r = residual_inf(model, pi);
  if (r >= kResidualCap && method == StationaryMethod::SparseLu) {
    pi = solve_power(model);
    r = residual_inf(model, pi);
  }
  if (r >= kResidualCap)
    throw NonConvergence("stationary residual " + std::to_string(r) + " above 1e-12");
  return pi;
}

Eigen::MatrixXd assemble_generator(const CtmcModel& model) {
  Eigen::MatrixXd q = off_diagonal_dense(model);
  for (int i = 0; i < model.n_states; ++i) {
    double row = 0.0;
    for (int j = 0; j < model.n_states; ++j)
      if (j != i) row += q(i, j);
    q(i, i) = -row;
  }
  return q;
}

}  // namespace shardqn::qr
