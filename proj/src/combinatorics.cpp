#include "shardqn/combinatorics.hpp"

#include "shardqn/errors.hpp"

namespace shardqn::comb {

uint128 checked_add(uint128 a, uint128 b) {
  uint128 r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("128-bit addition overflow");
  return r;
}

uint128 checked_mul(uint128 a, uint128 b) {
  uint128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("128-bit multiplication overflow");
  return r;
}

double to_double(uint128 v) {
  // Split at 64 bits; both halves convert exactly.
  const double hi = static_cast<double>(static_cast<std::uint64_t>(v >> 64));
  const double lo = static_cast<double>(static_cast<std::uint64_t>(v));
  return hi * 0x1.0p64 + lo;
}

uint128 stirling2(int n, int q) {
  if (n < 0 || q < 0) throw InvalidParams("stirling2 arguments must be >= 0");
  if (q > n) return 0;
  if (q == 0) return n == 0 ? 1 : 0;
  // Row recurrence S(r,j) = j*S(r-1,j) + S(r-1,j-1); exact and free of the
  // cancellation in the alternating inclusion-exclusion sum.
  std::vector<uint128> row(static_cast<std::size_t>(q) + 1, 0);
  row[0] = 1;  // S(0,0)
  for (int r = 1; r <= n; ++r) {
    const int jmax = std::min(r, q);
    for (int j = jmax; j >= 1; --j)
      row[j] = checked_add(checked_mul(static_cast<uint128>(j), row[j]), row[j - 1]);
    row[0] = 0;
  }
  return row[q];
}

uint128 distinct_shard_sets(int m, int d, int i) {
  if (m < 1 || d < 1 || i < 0) throw InvalidParams("distinct_shard_sets: m >= 1, d >= 1, i >= 0");
  if (i > d || i > m - 1) return 0;
  uint128 falling = 1;
  for (int z = 1; z <= i; ++z)
    falling = checked_mul(falling, static_cast<uint128>(m - z));
  return checked_mul(falling, stirling2(d + 1, i + 1));
}

std::vector<uint128> enumerate_destination_sets(int m, int d) {
  if (m < 1 || d < 1) throw InvalidParams("enumerate_destination_sets: m >= 1, d >= 1");
  double total = 1.0;
  for (int k = 0; k < d; ++k) total *= m;
  if (total > 1e7) throw GuardViolation("enumerate_destination_sets: m^d exceeds 10^7");

  std::vector<uint128> hist(static_cast<std::size_t>(d) + 1, 0);
  std::vector<int> tuple(static_cast<std::size_t>(d), 0);  // shard 0 originates
  while (true) {
    int distinct = 0;
    for (int k = 0; k < d; ++k) {
      const int s = tuple[k];
      if (s == 0) continue;
      bool repeat = false;
      for (int j = 0; j < k; ++j)
        if (tuple[j] == s) { repeat = true; break; }
      if (!repeat) ++distinct;
    }
    hist[distinct] = checked_add(hist[distinct], 1);
    int pos = d - 1;
    while (pos >= 0 && ++tuple[pos] == m) tuple[pos--] = 0;
    if (pos < 0) break;
  }
  return hist;
}

}  // namespace shardqn::comb
