#pragma once

#include <cstdint>
#include <vector>

namespace shardqn::comb {

// Exact 128-bit combinatorics with checked arithmetic. Overflow throws
// OverflowError instead of wrapping; the throughput formulas convert the
// results to double exactly once.
using uint128 = unsigned __int128;

uint128 checked_add(uint128 a, uint128 b);
uint128 checked_mul(uint128 a, uint128 b);
double to_double(uint128 v);

// Stirling number of the second kind: partitions of n objects into q
// non-empty blocks. stirling2(0,0) == 1, stirling2(n,0) == 0 for n > 0.
uint128 stirling2(int n, int q);

// Number of ordered destination tuples of length d over m shards that
// touch exactly i distinct shards other than the originating one:
// ((m-1)!/(m-i-1)!) * stirling2(d+1, i+1). Zero whenever i > d or
// i > m-1, so callers can sum over i without branching.
uint128 distinct_shard_sets(int m, int d, int i);

// Brute-force oracle: enumerates all m^d ordered destination tuples with
// a fixed originating shard and histograms the number of distinct foreign
// shards. result[i] = count of tuples touching exactly i foreign shards,
// i = 0..d. Guarded to m^d <= 10^7.
std::vector<uint128> enumerate_destination_sets(int m, int d);

}  // namespace shardqn::comb
