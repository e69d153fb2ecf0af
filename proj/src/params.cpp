#include "shardqn/params.hpp"

#include <cmath>
#include <sstream>

#include "shardqn/errors.hpp"

namespace shardqn {

std::vector<std::string> validate(const ShardingParams& p) {
  std::vector<std::string> v;
  if (p.m < 1) v.push_back("m >= 1");
  if (p.b < 1) v.push_back("b >= 1");
  if (!(p.mu_p > 0.0) || !std::isfinite(p.mu_p)) v.push_back("mu_p > 0 and finite");
  if (!(p.mu_nc > 0.0) || !std::isfinite(p.mu_nc)) v.push_back("mu_nc > 0 and finite");
  if (!(p.zeta > 0.0) || !std::isfinite(p.zeta)) v.push_back("zeta > 0 and finite");
  if (p.dest_dist.empty()) {
    v.push_back("dest_dist non-empty");
  } else {
    double sum = 0.0;
    bool neg = false, nonfinite = false;
    for (double w : p.dest_dist) {
      if (!std::isfinite(w)) nonfinite = true;
      if (w < 0.0) neg = true;
      sum += w;
    }
    if (nonfinite) v.push_back("dest_dist entries finite");
    if (neg) v.push_back("dest_dist entries >= 0");
    if (!nonfinite && std::fabs(sum - 1.0) > 1e-12)
      v.push_back("dest_dist sums to 1 within 1e-12");
  }
  if (!(p.gamma > 0.0) || p.gamma > 1.0 || !std::isfinite(p.gamma))
    v.push_back("gamma in (0,1]");
  if (p.mu_nh && (!(*p.mu_nh > 0.0) || !std::isfinite(*p.mu_nh)))
    v.push_back("mu_nh > 0 and finite");
  return v;
}

void require_valid(const ShardingParams& p) {
  auto v = validate(p);
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid sharding parameters:";
  for (const auto& s : v) os << " [" << s << "]";
  throw InvalidParams(os.str());
}

}  // namespace shardqn
