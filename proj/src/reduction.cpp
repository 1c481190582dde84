#include "qvol/reduction.hpp"

#include <cmath>
#include <stdexcept>

namespace qvol::reduction {

int mem_s(const Vector& x, const SearchOracle& oracle) {
  if (x.size() != oracle.n())
    throw std::invalid_argument("mem_s: dimension mismatch");
  int flagged = -1;
  int weight = 0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] > 2.0 || x[i] < 0.0) return 0;
    if (x[i] > 1.0) {  // boundary x_i = 1 counts as y_i = 0
      ++weight;
      flagged = i;
      if (weight >= 2) return 0;
    }
  }
  if (weight == 1) return oracle.query(flagged);
  return 1;
}

int volume_to_search(
    const SearchOracle& oracle,
    const std::function<double(const std::function<int(const Vector&)>&, int)>&
        volume_estimator) {
  auto membership = [&oracle](const Vector& x) { return mem_s(x, oracle); };
  double vol = volume_estimator(membership, oracle.n());
  long claim = std::lround(std::log2(vol));
  if (claim < 0) claim = 0;
  if (claim > 1) claim = 1;
  return static_cast<int>(claim);
}

}  // namespace qvol::reduction
