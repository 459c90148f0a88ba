#include "slh/work.hpp"

namespace slh {

WorkTarget target_for(Difficulty diff) {
  if (diff.d == 0 || diff.scale == 0) {
    throw Error(Errc::bad_argument, "difficulty components must be positive");
  }
  unsigned __int128 product = (unsigned __int128)diff.d * diff.scale;
  WorkTarget t;
  if (product == 1) {
    t.all_pass = true;
    t.limit = Uint256::max();
    return t;
  }
  t.limit = div_2e256_by(product);
  return t;
}

double expected_attempts(Difficulty diff) {
  if (diff.d == 0 || diff.scale == 0) {
    throw Error(Errc::bad_argument, "difficulty components must be positive");
  }
  return double(diff.d) * double(diff.scale);
}

}  // namespace slh
