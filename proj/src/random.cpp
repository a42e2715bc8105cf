#include "reclab/random.hpp"

namespace reclab {

static_assert(mix64(0) == 0, "SplitMix64 finalizer fixes zero");
static_assert(derive_seed(1, 0) != derive_seed(1, 1));

}  // namespace reclab
