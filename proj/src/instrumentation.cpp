#include "ctvrpca/instrumentation.hpp"

namespace ctvrpca {

OpCounts& thread_op_counts() {
  thread_local OpCounts counts;
  return counts;
}

}  // namespace ctvrpca
