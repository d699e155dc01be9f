#include "itest/config.hpp"

#include <thread>

namespace itest {

unsigned resolve_parallelism(unsigned requested) {
  if (requested > 0) return requested;
  unsigned cpus = std::thread::hardware_concurrency();
  return cpus > 0 ? cpus : 1;
}

}  // namespace itest
