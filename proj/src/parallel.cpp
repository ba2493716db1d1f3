#include "lsbound/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lsbound {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LSBOUND_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace lsbound
