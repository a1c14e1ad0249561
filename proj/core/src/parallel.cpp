#include "kfp/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kfp {

unsigned default_workers() {
  if (const char* env = std::getenv("KFP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace kfp
