#include "hlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hlab {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HLAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace hlab
