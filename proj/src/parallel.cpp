#include "gmentropy/parallel.hpp"

#include <algorithm>

namespace gmentropy {

namespace {
std::atomic<unsigned> g_thread_cap{0};
}

void set_max_threads(unsigned n) { g_thread_cap.store(n); }

unsigned max_threads() {
  const unsigned cap = g_thread_cap.load();
  if (cap != 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace gmentropy
