#include "pcvx/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pcvx {

namespace {
std::atomic<int> override_threads{0};
}

int thread_count() {
  if (const int forced = override_threads.load(); forced > 0) return forced;
  if (const char* env = std::getenv("PCVX_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
      // fall through to the default
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_thread_count(int threads) { override_threads.store(threads > 0 ? threads : 0); }

}  // namespace pcvx
