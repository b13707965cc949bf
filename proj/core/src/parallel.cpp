#include <wext/parallel.hpp>

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wext {

int kernel_threads() {
  static const int n = [] {
    const char* env = std::getenv("WEXT_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    if (v < 1) return 1;
    const int hw = int(std::thread::hardware_concurrency());
    return std::min(v, std::max(1, hw));
  }();
  return n;
}

void parallel_chunks(std::ptrdiff_t n,
                     const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
  const int nt = kernel_threads();
  if (nt <= 1 || n < 4096) {
    fn(0, n);
    return;
  }
  const std::ptrdiff_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> workers;
  workers.reserve(size_t(nt));
  for (std::ptrdiff_t begin = 0; begin < n; begin += chunk) {
    const std::ptrdiff_t end = std::min(n, begin + chunk);
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace wext
