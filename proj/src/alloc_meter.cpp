// Counting global allocator, linked into the benchmark-bearing binaries
// only. Tracks total bytes requested; frees are not subtracted (the metric
// is allocation pressure, not residency).

#include <cstdlib>
#include <new>

#include "rv/bench.hpp"

namespace {
void* counted_alloc(std::size_t n) {
  rv::bench::detail::g_alloc_bytes.fetch_add(n, std::memory_order_relaxed);
  if (void* p = std::malloc(n ? n : 1)) return p;
  throw std::bad_alloc();
}
}  // namespace

void* operator new(std::size_t n) { return counted_alloc(n); }
void* operator new[](std::size_t n) { return counted_alloc(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }
