#pragma once

#include <cstdint>
#include <string>

namespace wdmdiff {

// Shortest round-trip decimal form (std::to_chars); locale-free, so repeated
// runs serialize to identical bytes and parsing recovers the exact double.
std::string fmt_double(double v);
double parse_double(const std::string& text);  // throws ConfigError on junk
long parse_long(const std::string& text);
uint64_t parse_u64(const std::string& text);

void set_thread_count(int n);  // clamped at 1; 0 keeps the current setting
int thread_count();

// Static-scheduled parallel loop. Callers keep per-index output slots, so
// results are bitwise independent of the thread count.
void parallel_for_impl(long n, void (*fn)(long, void*), void* ctx);

template <typename F>
void parallel_for(long n, F&& f) {
  auto trampoline = [](long i, void* ctx) { (*static_cast<F*>(ctx))(i); };
  parallel_for_impl(n, trampoline, &f);
}

}  // namespace wdmdiff
