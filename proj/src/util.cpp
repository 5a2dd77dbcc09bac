#include "wdmdiff/util.hpp"

#include <omp.h>

#include <charconv>
#include <system_error>

#include "wdmdiff/errors.hpp"

namespace wdmdiff {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("not a number: '" + text + "'");
  return v;
}

long parse_long(const std::string& text) {
  long v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("not an integer: '" + text + "'");
  return v;
}

uint64_t parse_u64(const std::string& text) {
  uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("not an unsigned integer: '" + text + "'");
  return v;
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

void parallel_for_impl(long n, void (*fn)(long, void*), void* ctx) {
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) fn(i, ctx);
}

}  // namespace wdmdiff
