#pragma once

#include <functional>
#include <string>

namespace icmbayes {

inline constexpr const char* kVersion = "1.0.0";

// 17 significant digits: enough for exact round-trip of any 64-bit float.
// Locale-independent.
std::string format_double(double v);

// Static partition of [0, n) across worker threads; fn(i) must only touch
// state owned by index i so results cannot depend on scheduling.
// threads == 0 means hardware concurrency, threads == 1 runs inline.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace icmbayes
