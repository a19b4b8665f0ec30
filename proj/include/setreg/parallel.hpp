#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace setreg::parallel {

/// Worker count used by sweeps; 0 restores the hardware default.
void set_threads(unsigned n);
unsigned threads();

/// Calls fn(i) for i in [0, n) on static chunks. fn must only write to
/// slots owned by i.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Smallest i in [0, n) with pred(i), independent of the thread count.
std::optional<std::size_t> find_first(
    std::size_t n, const std::function<bool(std::size_t)>& pred);

}  // namespace setreg::parallel
