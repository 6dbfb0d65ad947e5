#pragma once

#include <cstdint>

namespace hdg::flops {

// Floating-point operation counter for the tensor kernels. Every kernel
// reports the exact number of multiplications and additions its loops
// perform; nothing is sampled or timed. Counting is off by default and
// costs one branch per kernel call when disabled.
//
// The counter is thread-local: enable it on the thread that applies the
// operator (counted runs are always single-threaded).

void enable(bool on) noexcept;
[[nodiscard]] bool enabled() noexcept;
void reset() noexcept;
[[nodiscard]] std::uint64_t count() noexcept;
void add(std::uint64_t n) noexcept;

/// Enables counting for the lifetime of the guard and restores the previous
/// state afterwards. The count is reset on entry.
class Scope {
 public:
  Scope() noexcept;
  ~Scope();
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  [[nodiscard]] std::uint64_t count() const noexcept;

 private:
  bool previous_;
};

}  // namespace hdg::flops
