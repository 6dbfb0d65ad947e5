#include "hdg/flops.hpp"

namespace hdg::flops {
namespace {
thread_local bool t_enabled = false;
thread_local std::uint64_t t_count = 0;
}  // namespace

void enable(bool on) noexcept { t_enabled = on; }
bool enabled() noexcept { return t_enabled; }
void reset() noexcept { t_count = 0; }
std::uint64_t count() noexcept { return t_count; }
void add(std::uint64_t n) noexcept {
  if (t_enabled) t_count += n;
}

Scope::Scope() noexcept : previous_(t_enabled) {
  t_enabled = true;
  t_count = 0;
}
Scope::~Scope() { t_enabled = previous_; }
std::uint64_t Scope::count() const noexcept { return t_count; }

}  // namespace hdg::flops
