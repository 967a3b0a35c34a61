#pragma once

#include <cstdint>

namespace mcflow {

/// Running count of floating-point operations. Kernels add their analytic
/// operation counts once per call, from the calling thread, so totals are
/// identical across repeated runs and thread counts.
class FlopCounter {
 public:
  void add(std::uint64_t flops) noexcept { count_ += flops; }
  void reset() noexcept { count_ = 0; }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

  FlopCounter& operator+=(const FlopCounter& other) noexcept {
    count_ += other.count_;
    return *this;
  }

 private:
  std::uint64_t count_ = 0;
};

inline void add_flops(FlopCounter* counter, std::uint64_t flops) noexcept {
  if (counter != nullptr) counter->add(flops);
}

}  // namespace mcflow
