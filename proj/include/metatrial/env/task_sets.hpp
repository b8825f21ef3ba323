#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "metatrial/core/rng.hpp"
#include "metatrial/env/types.hpp"

namespace metatrial {

// Training seeds have the top bit clear, held-out seeds have it set, so the
// two sets never overlap.
inline constexpr std::uint64_t kHeldOutSeedBit = 1ULL << 63;

inline std::uint64_t training_seed(std::uint64_t root, int epoch, int index) {
  return derive_seed(root, {0x5452ULL, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(index)}) &
         ~kHeldOutSeedBit;
}

inline bool is_held_out_seed(std::uint64_t seed) { return (seed & kHeldOutSeedBit) != 0; }

using TaskSampler = std::function<TaskInstance(int epoch, int index)>;

inline TaskSampler training_sampler(TaskInstance shape, std::uint64_t root) {
  return [shape, root](int epoch, int index) {
    TaskInstance t = shape;
    t.seed = training_seed(root, epoch, index);
    return t;
  };
}

// `count` held-out tasks of the given shape, seeds base..base+count-1 in the
// held-out range.
inline std::vector<TaskInstance> held_out_tasks(TaskInstance shape, int count, std::uint64_t base = 0) {
  std::vector<TaskInstance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    TaskInstance t = shape;
    t.seed = kHeldOutSeedBit | (base + static_cast<std::uint64_t>(i));
    out.push_back(t);
  }
  return out;
}

}  // namespace metatrial
