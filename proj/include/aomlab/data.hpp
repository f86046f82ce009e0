#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aomlab/model.hpp"

namespace aomlab {

enum class Task { cls, reg, toy };

struct Dataset {
  std::vector<Example> examples;
  Task task = Task::reg;

  std::size_t size() const { return examples.size(); }
  bool operator==(const Dataset&) const = default;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

/// Two training sets of equal size that differ only at `changed_index`.
struct TwinPair {
  Dataset s;
  Dataset s_prime;
  std::size_t changed_index = 0;
};

inline constexpr std::size_t kPoolSize = 151;
inline constexpr std::size_t kTrainSize = 31;

/// Three isotropic unit-variance Gaussian blobs centred at (0,0), (6,0), (0,6)
/// with 51/50/50 points, shuffled into 31 train / 120 test.
SplitDataset gen_blobs(std::uint64_t seed);

/// x uniform on [-1,1]^2, y = x1^2 + x2^2 + N(0, 0.5^2); 31 train / 120 test.
SplitDataset gen_regression(std::uint64_t seed);

/// Scalar points z ~ N(0, 1) for the pseudo-Huber toy; 31 train / 120 test.
SplitDataset gen_toy(std::uint64_t seed);

SplitDataset generate(Task task, std::uint64_t seed);

/// One further draw from the task's generating distribution, used as the
/// held-out replacement point of a twin pair.
Example draw_extra(Task task, std::uint64_t seed);

/// s' is `train` itself; s is `train` with a uniformly chosen index replaced
/// by `replacement`.
TwinPair make_twin(const Dataset& train, const Example& replacement, std::uint64_t seed);

/// CSV with header `f1,...,fd,target` and 17-significant-digit values.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path, Task task);

const char* task_name(Task task);

}  // namespace aomlab
