#include "aomlab/data.hpp"

#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

#include "aomlab/csv.hpp"
#include "aomlab/error.hpp"
#include "aomlab/rng.hpp"

namespace aomlab {

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6e6f697365;  // "noise"
constexpr std::uint64_t kSplitSalt = 0x73706c6974;  // "split"
constexpr std::uint64_t kExtraSalt = 0x6578747261;  // "extra"

constexpr std::array<std::array<double, 2>, 3> kBlobCenters{{{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}}};

Example blob_point(Rng& rng, std::size_t label) {
  const auto& c = kBlobCenters[label];
  Example ex;
  ex.features = {rng.normal(c[0], 1.0), rng.normal(c[1], 1.0)};
  ex.target = static_cast<double>(label);
  return ex;
}

Example regression_point(Rng& rng) {
  Example ex;
  const double x1 = rng.uniform(-1.0, 1.0);
  const double x2 = rng.uniform(-1.0, 1.0);
  ex.features = {x1, x2};
  ex.target = x1 * x1 + x2 * x2 + rng.normal(0.0, 0.5);
  return ex;
}

Example toy_point(Rng& rng) {
  Example ex;
  ex.features = {rng.normal()};
  return ex;
}

SplitDataset split(std::vector<Example> pool, Task task, std::uint64_t seed) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kSplitSalt));
  rng.shuffle(order.begin(), order.end());

  SplitDataset out;
  out.train.task = task;
  out.test.task = task;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < kTrainSize ? out.train : out.test;
    dst.examples.push_back(std::move(pool[order[i]]));
  }
  return out;
}

}  // namespace

SplitDataset gen_blobs(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kNoiseSalt));
  std::vector<Example> pool;
  pool.reserve(kPoolSize);
  for (std::size_t i = 0; i < kPoolSize; ++i) {
    // 151 = 51 + 50 + 50
    const std::size_t label = i < 51 ? 0 : (i < 101 ? 1 : 2);
    pool.push_back(blob_point(rng, label));
  }
  return split(std::move(pool), Task::cls, seed);
}

SplitDataset gen_regression(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kNoiseSalt));
  std::vector<Example> pool;
  pool.reserve(kPoolSize);
  for (std::size_t i = 0; i < kPoolSize; ++i) pool.push_back(regression_point(rng));
  return split(std::move(pool), Task::reg, seed);
}

SplitDataset gen_toy(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kNoiseSalt));
  std::vector<Example> pool;
  pool.reserve(kPoolSize);
  for (std::size_t i = 0; i < kPoolSize; ++i) pool.push_back(toy_point(rng));
  return split(std::move(pool), Task::toy, seed);
}

SplitDataset generate(Task task, std::uint64_t seed) {
  switch (task) {
    case Task::cls: return gen_blobs(seed);
    case Task::reg: return gen_regression(seed);
    case Task::toy: return gen_toy(seed);
  }
  fail(ErrorCode::invalid_argument, "unknown task");
}

Example draw_extra(Task task, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kExtraSalt));
  switch (task) {
    case Task::cls: {
      const auto label = static_cast<std::size_t>(rng.below(3));
      return blob_point(rng, label);
    }
    case Task::reg: return regression_point(rng);
    case Task::toy: return toy_point(rng);
  }
  fail(ErrorCode::invalid_argument, "unknown task");
}

TwinPair make_twin(const Dataset& train, const Example& replacement, std::uint64_t seed) {
  if (train.size() < 2) {
    fail(ErrorCode::invalid_argument, "make_twin: training set needs at least 2 examples");
  }
  Rng rng(seed);
  TwinPair twin;
  twin.changed_index = static_cast<std::size_t>(rng.below(train.size()));
  if (train.examples[twin.changed_index] == replacement) {
    fail(ErrorCode::invalid_argument, "make_twin: replacement equals the example it replaces");
  }
  twin.s_prime = train;
  twin.s = train;
  twin.s.examples[twin.changed_index] = replacement;
  return twin;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  if (data.examples.empty()) fail(ErrorCode::invalid_argument, "write_dataset_csv: empty dataset");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  const std::size_t d = data.examples.front().features.size();
  for (std::size_t i = 0; i < d; ++i) out << 'f' << (i + 1) << ',';
  out << "target\n";
  for (const auto& ex : data.examples) {
    for (double f : ex.features) out << format_real(f) << ',';
    out << format_real(ex.target) << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

Dataset read_dataset_csv(const std::string& path, Task task) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.back() != "target") {
    fail(ErrorCode::invalid_argument, "'" + path + "': last column must be 'target'");
  }
  for (std::size_t i = 0; i + 1 < table.header.size(); ++i) {
    if (table.header[i] != "f" + std::to_string(i + 1)) {
      fail(ErrorCode::invalid_argument, "'" + path + "': unexpected column '" + table.header[i] + "'");
    }
  }
  Dataset data;
  data.task = task;
  for (const auto& row : table.rows) {
    Example ex;
    ex.features.assign(row.begin(), row.end() - 1);
    ex.target = row.back();
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) fail(ErrorCode::invalid_argument, "'" + path + "': no rows");
  return data;
}

const char* task_name(Task task) {
  switch (task) {
    case Task::cls: return "cls";
    case Task::reg: return "reg";
    case Task::toy: return "toy";
  }
  return "?";
}

}  // namespace aomlab
