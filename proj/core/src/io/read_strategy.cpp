#include "mcflow/io/read_strategy.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <latch>
#include <memory>
#include <mutex>
#include <thread>

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {

class OpenTracker {
 public:
  explicit OpenTracker(double latency_ms) : latency_ms_(latency_ms) {}

  // Reads [offset, offset + out.size()) as one open-read-close request.
  void read(const std::string& path, std::uint64_t offset, std::span<std::byte> out) {
    const int now = open_.fetch_add(1) + 1;
    opens_.fetch_add(1);
    int peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
    try {
      if (latency_ms_ > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(latency_ms_));
      detail::read_file_range(path, offset, out);
    } catch (...) {
      open_.fetch_sub(1);
      throw;
    }
    open_.fetch_sub(1);
    bytes_.fetch_add(out.size());
  }

  int opens() const { return opens_.load(); }
  int peak() const { return peak_.load(); }
  std::uint64_t bytes() const { return bytes_.load(); }

 private:
  double latency_ms_;
  std::atomic<int> open_{0};
  std::atomic<int> opens_{0};
  std::atomic<int> peak_{0};
  std::atomic<std::uint64_t> bytes_{0};
};

}  // namespace

std::string to_string(ReadStrategy s) {
  switch (s) {
    case ReadStrategy::master_scatter:
      return "master";
    case ReadStrategy::parallel:
      return "parallel";
    case ReadStrategy::grouped:
      return "grouped";
  }
  return "?";
}

ReadStrategy parse_read_strategy(const std::string& text) {
  if (text == "master" || text == "master_scatter") return ReadStrategy::master_scatter;
  if (text == "parallel") return ReadStrategy::parallel;
  if (text == "grouped") return ReadStrategy::grouped;
  throw ConfigError("unknown read strategy '" + text + "'");
}

int default_group_size(int n_ranks) {
  if (n_ranks < 1) throw ConfigError("rank count must be positive");
  return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_ranks)))));
}

ReadResult read_with_strategy(const std::string& path, const IndexSidecar& index, int n_ranks,
                              const ReadOptions& options) {
  if (n_ranks < 1) throw ConfigError("rank count must be positive");
  if (index.records.size() != static_cast<std::size_t>(n_ranks)) {
    throw FormatError(path + ": index has " + std::to_string(index.records.size()) + " records for " +
                      std::to_string(n_ranks) + " ranks");
  }
  validate_index(index, detail::file_size(path));

  const auto P = static_cast<std::size_t>(n_ranks);
  int g = 1;
  switch (options.strategy) {
    case ReadStrategy::master_scatter:
      g = n_ranks;
      break;
    case ReadStrategy::parallel:
      g = 1;
      break;
    case ReadStrategy::grouped:
      g = options.group_size == 0 ? default_group_size(n_ranks) : options.group_size;
      if (g < 1 || g > n_ranks) throw ConfigError("group size must be in [1, " + std::to_string(n_ranks) + "]");
      break;
  }
  const auto G = static_cast<std::size_t>(g);
  const std::size_t n_groups = (P + G - 1) / G;

  ReadResult result;
  result.payloads.resize(P);
  result.stats.groups = static_cast<int>(n_groups);
  result.stats.bytes_through_rank.assign(P, 0);
  for (std::size_t r = 0; r < P; ++r) result.payloads[r].resize(index.records[r].length);

  OpenTracker tracker(options.open_latency_ms);
  std::atomic<std::uint64_t> scattered{0};
  std::latch start(static_cast<std::ptrdiff_t>(P));
  std::vector<std::unique_ptr<std::latch>> group_done;
  for (std::size_t k = 0; k < n_groups; ++k) group_done.push_back(std::make_unique<std::latch>(1));
  std::mutex error_mutex;
  std::exception_ptr error;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> ranks;
  ranks.reserve(P);
  for (std::size_t rank = 0; rank < P; ++rank) {
    ranks.emplace_back([&, rank] {
      start.arrive_and_wait();
      const std::size_t group = rank / G;
      const std::size_t first = group * G;
      const std::size_t last = std::min(P, first + G);
      if (rank == first) {
        try {
          const std::uint64_t begin = index.records[first].offset;
          const std::uint64_t end = index.records[last - 1].offset + index.records[last - 1].length;
          Payload merged(end - begin);
          tracker.read(path, begin, merged);
          result.stats.bytes_through_rank[rank] = merged.size();
          for (std::size_t m = first; m < last; ++m) {
            const auto& rec = index.records[m];
            std::copy_n(merged.begin() + static_cast<std::ptrdiff_t>(rec.offset - begin), rec.length,
                        result.payloads[m].begin());
            if (m != rank) scattered.fetch_add(rec.length);
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
        group_done[group]->count_down();
      } else {
        // Members receive their piece from the group leader.
        group_done[group]->wait();
      }
    });
  }
  for (auto& t : ranks) t.join();
  if (error) std::rethrow_exception(error);

  result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.stats.opens = tracker.opens();
  result.stats.peak_concurrent_opens = tracker.peak();
  result.stats.bytes_read = tracker.bytes();
  result.stats.bytes_scattered = scattered.load();
  return result;
}

}  // namespace mcflow
