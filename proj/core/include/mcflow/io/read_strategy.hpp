#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcflow/io/collated.hpp"

namespace mcflow {

enum class ReadStrategy { master_scatter, parallel, grouped };

std::string to_string(ReadStrategy s);
ReadStrategy parse_read_strategy(const std::string& text);

struct ReadOptions {
  ReadStrategy strategy = ReadStrategy::grouped;
  /// Ranks per group for the grouped strategy; 0 selects round(sqrt(P)).
  int group_size = 0;
  /// Simulated cost of every open, held while the file is open.
  double open_latency_ms = 0.0;
};

struct ReadStats {
  int opens = 0;
  /// Largest number of simultaneously open handles.
  int peak_concurrent_opens = 0;
  int groups = 0;
  std::uint64_t bytes_read = 0;
  /// Bytes copied from a reading rank to other ranks.
  std::uint64_t bytes_scattered = 0;
  /// Bytes that passed through each reading rank (read by it), by rank id;
  /// zero for ranks that did not read.
  std::vector<std::uint64_t> bytes_through_rank;
  double seconds = 0.0;
};

struct ReadResult {
  std::vector<Payload> payloads;
  ReadStats stats;
};

/// Group size used for P ranks when `requested` is 0.
int default_group_size(int n_ranks);

/// Delivers every rank's payload of a collated file using one emulated
/// worker per rank.
///  - master_scatter: rank 0 reads everything and copies each payload out.
///  - parallel: every rank reads its own extent.
///  - grouped: consecutive ranks form groups; the first rank of a group reads
///    the group's merged extent in one request and hands out the pieces.
ReadResult read_with_strategy(const std::string& path, const IndexSidecar& index, int n_ranks,
                              const ReadOptions& options = {});

}  // namespace mcflow
