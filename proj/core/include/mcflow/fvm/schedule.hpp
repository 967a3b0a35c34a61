#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/mesh/mesh.hpp"
#include "mcflow/partition/two_level.hpp"

namespace mcflow {

/// Which cell of a face a task updates.
enum class FaceSide : std::uint8_t { owner = 1, neighbour = 2, both = 3 };

struct FaceTask {
  Label face = 0;
  FaceSide side = FaceSide::owner;
};

/// Per-region task lists executed concurrently, one region per worker.
struct SchedulePhase {
  std::vector<std::vector<FaceTask>> tasks;
};

/// Face work decomposition over contiguous cell regions.
///
/// The default schedule has two phases. In the first, every region walks the
/// faces whose owner it holds (internal then boundary, ascending) and updates
/// the owner side plus the face coefficients; in the second it walks the
/// internal faces whose neighbour it holds. Each region only writes its own
/// cells, and every cell sees its contributions in the same order for any
/// number of regions.
struct FaceSchedule {
  std::vector<CellRange> ranges;
  /// Internal faces with both cells in one region, per region.
  std::vector<std::vector<Label>> intra_faces;
  /// Internal faces crossing regions, ascending, with the regions involved.
  std::vector<Label> inter_faces;
  std::vector<Label> inter_owner_region;
  std::vector<Label> inter_neighbour_region;
  std::vector<SchedulePhase> phases;

  [[nodiscard]] Label n_regions() const noexcept { return static_cast<Label>(ranges.size()); }
  [[nodiscard]] double inter_fraction() const;
};

/// `ranges` must be contiguous, ascending and cover the mesh's cells.
FaceSchedule build_face_schedule(const UnstructuredMesh& mesh, std::span<const CellRange> ranges);
FaceSchedule build_face_schedule(const UnstructuredMesh& renumbered_mesh, const TwoLevelPartition& partition);

/// Records, per phase, which region wrote each cell, and counts writes from a
/// second region to a cell already written in the same phase.
class WriteProbe {
 public:
  explicit WriteProbe(Label n_cells);

  void begin_phase();
  void record(Label cell, Label region) noexcept;

  [[nodiscard]] std::int64_t conflicts() const noexcept { return conflicts_.load(); }
  [[nodiscard]] std::int64_t writes() const noexcept { return writes_.load(); }
  [[nodiscard]] int phases() const noexcept { return phases_; }

 private:
  std::unique_ptr<std::atomic<Label>[]> writer_;
  Label n_cells_;
  std::atomic<std::int64_t> conflicts_{0};
  std::atomic<std::int64_t> writes_{0};
  int phases_ = 0;
};

/// Runs `apply(face, side, region)` for every task of every phase, phases
/// separated by barriers. Regions are spread over the pool's workers.
void execute_schedule(const UnstructuredMesh& mesh, const FaceSchedule& schedule, ThreadPool* pool,
                      WriteProbe* probe, const std::function<void(Label face, FaceSide side, Label region)>& apply);

/// Runs `apply(region)` for every region (per-cell finishing work).
void execute_regions(const FaceSchedule& schedule, ThreadPool* pool, const std::function<void(Label region)>& apply);

}  // namespace mcflow
