#include "mcflow/fvm/schedule.hpp"

#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {

double FaceSchedule::inter_fraction() const {
  std::size_t intra = 0;
  for (const auto& l : intra_faces) intra += l.size();
  const std::size_t total = intra + inter_faces.size();
  return total == 0 ? 0.0 : static_cast<double>(inter_faces.size()) / static_cast<double>(total);
}

FaceSchedule build_face_schedule(const UnstructuredMesh& mesh, std::span<const CellRange> ranges) {
  const auto t = static_cast<Label>(ranges.size());
  if (t < 1) throw DimensionError("schedule needs at least one region");
  Label expect = 0;
  for (const auto& r : ranges) {
    if (r.begin != expect || r.end < r.begin) throw DimensionError("regions must be contiguous and ascending");
    expect = r.end;
  }
  if (expect != mesh.n_cells()) throw DimensionError("regions do not cover the mesh");

  std::vector<Label> region(static_cast<std::size_t>(mesh.n_cells()));
  for (Label i = 0; i < t; ++i) {
    for (Label c = ranges[i].begin; c < ranges[i].end; ++c) region[c] = i;
  }

  FaceSchedule s;
  s.ranges.assign(ranges.begin(), ranges.end());
  s.intra_faces.resize(static_cast<std::size_t>(t));
  s.phases.resize(2);
  s.phases[0].tasks.resize(static_cast<std::size_t>(t));
  s.phases[1].tasks.resize(static_cast<std::size_t>(t));
  const auto own = mesh.owner();
  const auto nb = mesh.neighbour();
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) {
    const Label ro = region[own[f]], rn = region[nb[f]];
    if (ro == rn) {
      s.intra_faces[ro].push_back(f);
    } else {
      s.inter_faces.push_back(f);
      s.inter_owner_region.push_back(ro);
      s.inter_neighbour_region.push_back(rn);
    }
    s.phases[0].tasks[ro].push_back({f, FaceSide::owner});
    s.phases[1].tasks[rn].push_back({f, FaceSide::neighbour});
  }
  for (Label f = mesh.n_internal_faces(); f < mesh.n_faces(); ++f) {
    s.phases[0].tasks[region[own[f]]].push_back({f, FaceSide::owner});
  }
  return s;
}

FaceSchedule build_face_schedule(const UnstructuredMesh& renumbered_mesh, const TwoLevelPartition& partition) {
  if (partition.n_cells() != renumbered_mesh.n_cells()) throw DimensionError("partition and mesh sizes differ");
  return build_face_schedule(renumbered_mesh, partition.ranges);
}

WriteProbe::WriteProbe(Label n_cells) : writer_(new std::atomic<Label>[static_cast<std::size_t>(n_cells)]), n_cells_(n_cells) {
  for (Label c = 0; c < n_cells_; ++c) writer_[static_cast<std::size_t>(c)].store(-1);
}

void WriteProbe::begin_phase() {
  for (Label c = 0; c < n_cells_; ++c) writer_[static_cast<std::size_t>(c)].store(-1, std::memory_order_relaxed);
  ++phases_;
}

void WriteProbe::record(Label cell, Label region) noexcept {
  writes_.fetch_add(1, std::memory_order_relaxed);
  Label expected = -1;
  auto& slot = writer_[static_cast<std::size_t>(cell)];
  if (!slot.compare_exchange_strong(expected, region, std::memory_order_relaxed) && expected != region) {
    conflicts_.fetch_add(1, std::memory_order_relaxed);
  }
}

void execute_schedule(const UnstructuredMesh& mesh, const FaceSchedule& schedule, ThreadPool* pool, WriteProbe* probe,
                      const std::function<void(Label, FaceSide, Label)>& apply) {
  const auto own = mesh.owner();
  const auto nb = mesh.neighbour();
  for (const auto& phase : schedule.phases) {
    if (probe != nullptr) probe->begin_phase();
    for_each_worker(pool, static_cast<int>(phase.tasks.size()), [&](int region) {
      for (const FaceTask& task : phase.tasks[static_cast<std::size_t>(region)]) {
        if (probe != nullptr) {
          const auto s = static_cast<std::uint8_t>(task.side);
          if (s & static_cast<std::uint8_t>(FaceSide::owner)) probe->record(own[task.face], region);
          if (s & static_cast<std::uint8_t>(FaceSide::neighbour)) probe->record(nb[task.face], region);
        }
        apply(task.face, task.side, region);
      }
    });
  }
}

void execute_regions(const FaceSchedule& schedule, ThreadPool* pool, const std::function<void(Label)>& apply) {
  for_each_worker(pool, schedule.n_regions(), [&](int region) { apply(region); });
}

}  // namespace mcflow
