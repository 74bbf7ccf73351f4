// sonimap - open-addressing hash table keyed by integer voxel indices
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_VOXEL_HASH_HPP
#define SONIMAP_VOXEL_HASH_HPP

#include <cstdint>
#include <vector>

#include "sonimap/error.hpp"

namespace sonimap {

struct VoxelIndex {
  std::int32_t x = 0, y = 0, z = 0;

  bool operator==(const VoxelIndex&) const = default;
};

/// Per-voxel fusion state. `fuse_stamp`/`carve_stamp` record the last frame
/// that touched the cell so that a fuse and a carve landing in the same
/// frame can be reconciled (fuse wins; see SparseVoxelMap).
struct VoxelCell {
  float sdf = 0.f;
  float weight = 0.f;
  std::uint32_t hits = 0;
  std::uint32_t fuse_stamp = 0;
  std::uint32_t carve_stamp = 0;
  float carved_in_frame = 0.f;
};

/// Linear-probing hash map specialized for voxel keys. Erase uses backward
/// shifting, so lookups never scan tombstones. Iteration order is the table
/// order, which is deterministic for a fixed operation sequence; callers
/// that need a canonical order sort the extracted keys.
class VoxelHashMap {
public:
  struct Slot {
    std::uint64_t key;
    VoxelCell cell;
  };

  static constexpr std::uint64_t kEmpty = ~0ull;
  static constexpr std::int32_t kCoordLimit = 1 << 20;  // +/- ~52 km at 5 cm

  VoxelHashMap() { table_.assign(kInitialCapacity, Slot{kEmpty, {}}); }

  static std::uint64_t pack(const VoxelIndex& v) {
    if (v.x <= -kCoordLimit || v.x >= kCoordLimit || v.y <= -kCoordLimit ||
        v.y >= kCoordLimit || v.z <= -kCoordLimit || v.z >= kCoordLimit)
      throw Error("VoxelHashMap: voxel index out of range");
    const auto ux = static_cast<std::uint64_t>(v.x + kCoordLimit);
    const auto uy = static_cast<std::uint64_t>(v.y + kCoordLimit);
    const auto uz = static_cast<std::uint64_t>(v.z + kCoordLimit);
    return (ux << 42) | (uy << 21) | uz;
  }

  static VoxelIndex unpack(std::uint64_t key) {
    VoxelIndex v;
    v.x = static_cast<std::int32_t>((key >> 42) & 0x1FFFFF) - kCoordLimit;
    v.y = static_cast<std::int32_t>((key >> 21) & 0x1FFFFF) - kCoordLimit;
    v.z = static_cast<std::int32_t>(key & 0x1FFFFF) - kCoordLimit;
    return v;
  }

  std::size_t size() const { return size_; }

  VoxelCell* find(std::uint64_t key) {
    std::size_t i = probe_start(key);
    for (;;) {
      Slot& s = table_[i];
      if (s.key == key) return &s.cell;
      if (s.key == kEmpty) return nullptr;
      i = (i + 1) & mask();
    }
  }

  const VoxelCell* find(std::uint64_t key) const {
    return const_cast<VoxelHashMap*>(this)->find(key);
  }

  VoxelCell& find_or_insert(std::uint64_t key) {
    if ((size_ + 1) * 10 > table_.size() * 7) grow();
    std::size_t i = probe_start(key);
    for (;;) {
      Slot& s = table_[i];
      if (s.key == key) return s.cell;
      if (s.key == kEmpty) {
        s.key = key;
        s.cell = VoxelCell{};
        ++size_;
        return s.cell;
      }
      i = (i + 1) & mask();
    }
  }

  /// Removes every cell for which `pred(key, cell)` is true. Returns the
  /// number erased. Backward-shift deletion can move an entry into the slot
  /// under examination, so each slot is re-checked until it settles.
  template <typename Pred>
  std::size_t erase_if(Pred pred) {
    std::size_t erased = 0;
    for (std::size_t i = 0; i < table_.size(); ++i) {
      while (table_[i].key != kEmpty && pred(table_[i].key, table_[i].cell)) {
        erase_slot(i);
        ++erased;
      }
    }
    return erased;
  }

  template <typename Fn>
  void for_each(Fn fn) const {
    for (const Slot& s : table_)
      if (s.key != kEmpty) fn(s.key, s.cell);
  }

  void clear() {
    table_.assign(kInitialCapacity, Slot{kEmpty, {}});
    size_ = 0;
  }

private:
  static constexpr std::size_t kInitialCapacity = 1024;

  std::size_t mask() const { return table_.size() - 1; }

  std::size_t probe_start(std::uint64_t key) const {
    // splitmix64 finalizer
    std::uint64_t h = key + 0x9E3779B97F4A7C15ull;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
    h ^= h >> 31;
    return static_cast<std::size_t>(h) & mask();
  }

  void grow() {
    std::vector<Slot> old;
    old.swap(table_);
    table_.assign(old.size() * 2, Slot{kEmpty, {}});
    size_ = 0;
    for (const Slot& s : old)
      if (s.key != kEmpty) find_or_insert(s.key) = s.cell;
  }

  // Classic backward-shift deletion: walk the probe cluster after the hole
  // and pull back the first entry whose home slot does not lie cyclically
  // inside (hole, candidate]; repeat until the cluster ends.
  void erase_slot(std::size_t i) {
    std::size_t hole = i;
    std::size_t j = i;
    for (;;) {
      j = (j + 1) & mask();
      if (table_[j].key == kEmpty) break;
      const std::size_t home = probe_start(table_[j].key);
      const bool home_in_gap = ((j - home) & mask()) < ((j - hole) & mask());
      if (!home_in_gap) {
        table_[hole] = table_[j];
        hole = j;
      }
    }
    table_[hole].key = kEmpty;
    table_[hole].cell = VoxelCell{};
    --size_;
  }

  std::vector<Slot> table_;
  std::size_t size_ = 0;
};

}  // namespace sonimap

#endif  // SONIMAP_VOXEL_HASH_HPP
