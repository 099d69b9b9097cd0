#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace binquant {

// One record in the container: a named tensor (f64/f32 stored as doubles in
// memory) or a raw byte string (u8).
struct CheckpointEntry {
  std::string name;
  std::uint8_t dtype = 2;  // 0=u8, 1=f32, 2=f64
  std::vector<std::size_t> dims;
  std::vector<double> f64;
  std::vector<std::uint8_t> u8;

  std::size_t count() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }
};

struct Checkpoint {
  std::vector<CheckpointEntry> entries;

  void add_f64(const std::string& name, std::vector<std::size_t> dims,
               std::span<const double> data);
  void add_bytes(const std::string& name, const std::string& bytes);

  const CheckpointEntry* find(const std::string& name) const;
  // Throws IoError(DimMismatch) when absent.
  const CheckpointEntry& at(const std::string& name) const;
  std::string bytes_of(const std::string& name) const;
};

// Writes to <path>.tmp then renames, so a crash never leaves a torn file.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace binquant
