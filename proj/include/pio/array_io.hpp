#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pio/tensor.hpp"

namespace pio {

// Named-array container. Binary layout, little-endian throughout:
//   magic "NAC1"
//   u32 entry count
//   per entry: u32 name length, name bytes,
//              u8 dtype (0 = f64, 1 = i64, 2 = u8),
//              u8 ndim, u64 dims[ndim], raw payload
// Entries are written in name order, so equal content means equal bytes.
struct ArchiveContent {
  std::map<std::string, Array> arrays;                // dtype 0
  std::map<std::string, std::vector<int64_t>> ints;   // dtype 1
  std::map<std::string, std::string> texts;           // dtype 2
};

void save_archive(const std::string& path, const ArchiveContent& content);
ArchiveContent load_archive(const std::string& path);

}  // namespace pio
