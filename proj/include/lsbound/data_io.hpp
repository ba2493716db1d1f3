#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsbound/distributions.hpp"

namespace lsbound {

struct IdxDataset {
  std::vector<Sample> samples;  // pixels scaled to [0,1], flattened row-major
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Big-endian IDX pair: images magic 0x00000803, labels magic 0x00000801.
IdxDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Byte-valued writer used by gen-data and round-trip tests.
void write_idx(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
               std::size_t rows, std::size_t cols, const std::string& images_path,
               const std::string& labels_path);

// Header row, feature columns, then an integer label column in [0, k).
std::vector<Sample> load_csv(const std::string& path, std::size_t k);

// Writes features with 17 significant digits so load_csv round-trips exactly.
void write_csv(std::span<const Sample> samples, const std::string& path);

}  // namespace lsbound
