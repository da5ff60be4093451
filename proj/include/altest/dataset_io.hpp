#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "altest/model.hpp"
#include "altest/rng.hpp"

namespace altest {

// On-disk dataset: one JSON header line, then little-endian float64 payload.
// Per observation, row-major: X (m*p values), y (m), then noise (m) when
// the header says has_noise.
struct DatasetFileInfo {
    std::uint64_t seed = 0;
    StreamId stream;
};

void write_dataset(std::ostream& out, const Dataset& data, const DatasetFileInfo& info);
void write_dataset(const std::filesystem::path& path, const Dataset& data, const DatasetFileInfo& info);

Dataset read_dataset(std::istream& in, DatasetFileInfo* info = nullptr);
Dataset read_dataset(const std::filesystem::path& path, DatasetFileInfo* info = nullptr);

} // namespace altest
