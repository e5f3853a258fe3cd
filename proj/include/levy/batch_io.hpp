#pragma once

// LevyBatch serialization. The binary form is columnar: a header with
// (d, n, dt, sampler, seed, depth) followed by each column of w and then a
// as contiguous little-endian doubles. The CSV form carries the same header
// as '#'-prefixed key=value lines.

#include "levy/core.hpp"

#include <string>

namespace levy::io {

inline constexpr std::uint32_t kBatchVersion = 1;

void write_batch(const LevyBatch& batch, const std::string& path);
LevyBatch read_batch(const std::string& path);

void write_batch_csv(const LevyBatch& batch, const std::string& path);
LevyBatch read_batch_csv(const std::string& path);

/// Dispatches on the extension: ".csv" selects CSV, anything else binary.
void save_batch(const LevyBatch& batch, const std::string& path);
LevyBatch load_batch(const std::string& path);

/// reference_batch(RngStream(seed, stream_id), n, d, 1, depth), cached under
/// `dir` when it is non-empty. Rows depend only on their index, so a cached
/// batch with at least n rows is truncated instead of regenerated.
LevyBatch cached_reference(const std::string& dir, std::uint64_t seed, std::uint64_t stream_id,
                           Eigen::Index n, int d, int depth);

/// Writes `text` to `path`, throwing when the file cannot be written.
void write_text(const std::string& path, const std::string& text);

}  // namespace levy::io
