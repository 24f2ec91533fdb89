#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "musem/training.hpp"

namespace musem {

// Binary container: the 8-byte magic "MUSEMCKP", a little-endian u32
// version, a little-endian u64 header length, a JSON header (config, epoch,
// tensor names and shapes), then every tensor as little-endian IEEE-754
// doubles in header order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  std::size_t epoch = 0;
  ModelParams params;
};

void save_checkpoint(const std::filesystem::path& path, const TrainConfig& config, std::size_t epoch,
                     const ModelParams& params);

/// Throws InputError on a bad container and ShapeError naming the tensor
/// when a stored shape disagrees with `expected` (or with the stored config).
/// A variant or pooling mismatch against `expected` is an InputError.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace musem
