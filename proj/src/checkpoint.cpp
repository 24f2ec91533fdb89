#include "musem/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "musem/error.hpp"

namespace musem {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'U', 'S', 'E', 'M', 'C', 'K', 'P'};

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw InputError("checkpoint truncated while reading " + what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string shape_text(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainConfig& config, std::size_t epoch,
                     const ModelParams& params) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto* t : params.tensors()) {
    tensors.push_back({{"name", t->name}, {"rows", t->value.rows}, {"cols", t->value.cols}});
  }
  // The model config stored on the params is authoritative for shapes.
  TrainConfig stored = config;
  stored.variant = params.config.variant;
  stored.pooling = params.config.pooling;
  stored.dim = params.config.dim;
  stored.hidden = params.config.hidden;
  stored.joint_dim = params.config.joint_dim;
  stored.synthetic_first = params.config.synthetic_first;
  const nlohmann::json header = {{"format", "musem-checkpoint"},
                                 {"version", kCheckpointVersion},
                                 {"config", to_json(stored)},
                                 {"seed", stored.seed},
                                 {"epoch", epoch},
                                 {"tensors", tensors}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* t : params.tensors()) {
    for (double v : t->value.values) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw InputError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint: " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InputError(path.string() + " is not a musem checkpoint");
  }
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = read_le<std::uint64_t>(in, "header length");
  if (header_len > (std::uint64_t{1} << 32)) throw InputError("checkpoint header length is implausible");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw InputError("checkpoint truncated in header");
  }

  Checkpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ckpt.config = train_config_from_json(header.at("config"));
    ckpt.epoch = header.at("epoch").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint header: " + std::string(e.what()));
  }

  const ModelConfig stored = ckpt.config.model();
  if (expected) {
    if (expected->variant != stored.variant) {
      throw InputError("checkpoint was trained with variant " + std::string(to_string(stored.variant)) +
                       ", requested " + std::string(to_string(expected->variant)));
    }
    if (expected->pooling != stored.pooling) {
      throw InputError("checkpoint was trained with " + std::string(to_string(stored.pooling)) +
                       " pooling, requested " + std::string(to_string(expected->pooling)));
    }
  }
  ckpt.params = ModelParams(expected.value_or(stored));
  ckpt.params.config.synthetic_first = stored.synthetic_first;

  const auto& listed = header.at("tensors");
  auto tensors = ckpt.params.tensors();
  if (!listed.is_array() || listed.size() != tensors.size()) {
    throw InputError("checkpoint lists " + std::to_string(listed.size()) + " tensors, expected " +
                     std::to_string(tensors.size()));
  }
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    ParamTensor& t = *tensors[k];
    const auto name = listed[k].at("name").get<std::string>();
    const auto rows = listed[k].at("rows").get<std::size_t>();
    const auto cols = listed[k].at("cols").get<std::size_t>();
    if (name != t.name) throw InputError("checkpoint tensor " + std::to_string(k) + " is " + name + ", expected " + t.name);
    if (rows != t.value.rows || cols != t.value.cols) {
      throw ShapeError("tensor " + name + ": checkpoint shape " + shape_text(rows, cols) + ", expected " +
                       shape_text(t.value.rows, t.value.cols));
    }
    for (auto& v : t.value.values) v = std::bit_cast<double>(read_le<std::uint64_t>(in, "tensor " + name));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InputError("checkpoint has trailing bytes");
  return ckpt;
}

}  // namespace musem
