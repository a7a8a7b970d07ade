#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bdss/errors.hpp"
#include "bdss/model.hpp"

namespace bdss {

// Checkpoint layout (all little-endian):
//   magic "BDSM", u32 version,
//   u32 input_channels, lowlevel, bottleneck, scale_factor, block_count,
//   per block: u32 growth, kernel, layer_count, u32 dilations[...],
//   u32 parameter_count,
//   per parameter (canonical graph order): u32 rank, u32 dims[rank], f32 data.
inline constexpr char kCheckpointMagic[4] = {'B', 'D', 'S', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class CheckpointWriter {
 public:
  explicit CheckpointWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error(path + ": cannot open for writing");
  }
  void u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error(path_ + ": write failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw io_error(path + ": cannot open for reading");
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    read(&v, 4, what);
    return v;
  }
  void read(void* p, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw io_error(path_ + ": truncated " + what + " at byte " + std::to_string(pos_));
    pos_ += n;
  }
  const std::string& path() const { return path_; }
  std::size_t pos() const { return pos_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <typename T>
void save_checkpoint(Model<T>& model, const std::string& path) {
  detail::CheckpointWriter w(path);
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  const ModelConfig& c = model.config;
  w.u32(static_cast<std::uint32_t>(c.input_channels));
  w.u32(static_cast<std::uint32_t>(c.lowlevel_channels));
  w.u32(static_cast<std::uint32_t>(c.bottleneck_channels));
  w.u32(static_cast<std::uint32_t>(c.scale_factor));
  w.u32(static_cast<std::uint32_t>(c.blocks.size()));
  for (const auto& b : c.blocks) {
    w.u32(static_cast<std::uint32_t>(b.growth));
    w.u32(static_cast<std::uint32_t>(b.kernel));
    w.u32(static_cast<std::uint32_t>(b.layer_dilations.size()));
    for (int d : b.layer_dilations) w.u32(static_cast<std::uint32_t>(d));
  }
  auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  std::vector<float> buffer;
  for (auto& p : params) {
    w.u32(static_cast<std::uint32_t>(p.rank()));
    for (int d : p.shape()) w.u32(static_cast<std::uint32_t>(d));
    buffer.resize(p.numel());
    for (std::size_t i = 0; i < p.numel(); ++i)
      buffer[i] = static_cast<float>(p.data()[i]);
    w.bytes(buffer.data(), buffer.size() * 4);
  }
  w.finish();
}

template <typename T>
Model<T> load_checkpoint(const std::string& path) {
  detail::CheckpointReader r(path);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw io_error(path + ": bad magic at byte 0 (not a BDSM checkpoint)");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion)
    throw io_error(path + ": unsupported checkpoint version " + std::to_string(version) +
                   " (expected " + std::to_string(kCheckpointVersion) + ")");
  ModelConfig config;
  config.input_channels = static_cast<int>(r.u32("input channels"));
  config.lowlevel_channels = static_cast<int>(r.u32("lowlevel channels"));
  config.bottleneck_channels = static_cast<int>(r.u32("bottleneck channels"));
  config.scale_factor = static_cast<int>(r.u32("scale factor"));
  const std::uint32_t block_count = r.u32("block count");
  if (block_count == 0 || block_count > 64)
    throw io_error(path + ": implausible block count " + std::to_string(block_count));
  config.blocks.clear();
  for (std::uint32_t b = 0; b < block_count; ++b) {
    DenseBlockConfig bc;
    bc.growth = static_cast<int>(r.u32("block growth"));
    bc.kernel = static_cast<int>(r.u32("block kernel"));
    const std::uint32_t layers = r.u32("block layer count");
    if (layers == 0 || layers > 256)
      throw io_error(path + ": implausible layer count " + std::to_string(layers));
    bc.layer_dilations.clear();
    for (std::uint32_t l = 0; l < layers; ++l)
      bc.layer_dilations.push_back(static_cast<int>(r.u32("layer dilation")));
    config.blocks.push_back(std::move(bc));
  }
  try {
    config.validate();
  } catch (const config_error& e) {
    throw io_error(path + ": invalid stored config: " + e.what());
  }

  Model<T> model = build_bdss<T>(config, 0);
  auto params = model.parameters();
  const std::uint32_t stored = r.u32("parameter count");
  if (stored != params.size())
    throw io_error(path + ": expected " + std::to_string(params.size()) +
                   " parameters, found " + std::to_string(stored));
  std::vector<float> buffer;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const std::uint32_t rank = r.u32("parameter rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank && d < 16; ++d)
      shape.push_back(static_cast<int>(r.u32("parameter extent")));
    if (rank > 16 || shape != p.shape())
      throw io_error(path + ": parameter " + std::to_string(i) + ": expected shape " +
                     shape_str(p.shape()) + ", found " + shape_str(shape));
    buffer.resize(p.numel());
    r.read(buffer.data(), buffer.size() * 4, "parameter data");
    for (std::size_t j = 0; j < buffer.size(); ++j) {
      if (!std::isfinite(buffer[j]))
        throw io_error(path + ": parameter " + std::to_string(i) + " has non-finite values");
      p.values()[j] = static_cast<T>(buffer[j]);
    }
  }
  return model;
}

}  // namespace bdss
