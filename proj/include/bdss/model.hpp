#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdss/ops.hpp"
#include "bdss/rng.hpp"

namespace bdss {

// One enhanced dense block: a ladder of dilated 3x3 convs where layer k >= 2
// consumes the concatenation of all previous layer outputs; every conv and
// every concat is followed by PReLU. Block output = final concat (growth * n).
struct DenseBlockConfig {
  int growth = 16;
  std::vector<int> layer_dilations = {1, 2, 3, 4, 4, 3, 2, 1};
  int kernel = 3;

  int layer_count() const { return static_cast<int>(layer_dilations.size()); }
  int output_channels() const { return growth * layer_count(); }
};

struct ModelConfig {
  int input_channels = 1;
  int lowlevel_channels = 128;
  std::vector<DenseBlockConfig> blocks{3};
  int bottleneck_channels = 256;
  int scale_factor = 1;

  static ModelConfig full_scale() { return {}; }
  // Divides lowlevel/growth/bottleneck widths by `factor`; depth and the
  // dilation ladder stay fixed. factor must divide every width.
  static ModelConfig desk_scale(int factor);

  void validate() const;  // throws config_error naming the offending layer
};

template <typename T>
struct Model {
  struct Block {
    std::vector<ConvWeights<T>> convs;
    std::vector<Tensor<T>> conv_slopes;    // one per conv, growth-wide
    std::vector<Tensor<T>> concat_slopes;  // one per concat stage (layer_count-1)
  };

  ModelConfig config;
  ConvWeights<T> lowlevel;
  Tensor<T> lowlevel_slopes;
  std::vector<Block> blocks;
  ConvWeights<T> bottleneck;      // 1x1, no activation
  ConvWeights<T> reconstruction;  // 3x3, no activation

  // Canonical graph order, also the checkpoint layout: lowlevel k/b/slopes,
  // then per block conv1 k/b/slopes, conv2 k/b/slopes, concat1 slopes, ...,
  // then bottleneck k/b and reconstruction k/b.
  std::vector<Tensor<T>> parameters();
  std::size_t parameter_count() const;
};

// Output width of every named stage, read back from built parameter shapes.
struct StageWidth {
  std::string name;
  int channels = 0;
};
template <typename T>
std::vector<StageWidth> channel_audit(Model<T>& model);

// One-side extent of the theoretical receptive field along the deepest path;
// every sequential conv adds dilation*(k-1).
int receptive_field(const ModelConfig& config);
template <typename T>
int receptive_field(const Model<T>& model) {
  return receptive_field(model.config);
}

namespace detail {
template <typename T>
Tensor<T> init_conv_kernel(const Shape& shape, std::uint64_t seed, int index);
void warn_small_input(int h, int w, int fov_max);
}  // namespace detail

template <typename T>
Model<T> build_bdss(const ModelConfig& config, std::uint64_t seed);

template <typename T>
Tensor<T> dense_block_forward(const typename Model<T>::Block& block, const Tensor<T>& input);

template <typename T>
Tensor<T> forward(Model<T>& model, const Tensor<T>& batch);

// ---- implementation ----

namespace detail {

template <typename T>
Tensor<T> init_conv_kernel(const Shape& shape, std::uint64_t seed, int index) {
  // fan-in scaled uniform: bounds +-sqrt(6 / (Cin * k^2))
  const double fan_in = static_cast<double>(shape[1]) * shape[2] * shape[3];
  const double bound = std::sqrt(6.0 / fan_in);
  rng::Stream stream(rng::substream(seed, {rng::kInit, static_cast<std::uint64_t>(index)}));
  std::vector<T> values(shape_numel(shape));
  for (auto& v : values) v = static_cast<T>(stream.uniform_in(-bound, bound));
  return Tensor<T>::from(shape, std::move(values), true);
}

}  // namespace detail

template <typename T>
Model<T> build_bdss(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model<T> model;
  model.config = config;
  int index = 0;
  auto make_conv = [&](int out_c, int in_c, int k, int dilation, int padding) {
    ConvWeights<T> conv;
    conv.kernel = detail::init_conv_kernel<T>({out_c, in_c, k, k}, seed, index++);
    conv.bias = Tensor<T>::zeros({out_c}, true);
    conv.dilation = dilation;
    conv.padding = padding;
    return conv;
  };
  auto make_slopes = [&](int channels) { return Tensor<T>::full({channels}, T(0.25), true); };

  model.lowlevel = make_conv(config.lowlevel_channels, config.input_channels, 3, 1, 1);
  model.lowlevel_slopes = make_slopes(config.lowlevel_channels);

  int width = config.lowlevel_channels;  // running concat width feeding each block
  for (const auto& bc : config.blocks) {
    typename Model<T>::Block block;
    int feed = width;  // conv 1 consumes the block input
    for (int layer = 0; layer < bc.layer_count(); ++layer) {
      const int dilation = bc.layer_dilations[layer];
      block.convs.push_back(make_conv(bc.growth, feed, bc.kernel, dilation, dilation));
      block.conv_slopes.push_back(make_slopes(bc.growth));
      const int concat_width = (layer + 1) * bc.growth;
      if (layer >= 1) block.concat_slopes.push_back(make_slopes(concat_width));
      feed = concat_width;  // layer k+1 consumes the concat of outputs 1..k
    }
    model.blocks.push_back(std::move(block));
    width += bc.output_channels();
  }
  model.bottleneck = make_conv(config.bottleneck_channels, width, 1, 1, 0);
  model.reconstruction = make_conv(config.input_channels, config.bottleneck_channels, 3, 1, 1);
  return model;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::parameters() {
  std::vector<Tensor<T>> out;
  auto push_conv = [&](ConvWeights<T>& c) {
    out.push_back(c.kernel);
    out.push_back(c.bias);
  };
  push_conv(lowlevel);
  out.push_back(lowlevel_slopes);
  for (auto& block : blocks) {
    for (std::size_t layer = 0; layer < block.convs.size(); ++layer) {
      push_conv(block.convs[layer]);
      out.push_back(block.conv_slopes[layer]);
      if (layer >= 1) out.push_back(block.concat_slopes[layer - 1]);
    }
  }
  push_conv(bottleneck);
  push_conv(reconstruction);
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  auto* self = const_cast<Model<T>*>(this);
  for (const auto& p : self->parameters()) n += p.numel();
  return n;
}

template <typename T>
Tensor<T> dense_block_forward(const typename Model<T>::Block& block, const Tensor<T>& input) {
  if (input.dim(1) != block.convs[0].kernel.dim(1))
    throw config_error("dense block: input has " + std::to_string(input.dim(1)) +
                       " channels, block expects " +
                       std::to_string(block.convs[0].kernel.dim(1)));
  std::vector<Tensor<T>> outputs;
  Tensor<T> feed = input;
  for (std::size_t layer = 0; layer < block.convs.size(); ++layer) {
    Tensor<T> a = prelu(conv2d(feed, block.convs[layer]), block.conv_slopes[layer]);
    outputs.push_back(a);
    if (layer == 0) {
      feed = a;
    } else {
      feed = prelu(concat_channels(outputs), block.concat_slopes[layer - 1]);
    }
  }
  return feed;  // concatenation of all layer outputs, PReLU applied
}

template <typename T>
Tensor<T> forward(Model<T>& model, const Tensor<T>& batch) {
  if (batch.rank() != 4 || batch.dim(1) != model.config.input_channels)
    throw config_error("forward: batch shape " + shape_str(batch.shape()) + " wants " +
                       std::to_string(model.config.input_channels) + " channels");
  int fov_max = 3;
  for (const auto& bc : model.config.blocks)
    for (int d : bc.layer_dilations) fov_max = std::max(fov_max, field_of_view(bc.kernel, d));
  detail::warn_small_input(batch.dim(2), batch.dim(3), fov_max);

  Tensor<T> x = prelu(conv2d(batch, model.lowlevel), model.lowlevel_slopes);
  Tensor<T> cat = x;
  for (auto& block : model.blocks) {
    Tensor<T> out = dense_block_forward<T>(block, cat);
    cat = concat_channels<T>({cat, out});
  }
  Tensor<T> squeezed = conv2d(cat, model.bottleneck);
  return conv2d(squeezed, model.reconstruction);
}

template <typename T>
std::vector<StageWidth> channel_audit(Model<T>& model) {
  std::vector<StageWidth> audit;
  audit.push_back({"Input", model.config.input_channels});
  audit.push_back({"LowLevel", model.lowlevel.kernel.dim(0)});
  const char* names = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const auto& block = model.blocks[b];
    const std::string tag(1, names[b % 26]);
    int concat = 0;
    for (std::size_t layer = 0; layer < block.convs.size(); ++layer) {
      const int growth = block.convs[layer].kernel.dim(0);
      audit.push_back({"DenseBlock-" + tag + "/DCONV" + std::to_string(layer + 1), growth});
      concat += growth;
      if (layer >= 1)
        audit.push_back(
            {"DenseBlock-" + tag + "/Concat" + std::to_string(layer), concat});
    }
    // the width the next stage actually consumes
    const int consumed = b + 1 < model.blocks.size()
                             ? model.blocks[b + 1].convs[0].kernel.dim(1)
                             : model.bottleneck.kernel.dim(1);
    audit.push_back({"Concat-" + tag, consumed});
  }
  audit.push_back({"Bottleneck", model.bottleneck.kernel.dim(0)});
  audit.push_back({"Reconstruction", model.reconstruction.kernel.dim(0)});
  return audit;
}

}  // namespace bdss
