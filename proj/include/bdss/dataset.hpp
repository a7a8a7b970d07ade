#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bdss/raster.hpp"
#include "bdss/speckle.hpp"
#include "bdss/tensor.hpp"

namespace bdss {

// 256-bin target intensity histogram for the SAR-like transform.
struct HistogramTarget {
  std::array<double, 256> mass{};  // normalized to sum 1

  static HistogramTarget from_file(const std::string& path);
  // Exponential intensity law (single-look-like), mean kDefaultTargetMean,
  // truncated to [0,1]. Identical to the table shipped in assets/.
  static HistogramTarget exponential_default();

  void normalize();
};

inline constexpr double kDefaultTargetMean = 0.11;

// Monotone histogram matching through 256-bin empirical CDFs (mid-CDF rule,
// so a constant image lands on the target median). Output values are bin
// centers, hence within 1/256 of a fixed point when self-matching.
ImageRaster sar_like_transform(const ImageRaster& image, const HistogramTarget& target);

// Regular patch grid with the given stride; partial patches at the borders
// are dropped. Order is a seeded shuffle of the grid.
std::vector<ImageRaster> extract_patches(const ImageRaster& image, int patch, int stride,
                                         std::uint64_t seed);

struct DatasetManifest {
  std::vector<std::string> paths;
  int patch = 112;
  int stride = 112;
  std::uint64_t seed = 0;
};

// One path per line, '#' comments; relative paths resolve against the
// manifest's directory.
DatasetManifest read_manifest(const std::string& path);

enum class PairMode { self_supervised, supervised };

struct Batch {
  Tensor<float> input;   // speckled y
  Tensor<float> target;  // y' (self-supervised) or clean x (supervised)
};

// Deterministic pair source over a fixed set of clean patches. The input
// realization y of sample k is drawn from the same substream in both modes,
// so supervised and self-supervised streams share identical inputs.
class PairStream {
 public:
  PairStream(std::vector<ImageRaster> clean_patches, SpeckleSpec spec, PairMode mode,
             std::uint64_t seed, bool fresh_noise_per_epoch = true);

  int size() const { return static_cast<int>(clean_.size()); }
  int patch_extent() const { return patch_; }
  PairMode mode() const { return mode_; }

  std::vector<int> epoch_order(int epoch) const;
  // Stacks `count` pairs starting at position `first` of the epoch's order.
  Batch batch(int epoch, int first, int count) const;
  const ImageRaster& clean(int index) const { return clean_[static_cast<std::size_t>(index)]; }

 private:
  std::vector<ImageRaster> clean_;
  SpeckleSpec spec_;
  PairMode mode_;
  std::uint64_t seed_;
  bool fresh_noise_;
  int patch_;
};

struct StreamOptions {
  PairMode mode = PairMode::self_supervised;
  bool fresh_noise_per_epoch = true;
  bool sar_like = false;                 // histogram-match images before patching
  std::string target_histogram_path;    // empty -> built-in exponential target
  std::uint64_t seed = 0;
};

// Loads manifest images (skipping unreadable ones with a warning), optionally
// applies the SAR-like transform, extracts patches and assembles the stream.
PairStream build_pair_stream(const DatasetManifest& manifest, const SpeckleSpec& spec,
                             const StreamOptions& options);

Tensor<float> raster_to_tensor(const ImageRaster& raster);
ImageRaster tensor_to_raster(const Tensor<float>& tensor,
                             ImageRaster::Tag tag = ImageRaster::Tag::despeckled);

}  // namespace bdss
