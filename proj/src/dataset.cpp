#include "bdss/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bdss/errors.hpp"
#include "bdss/rng.hpp"

namespace bdss {

void HistogramTarget::normalize() {
  double total = 0.0;
  for (double m : mass) {
    if (m < 0.0 || !std::isfinite(m))
      throw config_error("histogram target: bin masses must be finite and non-negative");
    total += m;
  }
  if (total <= 0.0) throw config_error("histogram target: all bins are zero");
  for (auto& m : mass) m /= total;
}

HistogramTarget HistogramTarget::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  HistogramTarget t;
  for (int i = 0; i < 256; ++i) {
    if (!(in >> t.mass[i]))
      throw io_error(path + ": expected 256 bin masses, failed at bin " + std::to_string(i));
  }
  t.normalize();
  return t;
}

HistogramTarget HistogramTarget::exponential_default() {
  HistogramTarget t;
  for (int i = 0; i < 256; ++i) {
    const double v = (i + 0.5) / 256.0;
    t.mass[i] = std::exp(-v / kDefaultTargetMean);
  }
  t.normalize();
  return t;
}

ImageRaster sar_like_transform(const ImageRaster& image, const HistogramTarget& target) {
  if (image.size() == 0) throw config_error("sar_like_transform: empty image");
  std::array<double, 256> source{};
  auto bin_of = [](float v) {
    const int b = static_cast<int>(std::clamp(v, 0.0f, 1.0f) * 256.0f);
    return std::min(b, 255);
  };
  for (float v : image.values) source[bin_of(v)] += 1.0;
  for (auto& m : source) m /= static_cast<double>(image.size());

  std::array<double, 256> target_cdf{};
  double acc = 0.0;
  for (int i = 0; i < 256; ++i) {
    acc += target.mass[i];
    target_cdf[i] = acc;
  }

  // mid-CDF of the source bin -> smallest target bin at or past it; constant
  // images land on the target median by the same rule
  std::array<float, 256> mapped{};
  double below = 0.0;
  int j = 0;
  for (int i = 0; i < 256; ++i) {
    const double mid = below + 0.5 * source[i];
    while (j < 255 && target_cdf[j] < mid) ++j;
    mapped[i] = static_cast<float>((j + 0.5) / 256.0);
    below += source[i];
  }

  ImageRaster out = image;
  for (auto& v : out.values) v = mapped[bin_of(v)];
  return out;
}

std::vector<ImageRaster> extract_patches(const ImageRaster& image, int patch, int stride,
                                         std::uint64_t seed) {
  if (patch < 1 || stride < 1) throw config_error("extract_patches: patch and stride must be >= 1");
  if (patch > image.width || patch > image.height)
    throw config_error("extract_patches: patch " + std::to_string(patch) + " exceeds image " +
                       std::to_string(image.width) + "x" + std::to_string(image.height));
  std::vector<ImageRaster> patches;
  for (int y0 = 0; y0 + patch <= image.height; y0 += stride) {
    for (int x0 = 0; x0 + patch <= image.width; x0 += stride) {
      ImageRaster p = ImageRaster::make(patch, patch, 0.0f, image.tag);
      for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x) p.at(y, x) = image.at(y0 + y, x0 + x);
      patches.push_back(std::move(p));
    }
  }
  rng::Stream stream(rng::substream(seed, {rng::kData}));
  for (std::size_t i = patches.size(); i > 1; --i)
    std::swap(patches[i - 1], patches[stream.next() % i]);
  return patches;
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  DatasetManifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(first, last - first + 1);
    std::filesystem::path p(entry);
    if (p.is_relative()) p = base / p;
    m.paths.push_back(p.string());
  }
  return m;
}

PairStream::PairStream(std::vector<ImageRaster> clean_patches, SpeckleSpec spec, PairMode mode,
                       std::uint64_t seed, bool fresh_noise_per_epoch)
    : clean_(std::move(clean_patches)),
      spec_(spec),
      mode_(mode),
      seed_(seed),
      fresh_noise_(fresh_noise_per_epoch) {
  if (clean_.empty()) throw config_error("pair stream: no training patches");
  patch_ = clean_[0].width;
  for (auto& p : clean_) {
    if (p.width != patch_ || p.height != patch_)
      throw config_error("pair stream: patches must share one square extent");
    for (auto& v : p.values) v = std::clamp(v, 0.0f, 1.0f);  // clean imagery contract
  }
  spec_.seed = rng::substream(seed, {rng::kNoise});
}

std::vector<int> PairStream::epoch_order(int epoch) const {
  std::vector<int> order(clean_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  rng::Stream stream(
      rng::substream(seed_, {rng::kData, 0x6f72646572ull, static_cast<std::uint64_t>(epoch)}));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[stream.next() % i]);
  return order;
}

Batch PairStream::batch(int epoch, int first, int count) const {
  if (count < 1 || first < 0 || first + count > size())
    throw config_error("pair stream: batch [" + std::to_string(first) + "," +
                       std::to_string(first + count) + ") out of " + std::to_string(size()) +
                       " samples");
  const std::vector<int> order = epoch_order(epoch);
  const std::size_t plane = static_cast<std::size_t>(patch_) * patch_;
  std::vector<float> input(static_cast<std::size_t>(count) * plane);
  std::vector<float> target(static_cast<std::size_t>(count) * plane);
  const std::uint64_t noise_epoch = fresh_noise_ ? static_cast<std::uint64_t>(epoch) : 0;
  for (int i = 0; i < count; ++i) {
    const int id = order[static_cast<std::size_t>(first + i)];
    const std::uint64_t pair_index =
        noise_epoch * static_cast<std::uint64_t>(size()) + static_cast<std::uint64_t>(id);
    const auto [y, y2] = make_training_pair(clean_[static_cast<std::size_t>(id)], spec_, pair_index);
    std::copy(y.values.begin(), y.values.end(), input.begin() + i * plane);
    if (mode_ == PairMode::self_supervised) {
      std::copy(y2.values.begin(), y2.values.end(), target.begin() + i * plane);
    } else {
      const auto& x = clean_[static_cast<std::size_t>(id)];
      std::copy(x.values.begin(), x.values.end(), target.begin() + i * plane);
    }
  }
  Batch b;
  b.input = Tensor<float>::from({count, 1, patch_, patch_}, std::move(input));
  b.target = Tensor<float>::from({count, 1, patch_, patch_}, std::move(target));
  return b;
}

PairStream build_pair_stream(const DatasetManifest& manifest, const SpeckleSpec& spec,
                             const StreamOptions& options) {
  if (manifest.paths.empty()) throw config_error("manifest lists no images");
  HistogramTarget target;
  if (options.sar_like)
    target = options.target_histogram_path.empty()
                 ? HistogramTarget::exponential_default()
                 : HistogramTarget::from_file(options.target_histogram_path);
  std::vector<ImageRaster> patches;
  std::size_t readable = 0;
  for (std::size_t i = 0; i < manifest.paths.size(); ++i) {
    ImageRaster image;
    try {
      image = read_raster(manifest.paths[i]);
    } catch (const io_error& e) {
      std::cerr << "bdss: skipping unreadable image: " << e.what() << "\n";
      continue;
    }
    ++readable;
    if (options.sar_like) image = sar_like_transform(image, target);
    auto img_patches = extract_patches(image, manifest.patch, manifest.stride,
                                       rng::substream(options.seed, {rng::kData, i}));
    for (auto& p : img_patches) patches.push_back(std::move(p));
  }
  if (readable == 0) throw io_error("manifest: no readable images");
  return PairStream(std::move(patches), spec, options.mode, options.seed,
                    options.fresh_noise_per_epoch);
}

Tensor<float> raster_to_tensor(const ImageRaster& raster) {
  return Tensor<float>::from({1, 1, raster.height, raster.width}, raster.values);
}

ImageRaster tensor_to_raster(const Tensor<float>& tensor, ImageRaster::Tag tag) {
  if (tensor.rank() != 4 || tensor.dim(0) != 1 || tensor.dim(1) != 1)
    throw config_error("tensor_to_raster: want shape [1,1,H,W], got " +
                       shape_str(tensor.shape()));
  ImageRaster r = ImageRaster::make(tensor.dim(3), tensor.dim(2), 0.0f, tag);
  const auto d = tensor.data();
  std::copy(d.begin(), d.end(), r.values.begin());
  return r;
}

}  // namespace bdss
