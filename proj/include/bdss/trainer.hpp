#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bdss/adam.hpp"
#include "bdss/checkpoint.hpp"
#include "bdss/dataset.hpp"
#include "bdss/metrics.hpp"
#include "bdss/model.hpp"
#include "bdss/raster.hpp"

namespace bdss {

template <typename T>
struct TrainConfig {
  T lr0 = T(1e-3);
  int halve_every = 3;  // epochs between learning-rate halvings
  int epochs = 16;
  int batch_size = 16;
  int patch = 112;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
  PairMode mode = PairMode::self_supervised;
  std::uint64_t seed = 1;
  int checkpoint_every = 1;        // epochs; <= 0 disables
  std::string checkpoint_dir;     // empty disables checkpointing

  void validate() const {
    if (lr0 <= T(0) || halve_every <= 0 || epochs <= 0 || batch_size <= 0 || patch <= 0 ||
        beta1 <= T(0) || beta2 <= T(0) || eps <= T(0))
      throw config_error("train config: all values must be positive");
  }
};

// lr0 * 0.5^floor(epoch / halve_every); epochs are 0-based.
template <typename T>
T lr_schedule(int epoch, const TrainConfig<T>& cfg) {
  if (epoch < 0) throw config_error("lr_schedule: epoch must be >= 0");
  return cfg.lr0 * static_cast<T>(std::pow(0.5, epoch / cfg.halve_every));
}

// Mean over all elements of the squared difference.
template <typename T>
Tensor<T> n2n_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape())
    throw config_error("n2n_loss: prediction shape " + shape_str(pred.shape()) +
                       " vs target " + shape_str(target.shape()));
  Tensor<T> diff = sub(pred, target);
  return mean(mul(diff, diff));
}

struct TrainLog {
  std::vector<int> iter_epoch;
  std::vector<double> iter_lr;
  std::vector<double> iter_loss;
  std::vector<double> epoch_lr;
  std::vector<double> epoch_val_psnr;  // empty when no validation set
  std::vector<double> epoch_seconds;

  // CSV schema: iteration,epoch,lr,loss (wall-clock stays out of artifacts).
  void write_csv(const std::string& path) const;
  std::string to_csv() const;
};

struct ValidationSet {
  std::vector<ImageRaster> clean;
  std::vector<ImageRaster> speckled;
};

// Whole-image inference. Images up to `tile` on a side go through one forward
// pass; larger ones are tiled with an overlap of half the receptive field and
// stitched by central crop, so every output pixel sees its full context.
template <typename T>
ImageRaster despeckle(Model<T>& model, const ImageRaster& image, int tile = 256);

template <typename T>
TrainLog train(const PairStream& stream, Model<T>& model, const TrainConfig<T>& cfg,
               const ValidationSet* validation = nullptr);

// ---- implementation ----

template <typename T>
ImageRaster despeckle(Model<T>& model, const ImageRaster& image, int tile) {
  if (image.width <= 0 || image.height <= 0)
    throw config_error("despeckle: non-positive image dimensions");
  for (float v : image.values)
    if (v < 0.0f) throw std::domain_error("despeckle: image has negative intensities");
  if (tile < 1) throw config_error("despeckle: tile must be >= 1");

  NoGradGuard no_grad;
  auto run = [&](const ImageRaster& window) {
    std::vector<T> values(window.values.begin(), window.values.end());
    Tensor<T> in = Tensor<T>::from({1, 1, window.height, window.width}, std::move(values));
    Tensor<T> out = forward(model, in);
    ImageRaster r = ImageRaster::make(window.width, window.height, 0.0f,
                                      ImageRaster::Tag::despeckled);
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = static_cast<float>(out.data()[i]);
    return r;
  };

  if (image.width <= tile && image.height <= tile) {
    ImageRaster out = run(image);
    out.tag = ImageRaster::Tag::despeckled;
    return out;
  }

  const int halo = (receptive_field(model.config) - 1) / 2;
  ImageRaster out = ImageRaster::make(image.width, image.height, 0.0f,
                                      ImageRaster::Tag::despeckled);
  for (int y0 = 0; y0 < image.height; y0 += tile) {
    const int y1 = std::min(image.height, y0 + tile);
    const int wy0 = std::max(0, y0 - halo);
    const int wy1 = std::min(image.height, y1 + halo);
    for (int x0 = 0; x0 < image.width; x0 += tile) {
      const int x1 = std::min(image.width, x0 + tile);
      const int wx0 = std::max(0, x0 - halo);
      const int wx1 = std::min(image.width, x1 + halo);
      ImageRaster window = ImageRaster::make(wx1 - wx0, wy1 - wy0);
      for (int y = wy0; y < wy1; ++y)
        for (int x = wx0; x < wx1; ++x) window.at(y - wy0, x - wx0) = image.at(y, x);
      const ImageRaster result = run(window);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) out.at(y, x) = result.at(y - wy0, x - wx0);
    }
  }
  return out;
}

template <typename T>
TrainLog train(const PairStream& stream, Model<T>& model, const TrainConfig<T>& cfg,
               const ValidationSet* validation) {
  cfg.validate();
  if (stream.size() <= 0) throw config_error("train: empty dataset");
  const int iters_per_epoch = stream.size() / cfg.batch_size;
  if (iters_per_epoch <= 0)
    throw config_error("train: batch size " + std::to_string(cfg.batch_size) + " exceeds " +
                       std::to_string(stream.size()) + " samples");

  auto params = model.parameters();
  AdamState<T> state = AdamState<T>::for_params(params);
  TrainLog log;
  long long iteration = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const T lr = lr_schedule(epoch, cfg);
    log.epoch_lr.push_back(static_cast<double>(lr));
    AdamConfig<T> adam_cfg{lr, cfg.beta1, cfg.beta2, cfg.eps};
    for (int it = 0; it < iters_per_epoch; ++it, ++iteration) {
      Batch batch = stream.batch(epoch, it * cfg.batch_size, cfg.batch_size);
      std::vector<T> in(batch.input.data().begin(), batch.input.data().end());
      std::vector<T> tg(batch.target.data().begin(), batch.target.data().end());
      Tensor<T> input = Tensor<T>::from(batch.input.shape(), std::move(in));
      Tensor<T> target = Tensor<T>::from(batch.target.shape(), std::move(tg));

      Tensor<T> pred = forward(model, input);
      Tensor<T> loss = n2n_loss(pred, target);
      const double loss_value = static_cast<double>(loss.item());
      if (!std::isfinite(loss_value))
        throw std::runtime_error("train: non-finite loss at iteration " +
                                 std::to_string(iteration) + " (lr=" + std::to_string(lr) + ")");
      for (auto& p : params) p.zero_grad();
      loss.backward();
      adam_step(params, adam_cfg, state);

      log.iter_epoch.push_back(epoch);
      log.iter_lr.push_back(static_cast<double>(lr));
      log.iter_loss.push_back(loss_value);
    }
    if (validation && !validation->clean.empty()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < validation->clean.size(); ++i) {
        const ImageRaster restored = despeckle(model, validation->speckled[i]);
        acc += psnr(validation->clean[i], restored);
      }
      log.epoch_val_psnr.push_back(acc / static_cast<double>(validation->clean.size()));
    }
    log.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        ((epoch + 1) % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs)) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.bdsm", epoch + 1);
      save_checkpoint(model, cfg.checkpoint_dir + "/" + name);
    }
  }
  return log;
}

}  // namespace bdss
