#pragma once

#include <cstdint>
#include <string>

#include "bdss/dataset.hpp"
#include "bdss/model.hpp"
#include "bdss/speckle.hpp"
#include "bdss/trainer.hpp"

namespace bdss {

// Resolved union of all module settings. Loaded from a flat `key = value`
// file with [sections]; command-line flags override file values; the fully
// resolved config is echoed next to every run's outputs.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;

  // [speckle]  looks = L  or  looks = Lmin:Lmax
  double looks_min = 1.0;
  double looks_max = 10.0;

  // [model]
  int scale_factor = 1;

  // [train]
  std::string mode = "self_supervised";
  double lr0 = 1e-3;
  int halve_every = 3;
  int epochs = 16;
  int batch = 16;
  int patch = 112;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int checkpoint_every = 1;

  // [data]
  int stride = 112;
  bool sar_like = false;
  std::string target_histogram;  // empty -> built-in exponential table
  bool fresh_noise = true;

  // [despeckle]
  int tile = 256;

  static RunConfig load(const std::string& path);  // "" -> defaults
  void set(const std::string& dotted_key, const std::string& value);  // e.g. "train.lr0"
  void validate() const;

  std::string echo() const;  // deterministic round-trippable text
  void echo_to(const std::string& path) const;

  SpeckleSpec speckle_spec() const;
  ModelConfig model_config() const;
  TrainConfig<float> train_config() const;
  PairMode pair_mode() const;
};

}  // namespace bdss
