// bdss: blind SAR despeckling toolkit.
// Subcommands: simulate, train, despeckle, evaluate.
// Exit status: 0 success, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdss/checkpoint.hpp"
#include "bdss/dataset.hpp"
#include "bdss/errors.hpp"
#include "bdss/kernels.hpp"
#include "bdss/metrics.hpp"
#include "bdss/parallel.hpp"
#include "bdss/raster.hpp"
#include "bdss/runconfig.hpp"
#include "bdss/speckle.hpp"
#include "bdss/trainer.hpp"

namespace fs = std::filesystem;
using namespace bdss;

namespace {

struct NamedRaster {
  std::string stem;
  std::string path;
};

bool raster_ext(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".pgm" || ext == ".bdsr";
}

std::vector<NamedRaster> list_rasters(const std::string& path) {
  std::vector<NamedRaster> out;
  const fs::path p(path);
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p))
      if (entry.is_regular_file() && raster_ext(entry.path()))
        out.push_back({entry.path().stem().string(), entry.path().string()});
    std::sort(out.begin(), out.end(),
              [](const NamedRaster& a, const NamedRaster& b) { return a.stem < b.stem; });
  } else if (fs::is_regular_file(p)) {
    out.push_back({p.stem().string(), p.string()});
  } else {
    throw config_error(path + ": no such file or directory");
  }
  if (out.empty()) throw config_error(path + ": no .pgm or .bdsr rasters found");
  return out;
}

const NamedRaster* find_stem(const std::vector<NamedRaster>& list, const std::string& stem) {
  for (const auto& r : list)
    if (r.stem == stem) return &r;
  return nullptr;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;

  void add_to(CLI::App* cmd, bool with_out = true) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--seed", seed, "master seed (overrides config)");
    cmd->add_option("--threads", threads, "worker threads (never affects results)");
    if (with_out) cmd->add_option("--out", out_dir, "output directory")->required();
  }

  RunConfig resolve() const {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (threads >= 0) cfg.set("threads", std::to_string(threads));
    cfg.validate();
    set_max_threads(cfg.threads);
    return cfg;
  }
};

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

int run_simulate(const std::string& in_path, const CommonFlags& flags, const std::string& looks,
                 bool preview) {
  RunConfig cfg = flags.resolve();
  if (!looks.empty()) cfg.set("speckle.looks", looks);
  cfg.validate();
  ensure_dir(flags.out_dir);
  const SpeckleSpec spec = cfg.speckle_spec();
  const auto inputs = list_rasters(in_path);

  std::string sidecar = "file,looks,seed\n";
  std::size_t written = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ImageRaster clean;
    try {
      clean = read_raster(inputs[i].path);
    } catch (const io_error& e) {
      std::cerr << "bdss simulate: skipping " << e.what() << "\n";
      continue;
    }
    const NoiseField noise = sample_speckle(clean.height, clean.width, spec, i);
    const ImageRaster speckled = apply_speckle(clean, noise);
    const std::string out_path = flags.out_dir + "/" + inputs[i].stem + ".bdsr";
    write_bdsr(speckled, out_path);
    if (preview) write_pgm(speckled, flags.out_dir + "/" + inputs[i].stem + ".pgm");
    char row[160];
    std::snprintf(row, sizeof(row), "%s.bdsr,%.9g,%llu\n", inputs[i].stem.c_str(),
                  noise.looks_used, static_cast<unsigned long long>(spec.seed));
    sidecar += row;
    ++written;
  }
  if (written == 0) throw io_error(in_path + ": no readable rasters");
  std::ofstream side(flags.out_dir + "/speckle_sidecar.csv", std::ios::binary);
  side.write(sidecar.data(), static_cast<std::streamsize>(sidecar.size()));
  if (!side) throw std::runtime_error(flags.out_dir + ": cannot write sidecar");
  cfg.echo_to(flags.out_dir + "/resolved.cfg");
  return 0;
}

int run_train(const std::string& manifest_path, const CommonFlags& flags,
              const std::string& mode) {
  RunConfig cfg = flags.resolve();
  if (!mode.empty()) cfg.set("train.mode", mode);
  cfg.validate();
  if (!fs::exists(manifest_path))
    throw config_error("manifest not found: " + manifest_path);
  ensure_dir(flags.out_dir);

  DatasetManifest manifest = read_manifest(manifest_path);
  manifest.patch = cfg.patch;
  manifest.stride = cfg.stride;
  manifest.seed = cfg.seed;

  StreamOptions options;
  options.mode = cfg.pair_mode();
  options.fresh_noise_per_epoch = cfg.fresh_noise;
  options.sar_like = cfg.sar_like;
  options.target_histogram_path = cfg.target_histogram;
  options.seed = cfg.seed;

  const PairStream stream = build_pair_stream(manifest, cfg.speckle_spec(), options);
  Model<float> model = build_bdss<float>(cfg.model_config(), cfg.seed);

  TrainConfig<float> train_cfg = cfg.train_config();
  train_cfg.checkpoint_dir = flags.out_dir;
  std::cerr << "bdss train: " << stream.size() << " patches, "
            << stream.size() / train_cfg.batch_size << " iterations/epoch, "
            << train_cfg.epochs << " epochs, kernels="
            << kernels::isa_name(kernels::active_isa()) << "\n";
  const TrainLog log = train(stream, model, train_cfg);

  save_checkpoint(model, flags.out_dir + "/checkpoint.bdsm");
  log.write_csv(flags.out_dir + "/trainlog.csv");
  cfg.echo_to(flags.out_dir + "/resolved.cfg");
  if (!log.iter_loss.empty())
    std::cerr << "bdss train: first loss " << log.iter_loss.front() << ", last loss "
              << log.iter_loss.back() << "\n";
  return 0;
}

int run_despeckle(const std::string& checkpoint_path, const std::string& in_path,
                  const CommonFlags& flags, int tile_flag, bool preview) {
  RunConfig cfg = flags.resolve();
  if (tile_flag > 0) cfg.set("despeckle.tile", std::to_string(tile_flag));
  cfg.validate();
  ensure_dir(flags.out_dir);
  Model<float> model = load_checkpoint<float>(checkpoint_path);
  const auto inputs = list_rasters(in_path);
  for (const auto& input : inputs) {
    const ImageRaster speckled = read_raster(input.path);
    const ImageRaster restored = despeckle(model, speckled, cfg.tile);
    write_bdsr(restored, flags.out_dir + "/" + input.stem + ".bdsr");
    if (preview) write_pgm(restored, flags.out_dir + "/" + input.stem + ".pgm");
  }
  cfg.echo_to(flags.out_dir + "/resolved.cfg");
  return 0;
}

int run_evaluate(const std::string& despeckled_path, const std::string& speckled_path,
                 const std::string& clean_path, const std::string& regions_path,
                 const std::string& out_csv, const std::string& indexes,
                 const CommonFlags& flags) {
  RunConfig cfg = flags.resolve();
  const auto despeckled_list = list_rasters(despeckled_path);
  const bool have_clean = !clean_path.empty();
  const bool have_speckled = !speckled_path.empty();
  const bool have_regions = !regions_path.empty();

  std::vector<std::string> wanted;
  if (indexes.empty() || indexes == "auto") {
    if (have_clean) {
      wanted.push_back("psnr");
      wanted.push_back("ssim");
    }
    if (have_regions) {
      wanted.push_back("enl");
      if (have_speckled) {
        wanted.push_back("epd_roa");
        wanted.push_back("mor");
        wanted.push_back("tcr");
      }
    }
  } else {
    std::string token;
    std::istringstream ss(indexes);
    while (std::getline(ss, token, ',')) wanted.push_back(token);
  }
  if (wanted.empty())
    throw config_error("evaluate: nothing to compute (need --clean and/or --regions)");
  for (const auto& index : wanted) {
    if ((index == "psnr" || index == "ssim") && !have_clean)
      throw config_error("evaluate: index '" + index + "' requires --clean");
    if ((index == "enl" || index == "epd_roa" || index == "mor" || index == "tcr") &&
        !have_regions)
      throw config_error("evaluate: index '" + index + "' requires --regions");
    if ((index == "epd_roa" || index == "mor" || index == "tcr") && !have_speckled)
      throw config_error("evaluate: index '" + index + "' requires --speckled");
  }

  RegionFile regions;
  if (have_regions) regions = read_region_file(regions_path);
  const auto clean_list = have_clean ? list_rasters(clean_path) : std::vector<NamedRaster>{};
  const auto speckled_list =
      have_speckled ? list_rasters(speckled_path) : std::vector<NamedRaster>{};

  MetricReport report;
  for (const auto& entry : despeckled_list) {
    const ImageRaster despeckled_img = read_raster(entry.path);
    ImageRaster clean_img, speckled_img;
    if (have_clean) {
      const NamedRaster* c = find_stem(clean_list, entry.stem);
      if (!c) throw config_error("evaluate: no clean raster for '" + entry.stem + "'");
      clean_img = read_raster(c->path);
    }
    if (have_speckled) {
      const NamedRaster* s = find_stem(speckled_list, entry.stem);
      if (!s) throw config_error("evaluate: no speckled raster for '" + entry.stem + "'");
      speckled_img = read_raster(s->path);
    }
    for (const auto& index : wanted) {
      if (index == "psnr") {
        report.rows.push_back({entry.stem, "psnr", "", psnr(clean_img, despeckled_img)});
      } else if (index == "ssim") {
        report.rows.push_back({entry.stem, "ssim", "", ssim(clean_img, despeckled_img)});
      } else if (index == "enl") {
        for (const auto& region : regions.regions)
          report.rows.push_back(
              {entry.stem, "enl", region.name, enl(despeckled_img, region)});
      } else if (index == "epd_roa") {
        for (const auto& region : regions.regions)
          report.rows.push_back({entry.stem, "epd_roa", region.name,
                                 epd_roa(speckled_img, despeckled_img, region)});
      } else if (index == "mor") {
        for (const auto& region : regions.regions)
          report.rows.push_back(
              {entry.stem, "mor", region.name, mor(speckled_img, despeckled_img, region)});
      } else if (index == "tcr") {
        for (const auto& target : regions.targets)
          report.rows.push_back(
              {entry.stem, "tcr", target.name, tcr(speckled_img, despeckled_img, target)});
      } else {
        throw config_error("evaluate: unknown index '" + index + "'");
      }
    }
  }
  report.append_means();
  report.write_csv(out_csv);
  const fs::path echo_path = fs::path(out_csv).parent_path() / "resolved.cfg";
  cfg.echo_to(echo_path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdss: self-supervised blind SAR despeckling toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "inject multiplicative speckle");
  std::string sim_in, sim_looks;
  bool sim_preview = false;
  CommonFlags sim_flags;
  simulate_cmd->add_option("--in", sim_in, "clean raster file or directory")->required();
  simulate_cmd->add_option("--looks", sim_looks, "number of looks: L or Lmin:Lmax");
  simulate_cmd->add_flag("--preview", sim_preview, "also write 8-bit PGM previews");
  sim_flags.add_to(simulate_cmd);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a despeckling model");
  std::string train_manifest, train_mode;
  CommonFlags train_flags;
  train_cmd->add_option("--manifest", train_manifest, "manifest of training images")->required();
  train_cmd->add_option("--mode", train_mode, "self_supervised or supervised")
      ->check(CLI::IsMember({"self_supervised", "supervised"}));
  train_flags.add_to(train_cmd);

  // despeckle
  auto* despeckle_cmd = app.add_subcommand("despeckle", "apply a trained model");
  std::string dsp_checkpoint, dsp_in;
  int dsp_tile = 0;
  bool dsp_preview = false;
  CommonFlags dsp_flags;
  despeckle_cmd->add_option("--checkpoint", dsp_checkpoint, "BDSM checkpoint")->required();
  despeckle_cmd->add_option("--in", dsp_in, "speckled raster file or directory")->required();
  despeckle_cmd->add_option("--tile", dsp_tile, "tile extent for large images");
  despeckle_cmd->add_flag("--preview", dsp_preview, "also write 8-bit PGM previews");
  dsp_flags.add_to(despeckle_cmd);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compute quality indexes");
  std::string ev_despeckled, ev_speckled, ev_clean, ev_regions, ev_out, ev_indexes;
  CommonFlags ev_flags;
  evaluate_cmd->add_option("--despeckled", ev_despeckled, "despeckled raster(s)")->required();
  evaluate_cmd->add_option("--speckled", ev_speckled, "speckled raster(s)");
  evaluate_cmd->add_option("--clean", ev_clean, "clean reference raster(s)");
  evaluate_cmd->add_option("--regions", ev_regions, "region spec file");
  evaluate_cmd->add_option("--out", ev_out, "output CSV path")->required();
  evaluate_cmd->add_option("--indexes", ev_indexes,
                           "comma list: psnr,ssim,enl,tcr,epd_roa,mor (default: auto)");
  ev_flags.add_to(evaluate_cmd, /*with_out=*/false);

  try {
    app.parse(argc, argv);
    if (simulate_cmd->parsed()) return run_simulate(sim_in, sim_flags, sim_looks, sim_preview);
    if (train_cmd->parsed()) return run_train(train_manifest, train_flags, train_mode);
    if (despeckle_cmd->parsed())
      return run_despeckle(dsp_checkpoint, dsp_in, dsp_flags, dsp_tile, dsp_preview);
    if (evaluate_cmd->parsed())
      return run_evaluate(ev_despeckled, ev_speckled, ev_clean, ev_regions, ev_out, ev_indexes,
                          ev_flags);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const io_error& e) {
    std::cerr << "bdss: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "bdss: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "bdss: " << e.what() << "\n";
    return 1;
  }
}
