#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bdss/raster.hpp"
#include "bdss/errors.hpp"
#include "bdss/rng.hpp"

using namespace bdss;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "bdss_raster_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("bdsr float rasters round-trip bit-exactly") {
  rng::Stream stream(31);
  ImageRaster r = ImageRaster::make(13, 9);
  for (auto& v : r.values) v = static_cast<float>(stream.uniform_in(-2.0, 3.0));
  r.values[0] = 1.5f;   // above the 8-bit range on purpose
  r.values[1] = -0.5f;  // below it
  const std::string path = (tmp_dir() / "roundtrip.bdsr").string();
  write_bdsr(r, path);
  const ImageRaster back = read_raster(path);
  CHECK(back.width == r.width);
  CHECK(back.height == r.height);
  CHECK(back.values == r.values);
}

TEST_CASE("pgm endpoints, clipping and quantization") {
  const auto dir = tmp_dir();
  ImageRaster r = ImageRaster::make(3, 1);
  r.values = {0.0f, 1.0f, 1.5f};
  const std::string path = (dir / "clip.pgm").string();
  write_pgm(r, path);
  const ImageRaster back = read_raster(path);
  CHECK(back.values[0] == 0.0f);   // pixel 0 -> 0.0
  CHECK(back.values[1] == 1.0f);   // pixel 255 -> 1.0
  CHECK(back.values[2] == 1.0f);   // 1.5 clips to 255, rereads as 1.0
}

TEST_CASE("pgm quantized round-trip stays within half a step") {
  rng::Stream stream(77);
  ImageRaster r = ImageRaster::make(16, 16);
  for (auto& v : r.values) v = static_cast<float>(stream.uniform());
  const std::string path = (tmp_dir() / "quant.pgm").string();
  write_pgm(r, path);
  const ImageRaster back = read_raster(path);
  for (std::size_t i = 0; i < r.size(); ++i)
    CHECK(std::abs(back.values[i] - r.values[i]) <= 0.5f / 255.0f + 1e-6f);
}

TEST_CASE("write_raster picks the format from the extension") {
  ImageRaster r = ImageRaster::make(4, 4, 0.25f);
  const auto dir = tmp_dir();
  write_raster(r, (dir / "by_ext.pgm").string());
  write_raster(r, (dir / "by_ext.bdsr").string());
  std::ifstream pgm(dir / "by_ext.pgm", std::ios::binary);
  std::ifstream bdsr(dir / "by_ext.bdsr", std::ios::binary);
  char head[4] = {};
  pgm.read(head, 2);
  CHECK(head[0] == 'P');
  CHECK(head[1] == '5');
  bdsr.read(head, 4);
  CHECK(std::string(head, 4) == "BDSR");
}

TEST_CASE("malformed rasters are rejected with byte offsets") {
  const auto dir = tmp_dir();
  {
    const std::string path = (dir / "bad_magic.bin").string();
    std::ofstream out(path, std::ios::binary);
    out << "NOPE  data";
  }
  CHECK_THROWS_WITH_AS(read_raster((dir / "bad_magic.bin").string()),
                       doctest::Contains("bad magic"), io_error);
  {
    const std::string path = (dir / "truncated.bdsr").string();
    std::ofstream out(path, std::ios::binary);
    out.write(kRasterMagic, 4);
    const std::uint32_t header[3] = {kRasterVersion, 8, 8};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    const float partial[4] = {0, 0, 0, 0};  // promises 64 floats, writes 4
    out.write(reinterpret_cast<const char*>(partial), sizeof(partial));
  }
  CHECK_THROWS_WITH_AS(read_raster((dir / "truncated.bdsr").string()),
                       doctest::Contains("truncated"), io_error);
  {
    const std::string path = (dir / "bad_maxval.pgm").string();
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 2\n65535\n";
    out.write("\0\0\0\0\0\0\0\0", 8);
  }
  CHECK_THROWS_WITH_AS(read_raster((dir / "bad_maxval.pgm").string()),
                       doctest::Contains("maxval"), io_error);
  {
    const std::string path = (dir / "short.pgm").string();
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.write("\1\2\3", 3);  // 16 pixels promised
  }
  CHECK_THROWS_WITH_AS(read_raster((dir / "short.pgm").string()),
                       doctest::Contains("truncated"), io_error);
  CHECK_THROWS_AS(read_raster((dir / "missing_file.bdsr").string()), io_error);
}

TEST_CASE("pgm header comments are tolerated") {
  const auto dir = tmp_dir();
  const std::string path = (dir / "comment.pgm").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# produced by a scanner\n2 1\n# odd place for a comment\n255\n";
    const unsigned char px[2] = {0, 255};
    out.write(reinterpret_cast<const char*>(px), 2);
  }
  const ImageRaster r = read_raster(path);
  CHECK(r.width == 2);
  CHECK(r.height == 1);
  CHECK(r.values[0] == 0.0f);
  CHECK(r.values[1] == 1.0f);
}
