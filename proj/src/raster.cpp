#include "bdss/raster.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "bdss/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raster and checkpoint formats are little-endian; big-endian hosts unsupported");

namespace bdss {

ImageRaster ImageRaster::make(int width, int height, float fill, Tag tag) {
  if (width <= 0 || height <= 0)
    throw config_error("raster extents must be positive, got " + std::to_string(width) + "x" +
                       std::to_string(height));
  ImageRaster r;
  r.width = width;
  r.height = height;
  r.values.assign(static_cast<std::size_t>(width) * height, fill);
  r.tag = tag;
  return r;
}

namespace {

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path + ": cannot open for reading");
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0);
  std::vector<char> bytes(static_cast<std::size_t>(len));
  if (len > 0) in.read(bytes.data(), len);
  if (!in) throw io_error(path + ": read failed");
  return bytes;
}

struct Cursor {
  const std::string& path;
  const std::vector<char>& bytes;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw io_error(path + ": " + msg + " at byte " + std::to_string(pos));
  }
  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size())
      throw io_error(path + ": truncated " + what + " at byte " + std::to_string(pos) +
                     " (need " + std::to_string(n) + " more bytes, have " +
                     std::to_string(bytes.size() - pos) + ")");
  }
  std::uint32_t u32() {
    need(4, "field");
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    pos += 4;
    return v;
  }
};

// PGM header token reader: skips whitespace and '#' comments.
int pgm_int(Cursor& c) {
  const auto& b = c.bytes;
  while (c.pos < b.size()) {
    const char ch = b[c.pos];
    if (ch == '#') {
      while (c.pos < b.size() && b[c.pos] != '\n') ++c.pos;
    } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      ++c.pos;
    } else {
      break;
    }
  }
  if (c.pos >= b.size()) c.fail("truncated header");
  if (b[c.pos] < '0' || b[c.pos] > '9') c.fail("expected integer in header");
  long v = 0;
  while (c.pos < b.size() && b[c.pos] >= '0' && b[c.pos] <= '9') {
    v = v * 10 + (b[c.pos] - '0');
    if (v > 1 << 30) c.fail("header value out of range");
    ++c.pos;
  }
  return static_cast<int>(v);
}

ImageRaster read_pgm(Cursor& c) {
  c.pos = 2;  // past "P5"
  const int w = pgm_int(c);
  const int h = pgm_int(c);
  const int maxval = pgm_int(c);
  if (w <= 0 || h <= 0) c.fail("non-positive image extent");
  if (maxval != 255) c.fail("unsupported maxval " + std::to_string(maxval) + " (want 255)");
  c.need(1, "pixel data separator");
  ++c.pos;  // single whitespace byte after maxval
  const std::size_t count = static_cast<std::size_t>(w) * h;
  c.need(count, "pixel payload");
  ImageRaster r = ImageRaster::make(w, h);
  for (std::size_t i = 0; i < count; ++i)
    r.values[i] = static_cast<unsigned char>(c.bytes[c.pos + i]) / 255.0f;
  return r;
}

ImageRaster read_bdsr(Cursor& c) {
  c.pos = 4;  // past magic
  const std::uint32_t version = c.u32();
  if (version != kRasterVersion)
    throw io_error(c.path + ": unsupported raster version " + std::to_string(version));
  const std::uint32_t w = c.u32();
  const std::uint32_t h = c.u32();
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) c.fail("implausible image extent");
  const std::size_t count = static_cast<std::size_t>(w) * h;
  c.need(count * 4, "pixel payload");
  ImageRaster r = ImageRaster::make(static_cast<int>(w), static_cast<int>(h));
  std::memcpy(r.values.data(), c.bytes.data() + c.pos, count * 4);
  return r;
}

}  // namespace

ImageRaster read_raster(const std::string& path) {
  const std::vector<char> bytes = slurp(path);
  Cursor c{path, bytes, 0};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kRasterMagic, 4) == 0) return read_bdsr(c);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return read_pgm(c);
  throw io_error(path + ": bad magic at byte 0 (expected P5 or BDSR)");
}

void write_pgm(const ImageRaster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  std::vector<unsigned char> quantized(raster.size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const float v = std::min(1.0f, std::max(0.0f, raster.values[i]));
    quantized[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(quantized.data()),
            static_cast<std::streamsize>(quantized.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_bdsr(const ImageRaster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(kRasterMagic, 4);
  const std::uint32_t header[3] = {kRasterVersion, static_cast<std::uint32_t>(raster.width),
                                   static_cast<std::uint32_t>(raster.height)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(raster.values.data()),
            static_cast<std::streamsize>(raster.size() * 4));
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_raster(const ImageRaster& raster, const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0)
    write_pgm(raster, path);
  else
    write_bdsr(raster, path);
}

}  // namespace bdss
