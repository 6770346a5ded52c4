#include "scatterbench/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "scatterbench/errors.hpp"

namespace sb {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

namespace binio {

void put_u32(std::ostream& os, unsigned v) {
  const std::uint32_t u = v;
  os.write(reinterpret_cast<const char*>(&u), 4);
}

void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

unsigned get_u32(std::istream& is) {
  std::uint32_t u = 0;
  if (!is.read(reinterpret_cast<char*>(&u), 4)) fail(ErrorKind::FormatError, "truncated u32");
  return u;
}

double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8)) fail(ErrorKind::FormatError, "truncated f64");
  return v;
}

void expect_magic(std::istream& is, const char* magic) {
  char buf[4] = {};
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    fail(ErrorKind::FormatError, std::string("bad magic, expected ") + magic);
}

}  // namespace binio

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::IoError, "cannot read " + path);
  return is;
}

}  // namespace

void write_spc1(std::ostream& os, const SpectralCoeffs& c) {
  os.write("SPC1", 4);
  binio::put_u32(os, static_cast<unsigned>(c.M()));
  for (double v : c.data()) binio::put_f64(os, v);
}

SpectralCoeffs read_spc1(std::istream& is) {
  binio::expect_magic(is, "SPC1");
  const unsigned M = binio::get_u32(is);
  if (M < 1 || M > kMaxModes) fail(ErrorKind::FormatError, "SPC1 mode count out of range");
  SpectralCoeffs c(static_cast<int>(M));
  for (double& v : c.data()) v = binio::get_f64(is);
  return c;
}

void write_spc1(const std::string& path, const SpectralCoeffs& c) {
  auto os = open_out(path);
  write_spc1(os, c);
}

SpectralCoeffs read_spc1(const std::string& path) {
  auto is = open_in(path);
  return read_spc1(is);
}

void write_grd1(std::ostream& os, const GridField& f) {
  os.write("GRD1", 4);
  binio::put_u32(os, static_cast<unsigned>(f.geom.nx));
  binio::put_u32(os, static_cast<unsigned>(f.geom.ny));
  binio::put_f64(os, f.geom.box.x0);
  binio::put_f64(os, f.geom.box.x1);
  binio::put_f64(os, f.geom.box.y0);
  binio::put_f64(os, f.geom.box.y1);
  for (double v : f.v) binio::put_f64(os, v);
}

GridField read_grd1(std::istream& is) {
  binio::expect_magic(is, "GRD1");
  GridGeometry g;
  g.nx = static_cast<int>(binio::get_u32(is));
  g.ny = static_cast<int>(binio::get_u32(is));
  if (g.nx < 2 || g.ny < 2 || g.nx > 1 << 15 || g.ny > 1 << 15)
    fail(ErrorKind::FormatError, "GRD1 dimensions out of range");
  g.box.x0 = binio::get_f64(is);
  g.box.x1 = binio::get_f64(is);
  g.box.y0 = binio::get_f64(is);
  g.box.y1 = binio::get_f64(is);
  if (!(g.box.x1 > g.box.x0) || !(g.box.y1 > g.box.y0)) fail(ErrorKind::FormatError, "GRD1 box is empty");
  GridField f(g);
  for (double& v : f.v) v = binio::get_f64(is);
  return f;
}

void write_grd1(const std::string& path, const GridField& f) {
  auto os = open_out(path);
  write_grd1(os, f);
}

GridField read_grd1(const std::string& path) {
  auto is = open_in(path);
  return read_grd1(is);
}

}  // namespace sb
