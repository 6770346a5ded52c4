#pragma once

#include <iosfwd>
#include <string>

#include "scatterbench/grid.hpp"
#include "scatterbench/spectral.hpp"

namespace sb {

// Little-endian binary containers.
//   SPC1: "SPC1", u32 M, M*M f64 (m1 outermost)
//   GRD1: "GRD1", u32 nx, u32 ny, f64 x0, x1, y0, y1, nx*ny f64 (x outermost)
void write_spc1(std::ostream& os, const SpectralCoeffs& c);
SpectralCoeffs read_spc1(std::istream& is);
void write_spc1(const std::string& path, const SpectralCoeffs& c);
SpectralCoeffs read_spc1(const std::string& path);

void write_grd1(std::ostream& os, const GridField& f);
GridField read_grd1(std::istream& is);
void write_grd1(const std::string& path, const GridField& f);
GridField read_grd1(const std::string& path);

// Raw little-endian helpers shared with the measurement container.
namespace binio {
void put_u32(std::ostream& os, unsigned v);
void put_f64(std::ostream& os, double v);
unsigned get_u32(std::istream& is);
double get_f64(std::istream& is);
void expect_magic(std::istream& is, const char* magic);
}  // namespace binio

}  // namespace sb
