#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vlq/phasespace.hpp"

namespace vlq {

/// F64GRID record: ASCII header `F64GRID nx=.. nv=.. vmax=.. time=..\n` then
/// nx*nv little-endian doubles, x-fastest. Stacks are concatenated records.
void write_f64grid(std::ostream& os, DistFn const& f);
void write_f64grid(std::string const& path, DistFn const& f);
DistFn read_f64grid(std::istream& is);
DistFn read_f64grid(std::string const& path);
std::vector<DistFn> read_f64grid_stack(std::string const& path);

}  // namespace vlq
