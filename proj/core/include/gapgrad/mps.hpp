#ifndef GAPGRAD_MPS_HPP
#define GAPGRAD_MPS_HPP

#include <iosfwd>
#include <string>

#include "gapgrad/model.hpp"

namespace gapgrad {

/// Reads a free-format MPS file (NAME/OBJSENSE/ROWS/COLUMNS/RHS/RANGES/
/// BOUNDS with INTORG/INTEND markers). Fixed-format files tokenize the same
/// way. Integer columns default to bounds [0, +inf) unless the BOUNDS
/// section says otherwise; BV columns become binary.
/// Throws ParseError naming the offending line, or the unsupported section.
MilpModel load_mps(const std::string& path);

/// Same parser over an already-open stream; `origin` labels error messages.
MilpModel parse_mps(std::istream& in, const std::string& origin = "<stream>");

/// Writes the model back out as free MPS (used by round-trip tests and the
/// `solve` CLI). Binary variables are emitted as BV bounds.
void write_mps(const MilpModel& model, const std::string& path);
std::string write_mps_string(const MilpModel& model);

}  // namespace gapgrad

#endif
