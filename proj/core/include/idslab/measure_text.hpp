#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "idslab/measure.hpp"

namespace idslab {

// Text literals for measures, used by config files and artifacts:
//   atomic((x,w),(x,w),...)        point(x)
//   density((l,r,v),(l,r,vl,vr))   uniform(l,r)
//   cantor(left,right,ratio,depth)
//   mix((w,<literal>),(w,<literal>),...)
// Whitespace is insignificant. point/uniform are parse-time sugar for atomic/
// density forms. format_measure emits a canonical literal whose numbers are
// printed with 17 significant digits, so parse(format(m)) reproduces m
// bit-exactly.

std::string format_measure(const Measure& m);

struct MeasureParseError {
  std::size_t offset;  // byte offset into the input
  std::string message;
};

// Returns the measure, or nullopt with *error filled in.
std::optional<Measure> parse_measure(std::string_view text, MeasureParseError* error = nullptr);

// Convenience for tests and programmatic use; throws std::invalid_argument.
Measure parse_measure_or_throw(std::string_view text);

// Canonical float formatting used by every text artifact (17 significant
// digits, shortest C locale form, no locale dependence).
std::string format_double(double v);

}  // namespace idslab
