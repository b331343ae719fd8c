#pragma once

#include "momdp/milp.hpp"

#include <string>

namespace momdp {

// CPLEX LP text form of the model. Coefficients are printed as decimals;
// rows whose exact coefficients are not decimal-representable carry a
// comment line with the rational values.
std::string export_lp(const MilpModel& model);

// Reads the subset of the LP format produced by export_lp (used for the
// round-trip check and for re-solving exported files).
MilpModel parse_lp(const std::string& text);

}  // namespace momdp
