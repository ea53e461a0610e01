#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "measinf/jessen.hpp"
#include "measinf/parallelepiped.hpp"
#include "measinf/sequences.hpp"

// Text literals (grammar in docs/io.md):
//
//   sequence       prefix=[1, 0.5]; tail=Constant(1)
//                  tail=PowerDrift(a=1, p=2[, base=1])
//                  tail=GeometricDrift(a=1, q=0.5[, base=1])
//                  tail=Periodic([0.5, 2])
//   parallelepiped lower={<sequence>}; upper={<sequence>}
//   function       Linear(weights={<sequence>}[; offset=0])
//                  Indicator(box={<parallelepiped>}[; scale=1])
//                  Poly(indices=[1, 2]; terms=[[coef, e1, e2], ...])
//                  Table(indices=[1]; cells=2; values=[0, 1])
//                  Opaque(limsup)
//
// Parse errors throw Error(ParseError) with a 1-based line and column.

namespace measinf::text {

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// from_chars over the whole string; ParseError otherwise.
double parse_number(std::string_view s);

std::string format(const TailDescriptor& tail);
std::string format(const TailedSequence& seq);
std::string format(const Parallelepiped& box);
std::string format(const ProductFunction& f);

TailedSequence parse_sequence(std::string_view s);
Parallelepiped parse_parallelepiped(std::string_view s);
ProductFunction parse_function(std::string_view s);

/// `[1, 2, 3]`
std::vector<double> parse_number_list(std::string_view s);
std::string format_number_list(const std::vector<double>& xs);

} // namespace measinf::text
