#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace reclab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses "p/q", an integer, or a finite decimal ("0.7", "-1.25e-3") into the
// exact rational it denotes. Throws ValidationError on anything else.
Rational parse_rational(std::string_view text);

// Exact value of a finite double (every double is a dyadic rational).
Rational exact_rational(double x);

double to_double(const Rational& q);

std::string to_string(const Rational& q);

}  // namespace reclab
