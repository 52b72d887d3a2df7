// Exact integer/rational combinatorics shared by the moment algebra.
// All coefficient arithmetic stays rational; callers convert to double
// only at the API boundary.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace sqn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// n!, throws std::invalid_argument for n < 0.
BigInt factorial(int n);

// n!! with the convention (-1)!! = 1; throws for n < -1.
BigInt double_factorial(int n);

// binomial(n, k), zero outside 0 <= k <= n.
BigInt binomial(int n, int k);

double to_double(const Rational& r);

}  // namespace sqn
