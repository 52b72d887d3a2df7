#include "sqn/exact.hpp"

#include <stdexcept>

namespace sqn {

BigInt factorial(int n) {
    if (n < 0)
        throw std::invalid_argument("factorial: negative argument");
    BigInt out = 1;
    for (int i = 2; i <= n; ++i)
        out *= i;
    return out;
}

BigInt double_factorial(int n) {
    if (n < -1)
        throw std::invalid_argument("double_factorial: argument below -1");
    BigInt out = 1;
    for (int i = n; i > 1; i -= 2)
        out *= i;
    return out;
}

BigInt binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt out = 1;
    for (int i = 0; i < k; ++i) {
        out *= (n - i);
        out /= (i + 1);  // exact: product of i+1 consecutive integers
    }
    return out;
}

double to_double(const Rational& r) {
    return r.convert_to<double>();
}

}  // namespace sqn
