#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "actisim/common.hpp"

namespace actisim {

using Cplx = std::complex<double>;
using CplxVec = std::vector<Cplx>;

namespace detail {

// Recursive mixed-radix transform, radices 2 and 3 with an O(n^2) fallback
// for other prime factors. Covers every LTE size including 1536 = 512*3.
// No normalization; sign = -1 forward, +1 inverse.
inline CplxVec fft_rec(const CplxVec& x, int sign) {
  const std::size_t n = x.size();
  if (n == 1) return x;
  const double base = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
  if (n % 2 == 0) {
    const std::size_t m = n / 2;
    CplxVec even(m), odd(m);
    for (std::size_t i = 0; i < m; ++i) {
      even[i] = x[2 * i];
      odd[i] = x[2 * i + 1];
    }
    CplxVec fe = fft_rec(even, sign);
    CplxVec fo = fft_rec(odd, sign);
    CplxVec out(n);
    for (std::size_t k = 0; k < m; ++k) {
      Cplx t = std::polar(1.0, base * static_cast<double>(k)) * fo[k];
      out[k] = fe[k] + t;
      out[k + m] = fe[k] - t;
    }
    return out;
  }
  if (n % 3 == 0) {
    const std::size_t m = n / 3;
    CplxVec x0(m), x1(m), x2(m);
    for (std::size_t i = 0; i < m; ++i) {
      x0[i] = x[3 * i];
      x1[i] = x[3 * i + 1];
      x2[i] = x[3 * i + 2];
    }
    CplxVec f0 = fft_rec(x0, sign);
    CplxVec f1 = fft_rec(x1, sign);
    CplxVec f2 = fft_rec(x2, sign);
    const Cplx c1 = std::polar(1.0, sign * 2.0 * std::numbers::pi / 3.0);
    const Cplx c2 = std::polar(1.0, sign * 4.0 * std::numbers::pi / 3.0);
    CplxVec out(n);
    for (std::size_t k = 0; k < m; ++k) {
      Cplx a = f0[k];
      Cplx b = std::polar(1.0, base * static_cast<double>(k)) * f1[k];
      Cplx c = std::polar(1.0, base * static_cast<double>(2 * k)) * f2[k];
      out[k] = a + b + c;
      out[k + m] = a + c1 * b + c2 * c;
      out[k + 2 * m] = a + c2 * b + c1 * c;
    }
    return out;
  }
  // Prime size: direct DFT.
  CplxVec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Cplx acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, base * static_cast<double>(k * t));
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-j2pi nk/N}.
inline CplxVec fft_forward(const CplxVec& x) { return detail::fft_rec(x, -1); }

// Unnormalized inverse DFT: x[n] = sum_k X[k] e^{+j2pi nk/N}.
inline CplxVec fft_inverse(const CplxVec& x) { return detail::fft_rec(x, +1); }

}  // namespace actisim
