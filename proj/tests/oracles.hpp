#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <functional>
#include <algorithm>
#include <vector>

namespace oracle {

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13, int depth = 50) {
  auto rule = [&](double lo, double hi, double flo, double fmid, double fhi) { return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi); };
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = rule(lo, mid, flo, flm, fmid), right = rule(mid, hi, fmid, frm, fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), tol, depth);
}

// Eigenvalues of -u'' + (z/2)u' on the whole line: Hermite functions, k/2.
inline double line_eigenvalue(int k) { return 0.5 * k; }

inline long choose(long n, long r) {
  if (r < 0 || r > n) return 0;
  double v = 1.0;
  for (long i = 1; i <= r; ++i) v = v * static_cast<double>(n - r + i) / static_cast<double>(i);
  return std::lround(v);
}

// Dimension of degree-l harmonic polynomials in m = k + 1 variables,
// counted as homogeneous polynomials of degree l minus those of degree l - 2.
inline long harmonic_dim(int k, int l) { return choose(l + k, k) - (l >= 2 ? choose(l - 2 + k, k) : 0); }

// Sorted spectrum of -L_f on S^k(sqrt(2k)) x R^m in the Gaussian soliton,
// enumerated directly (sphere modes times Hermite levels).
inline std::vector<double> product_spectrum(int k, int m, double potential, int max_l, int max_level) {
  std::vector<double> sums{0.0};
  for (int c = 0; c < m; ++c) {
    std::vector<double> next;
    for (double s : sums)
      for (int j = 0; j <= max_level; ++j) next.push_back(s + line_eigenvalue(j));
    sums = next;
  }
  std::vector<double> out;
  for (int l = 0; l <= (k > 0 ? max_l : 0); ++l) {
    const long mult = k > 0 ? harmonic_dim(k, l) : 1;
    const double lam = k > 0 ? l * (l + k - 1.0) / (2.0 * k) : 0.0;
    for (long r = 0; r < mult; ++r)
      for (double s : sums) out.push_back(lam + s - potential);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
