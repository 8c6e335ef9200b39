#pragma once

#include <complex>
#include <vector>

namespace ptspec {

// Eigenvalues of -w'' + i x^3 w = E w (decaying on the real line), from a
// truncated harmonic-oscillator basis of `basis_size` functions with
// frequency `freq`. Returned sorted by real part, near-real ones only
// (|Im E| < 1e-6 (1 + |E|)) when `real_only`.
std::vector<std::complex<double>> cubic_pt_spectrum(int basis_size = 200, double freq = 2.5,
                                                    bool real_only = true);

// Lowest `count` eigenvalues of -w'' + x^4 w = E w on the real line by
// Numerov shooting at two step sizes with Richardson extrapolation.
std::vector<double> quartic_spectrum(int count = 3, double step = 1e-3);

}  // namespace ptspec
