#pragma once

#include <vector>

namespace stripesim {

/// Real DFT of a length-n signal, bins 0..n/2. Direct evaluation: the
/// profiles transformed here are at most a few thousand samples, and the
/// fixed summation order keeps results bit-reproducible.
struct Spectrum {
    int n = 0;                // original signal length
    std::vector<double> re;   // size n/2 + 1
    std::vector<double> im;

    int num_bins() const { return int(re.size()); }

    /// Energy of bin k with the conjugate half folded in, so that
    /// sum_k energy(k) equals n * sum_i x[i]^2 (Parseval).
    double bin_energy(int k) const;
};

Spectrum real_dft(const std::vector<double>& x);

/// Inverse transform restricted to the listed bins (conjugate pairs
/// implied). Reconstructs just those components of the original signal.
std::vector<double> reconstruct_bins(const Spectrum& s, const std::vector<int>& bins);

}  // namespace stripesim
