#include "stripesim/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stripesim {

double Spectrum::bin_energy(int k) const {
    double e = re[k] * re[k] + im[k] * im[k];
    bool has_conjugate = k != 0 && !(n % 2 == 0 && k == n / 2);
    return has_conjugate ? 2.0 * e : e;
}

Spectrum real_dft(const std::vector<double>& x) {
    int n = int(x.size());
    if (n < 2) throw std::invalid_argument("real_dft: need at least 2 samples");
    Spectrum s;
    s.n = n;
    int bins = n / 2 + 1;
    s.re.assign(bins, 0.0);
    s.im.assign(bins, 0.0);
    const double step = 2.0 * std::numbers::pi / double(n);
    for (int k = 0; k < bins; ++k) {
        double re = 0.0;
        double im = 0.0;
        for (int i = 0; i < n; ++i) {
            double angle = step * double(k) * double(i);
            re += x[i] * std::cos(angle);
            im -= x[i] * std::sin(angle);
        }
        s.re[k] = re;
        s.im[k] = im;
    }
    return s;
}

std::vector<double> reconstruct_bins(const Spectrum& s, const std::vector<int>& bins) {
    std::vector<double> out(s.n, 0.0);
    const double step = 2.0 * std::numbers::pi / double(s.n);
    for (int k : bins) {
        if (k < 0 || k >= s.num_bins()) throw std::invalid_argument("reconstruct_bins: bin out of range");
        bool has_conjugate = k != 0 && !(s.n % 2 == 0 && k == s.n / 2);
        double scale = (has_conjugate ? 2.0 : 1.0) / double(s.n);
        for (int i = 0; i < s.n; ++i) {
            double angle = step * double(k) * double(i);
            out[i] += scale * (s.re[k] * std::cos(angle) - s.im[k] * std::sin(angle));
        }
    }
    return out;
}

}  // namespace stripesim
