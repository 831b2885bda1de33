#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace test_util {

/// Adaptive quadrature for a piecewise-constant black-box integrand: starts
/// from cells narrower than half the smallest feature (so a constant-looking
/// cell really is constant), then bisects every cell whose samples disagree
/// until the floating-point grid bottoms out.
inline double piecewise_quadrature(const std::function<double(double)>& f, double a, double b,
                                   double min_feature_width) {
    std::function<double(double, double, double, double)> cell = [&](double x0, double x1,
                                                                     double f0, double f1) {
        double mid = 0.5 * (x0 + x1);
        if (mid <= x0 || mid >= x1) return 0.5 * (x1 - x0) * (f0 + f1);
        double fm = f(mid);
        if (f0 == fm && fm == f1) return (x1 - x0) * fm;
        return cell(x0, mid, f0, fm) + cell(mid, x1, fm, f1);
    };

    long n = 1;
    if (min_feature_width > 0.0) {
        double cells = (b - a) / (0.5 * min_feature_width);
        n = cells < 1.0 ? 1 : (cells > double(1 << 21) ? (1 << 21) : long(cells) + 1);
    }
    double sum = 0.0;
    double prev_x = a;
    double prev_f = f(a);
    for (long i = 1; i <= n; ++i) {
        double x = a + (b - a) * double(i) / double(n);
        if (i == n) x = b;
        double fx = f(x);
        sum += cell(prev_x, x, prev_f, fx);
        prev_x = x;
        prev_f = fx;
    }
    return sum;
}

/// Unique scratch directory under the system tmp; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / ("stripesim-" + tag + "-XXXXXX");
        std::string templ = base.string();
        if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    std::string path_;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1p-53);
}

}  // namespace test_util
