#include "stripesim/oracle.hpp"

#include "stripesim/external_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stripesim {

namespace {

std::vector<double> luminance_plane(const ImageBuffer& img) {
    std::vector<double> lum(img.pixel_count());
    for (std::size_t i = 0; i < lum.size(); ++i) {
        lum[i] = luminance(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]);
    }
    return lum;
}

struct SobelResult {
    double gx = 0.0;
    double gy = 0.0;
};

SobelResult sobel_at(const std::vector<double>& lum, int w, int x, int y) {
    auto v = [&](int xx, int yy) { return lum[std::size_t(yy) * w + xx]; };
    SobelResult r;
    r.gx = (v(x + 1, y - 1) + 2.0 * v(x + 1, y) + v(x + 1, y + 1)) -
           (v(x - 1, y - 1) + 2.0 * v(x - 1, y) + v(x - 1, y + 1));
    r.gy = (v(x - 1, y + 1) + 2.0 * v(x, y + 1) + v(x + 1, y + 1)) -
           (v(x - 1, y - 1) + 2.0 * v(x, y - 1) + v(x + 1, y - 1));
    return r;
}

// Smoothed min/max ratio of a mean profile; 0 when never lit.
double profile_uniformity(const std::vector<double>& profile) {
    int n = int(profile.size());
    double mn = 0.0, mx = 0.0;
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - 2);
        int hi = std::min(n - 1, i + 2);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += profile[j];
        s /= double(hi - lo + 1);
        if (i == 0 || s < mn) mn = s;
        if (i == 0 || s > mx) mx = s;
    }
    if (mx <= 0.0) return 0.0;
    return mn / mx;
}

}  // namespace

std::vector<double> surrogate_embed(const ImageBuffer& img) {
    if (img.width < 32 || img.height < 32) {
        throw std::invalid_argument("surrogate_embed: image must be at least 32x32");
    }

    std::vector<double> features;
    features.reserve(kEmbedDim);

    // Block color statistics on a 4x4 grid: per-channel mean (centered at
    // mid-gray, so the shared DC term of every natural image drops out of
    // the cosine) and spread (variance^1/2, same unit scale as the mean).
    for (int by = 0; by < kEmbedGrid; ++by) {
        for (int bx = 0; bx < kEmbedGrid; ++bx) {
            int x0 = bx * img.width / kEmbedGrid;
            int x1 = (bx + 1) * img.width / kEmbedGrid;
            int y0 = by * img.height / kEmbedGrid;
            int y1 = (by + 1) * img.height / kEmbedGrid;
            double count = double(x1 - x0) * double(y1 - y0);
            for (int c = 0; c < 3; ++c) {
                double sum = 0.0, sum_sq = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        double v = img.at(x, y)[c] / 255.0;
                        sum += v;
                        sum_sq += v * v;
                    }
                }
                double mean = sum / count;
                double var = std::max(sum_sq / count - mean * mean, 0.0);
                features.push_back(mean - 0.5);
                features.push_back(std::sqrt(var));
            }
        }
    }

    // Gradient orientation histogram over the luminance plane,
    // magnitude-weighted, unsigned orientations. L1-normalized so the bins
    // carry the orientation distribution; all-zero on flat images.
    std::vector<double> lum = luminance_plane(img);
    std::vector<double> hist(kEmbedOrientationBins, 0.0);
    double total_mag = 0.0;
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            SobelResult g = sobel_at(lum, img.width, x, y);
            double mag = std::sqrt(g.gx * g.gx + g.gy * g.gy);
            if (mag <= 0.0) continue;
            double angle = std::atan2(g.gy, g.gx);
            if (angle < 0.0) angle += std::numbers::pi;
            if (angle >= std::numbers::pi) angle -= std::numbers::pi;
            int bin = std::min(kEmbedOrientationBins - 1,
                               int(angle / std::numbers::pi * kEmbedOrientationBins));
            hist[bin] += mag;
            total_mag += mag;
        }
    }
    if (total_mag > 0.0) {
        for (double& h : hist) h = h / total_mag * kEmbedHistWeight;
    }
    features.insert(features.end(), hist.begin(), hist.end());

    double norm_sq = 0.0;
    for (double f : features) norm_sq += f * f;
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (double& f : features) f *= inv;
    }
    return features;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
    if (a == b) return 1.0;  // exact self-similarity
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double surrogate_score(const ImageBuffer& a, const ImageBuffer& b) {
    return cosine_similarity(surrogate_embed(a), surrogate_embed(b));
}

VerifyDecision verify(const ImageBuffer& a, const ImageBuffer& b, const OracleBinding& binding) {
    if (std::isnan(binding.threshold)) {
        throw std::logic_error("verify: oracle threshold has not been calibrated or set");
    }
    if (binding.kind == OracleKind::External) {
        if (!binding.external) throw std::invalid_argument("verify: external binding has no process");
        return binding.external->verify_images(a, b);
    }
    VerifyDecision d;
    d.score = surrogate_score(a, b);
    d.accepted = *d.score >= binding.threshold;
    return d;
}

double calibrate_threshold(std::vector<double> impostor_scores, double far_target) {
    if (impostor_scores.empty()) {
        throw std::invalid_argument("calibrate_threshold: empty impostor score list");
    }
    if (!(far_target > 0.0)) {
        throw std::invalid_argument("calibrate_threshold: far_target must be positive");
    }
    std::size_t n = impostor_scores.size();
    if (double(n) < 1.0 / far_target) {
        std::fprintf(stderr,
                     "calibrate_threshold: %zu impostor pairs is below the recommended %.0f "
                     "for FAR %g\n",
                     n, 1.0 / far_target, far_target);
    }
    std::sort(impostor_scores.begin(), impostor_scores.end());
    if (far_target >= 1.0) return impostor_scores.front();

    std::size_t allowed = std::size_t(std::floor(far_target * double(n)));
    // Smallest candidate threshold accepting at most `allowed` scores.
    // Candidates are the scores themselves, plus strictly-above-max.
    for (std::size_t i = 0; i < n; ++i) {
        double t = impostor_scores[i];
        std::size_t first = std::size_t(
            std::lower_bound(impostor_scores.begin(), impostor_scores.end(), t) -
            impostor_scores.begin());
        std::size_t accepts = n - first;
        if (accepts <= allowed) return t;
    }
    return std::nextafter(impostor_scores.back(), std::numeric_limits<double>::infinity());
}

double calibrate_threshold(const std::vector<std::pair<ImageBuffer, ImageBuffer>>& impostor_pairs,
                           double far_target, const OracleBinding& binding) {
    if (impostor_pairs.empty()) {
        throw std::invalid_argument("calibrate_threshold: empty impostor pair list");
    }
    std::vector<double> scores;
    scores.reserve(impostor_pairs.size());
    for (const auto& [a, b] : impostor_pairs) {
        if (binding.kind == OracleKind::External) {
            if (!binding.external) {
                throw std::invalid_argument("calibrate_threshold: external binding has no process");
            }
            VerifyDecision d = binding.external->verify_images(a, b);
            if (!d.score) {
                throw OracleError(OracleErrorKind::Protocol,
                                  "calibrate_threshold: external oracle returned no score");
            }
            scores.push_back(*d.score);
        } else {
            scores.push_back(surrogate_score(a, b));
        }
    }
    return calibrate_threshold(std::move(scores), far_target);
}

QualityReport quality_check(const ImageBuffer& img) {
    QualityReport report;
    if (img.empty()) return report;

    std::vector<double> lum = luminance_plane(img);

    // Central-region statistics.
    int x0 = img.width / 4, x1 = 3 * img.width / 4;
    int y0 = img.height / 4, y1 = 3 * img.height / 4;
    x1 = std::max(x1, x0 + 1);
    y1 = std::max(y1, y0 + 1);
    double count = double(x1 - x0) * double(y1 - y0);
    double sum = 0.0, sum_sq = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            double v = lum[std::size_t(y) * img.width + x];
            sum += v;
            sum_sq += v * v;
        }
    }
    double mean = sum / count;
    double stddev = std::sqrt(std::max(sum_sq / count - mean * mean, 0.0));

    double edges = 0.0, edge_total = 0.0;
    for (int y = std::max(y0, 1); y < std::min(y1, img.height - 1); ++y) {
        for (int x = std::max(x0, 1); x < std::min(x1, img.width - 1); ++x) {
            SobelResult g = sobel_at(lum, img.width, x, y);
            double mag = std::sqrt(g.gx * g.gx + g.gy * g.gy);
            edge_total += 1.0;
            if (mag > kQualityEdgeMag) edges += 1.0;
        }
    }
    double edge_density = edge_total > 0.0 ? edges / edge_total : 0.0;

    // Illumination uniformity along both scanline axes.
    std::vector<double> col_means(img.width, 0.0);
    std::vector<double> row_means(img.height, 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v = lum[std::size_t(y) * img.width + x];
            col_means[x] += v;
            row_means[y] += v;
        }
    }
    for (double& v : col_means) v /= double(img.height);
    for (double& v : row_means) v /= double(img.width);
    double uniformity = std::min(profile_uniformity(col_means), profile_uniformity(row_means));

    report.face_detected = stddev >= kQualityMinStddev &&
                           edge_density >= kQualityMinEdgeDensity &&
                           uniformity >= kQualityMinUniformity;

    std::size_t clamped = 0;
    for (std::uint8_t v : img.pixels) {
        if (v == 0 || v == 255) ++clamped;
    }
    report.contrast_ok = double(clamped) / double(img.pixels.size()) < kQualityMaxClampedFraction;
    report.passes = report.face_detected && report.contrast_ok;
    return report;
}

QualityReport quality_check(const ImageBuffer& img, const OracleBinding& binding) {
    if (binding.kind != OracleKind::External) return quality_check(img);
    if (!binding.external) throw std::invalid_argument("quality_check: external binding has no process");
    QualityReport report = quality_check(img);
    report.face_detected = binding.external->detect_image(img);
    report.passes = report.face_detected && report.contrast_ok;
    return report;
}

}  // namespace stripesim
