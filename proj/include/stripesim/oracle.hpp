#pragma once

#include "stripesim/image.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace stripesim {

class ExternalOracle;

struct VerifyDecision {
    bool accepted = false;
    std::optional<double> score;  // similarity, higher = more similar
};

struct QualityReport {
    bool face_detected = false;
    bool contrast_ok = false;
    bool passes = false;
};

enum class OracleKind { Surrogate, External };

/// Decision-level binding: the surrogate embeds locally, an External
/// binding forwards to a child process speaking the line protocol (see
/// external_oracle.hpp). Accept when score >= threshold; ties accept.
struct OracleBinding {
    OracleKind kind = OracleKind::Surrogate;
    double threshold = 0.0;
    double far_target = 0.001;
    ExternalOracle* external = nullptr;  // non-owning, required when kind == External
};

// Surrogate embedding layout: a 4x4 grid of per-channel block statistics,
// mean (centered at mid-gray) and spread (variance^1/2), 4*4*3*2 = 96
// entries, followed by an 8-bin magnitude-weighted gradient orientation
// histogram over the luminance plane (L1-normalized), all L2-normalized.
inline constexpr int kEmbedGrid = 4;
inline constexpr int kEmbedOrientationBins = 8;
inline constexpr int kEmbedDim = kEmbedGrid * kEmbedGrid * 3 * 2 + kEmbedOrientationBins;
inline constexpr double kEmbedHistWeight = 1.0;

/// Deterministic hand-crafted feature vector; requires at least 32x32.
std::vector<double> surrogate_embed(const ImageBuffer& img);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Cosine similarity of the surrogate embeddings of two images.
double surrogate_score(const ImageBuffer& a, const ImageBuffer& b);

VerifyDecision verify(const ImageBuffer& a, const ImageBuffer& b, const OracleBinding& binding);

/// Smallest threshold such that the accepted fraction of the given impostor
/// scores is <= far_target. With zero accepts allowed this is strictly above
/// the maximum score (std::nextafter convention).
double calibrate_threshold(std::vector<double> impostor_scores, double far_target);

/// Convenience: scores every impostor pair through the binding first.
double calibrate_threshold(const std::vector<std::pair<ImageBuffer, ImageBuffer>>& impostor_pairs,
                           double far_target, const OracleBinding& binding);

// Face-detection heuristic floors (central region = middle half of each axis):
//   luminance stddev          >= kQualityMinStddev
//   edge density              >= kQualityMinEdgeDensity (Sobel mag > kQualityEdgeMag)
//   illumination uniformity   >= kQualityMinUniformity (smoothed scanline-mean
//                                min/max ratio, worse of the two axes)
// and contrast_ok: fraction of channel samples at 0 or 255 below 40%.
inline constexpr double kQualityMinStddev = 10.0;
inline constexpr double kQualityMinEdgeDensity = 0.02;
inline constexpr double kQualityEdgeMag = 24.0;
inline constexpr double kQualityMinUniformity = 0.48;
inline constexpr double kQualityMaxClampedFraction = 0.40;

QualityReport quality_check(const ImageBuffer& img);

/// External bindings answer face detection through the DETECT request;
/// contrast_ok stays a local image measurement.
QualityReport quality_check(const ImageBuffer& img, const OracleBinding& binding);

}  // namespace stripesim
