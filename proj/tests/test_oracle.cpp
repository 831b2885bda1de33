#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stripesim/external_oracle.hpp"
#include "stripesim/fixtures.hpp"
#include "stripesim/oracle.hpp"
#include "stripesim/trigger.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

using namespace stripesim;

namespace {

ImageBuffer rotate90(const ImageBuffer& img) {
    ImageBuffer out;
    out.width = img.height;
    out.height = img.width;
    out.pixels.resize(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* src = img.at(x, y);
            std::uint8_t* dst = out.at(img.height - 1 - y, x);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return out;
}

std::string loopback_path() {
    const char* env = std::getenv("STRIPESIM_LOOPBACK");
    REQUIRE(env != nullptr);
    return env;
}

// Exhaustive reference: try every candidate cut point, keep the smallest
// whose accept fraction stays within the target.
double exhaustive_threshold(std::vector<double> scores, double far_target) {
    std::sort(scores.begin(), scores.end());
    std::size_t n = scores.size();
    double best = std::nextafter(scores.back(), 1e300);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t accepts = 0;
        for (double s : scores) {
            if (s >= scores[i]) ++accepts;
        }
        if (double(accepts) / double(n) <= far_target) {
            best = scores[i];
            break;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("embedding dimension and self-similarity") {
    ImageBuffer img = render_fixture_face(3, 0, 0);
    std::vector<double> e = surrogate_embed(img);
    CHECK(int(e.size()) == kEmbedDim);
    CHECK(cosine_similarity(e, surrogate_embed(img)) == 1.0);
    CHECK(surrogate_score(img, img) == 1.0);
}

TEST_CASE("uniform gray image: gradient histogram is all zero") {
    ImageBuffer gray = ImageBuffer::filled(64, 64, 128, 128, 128);
    std::vector<double> e = surrogate_embed(gray);
    for (int i = kEmbedDim - kEmbedOrientationBins; i < kEmbedDim; ++i) CHECK(e[i] == 0.0);
}

TEST_CASE("rotation breaks self-similarity on an asymmetric card") {
    ImageBuffer img = render_fixture_face(3, 1, 0);
    double sim = surrogate_score(img, rotate90(img));
    CHECK(sim < 1.0);
}

TEST_CASE("embedding is too small below 32x32") {
    ImageBuffer tiny = ImageBuffer::filled(16, 16, 10, 20, 30);
    CHECK_THROWS_AS(surrogate_embed(tiny), std::invalid_argument);
}

TEST_CASE("verify follows the threshold rule and is symmetric") {
    ImageBuffer a = ImageBuffer::filled(64, 64, 200, 40, 40);
    ImageBuffer b = ImageBuffer::filled(64, 64, 40, 40, 200);
    double score = surrogate_score(a, b);

    OracleBinding binding;
    binding.threshold = score;  // ties accept
    CHECK(verify(a, b, binding).accepted);
    binding.threshold = std::nextafter(score, 2.0);
    CHECK_FALSE(verify(a, b, binding).accepted);

    CHECK(verify(a, b, binding).score == verify(b, a, binding).score);

    binding.threshold = 0.5;
    CHECK(verify(a, a, binding).accepted);

    binding.threshold = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(verify(a, b, binding), std::logic_error);
}

TEST_CASE("embedding is invariant under the identity trigger") {
    ImageBuffer img = render_fixture_face(5, 2, 1);
    SensorConfig sensor;
    TriggerSpec spec{make_monochromatic(344.89, 1.0), sensor, 0.0, std::nullopt};
    for (double phase : attempt_phases(3, 1.0 / 344.89)) {
        spec.global_phase_s = phase;
        CHECK(surrogate_embed(inject_trigger(img, spec)) == surrogate_embed(img));
    }
}

TEST_CASE("calibrate_threshold: boundary conventions") {
    // No accepts allowed: strictly above the maximum.
    std::vector<double> scores{0.1, 0.5, 0.9};
    double t = calibrate_threshold(scores, 0.001);
    CHECK(t == std::nextafter(0.9, 2.0));
    // Everything accepted.
    CHECK(calibrate_threshold(scores, 1.0) == 0.1);
    CHECK_THROWS_AS(calibrate_threshold(std::vector<double>{}, 0.001), std::invalid_argument);
}

TEST_CASE("calibrate_threshold matches the exhaustive scan on seeded scores") {
    std::mt19937_64 rng(1234);
    std::vector<double> scores(1000);
    for (double& s : scores) s = test_util::uniform(rng, -1.0, 1.0);
    for (double far : {0.001, 0.01, 0.05, 0.25}) {
        CHECK(calibrate_threshold(scores, far) == exhaustive_threshold(scores, far));
    }
}

TEST_CASE("calibrate_threshold is monotone in the FAR target") {
    std::mt19937_64 rng(77);
    std::vector<double> scores(500);
    for (double& s : scores) s = test_util::uniform(rng, 0.0, 1.0);
    double prev = 2.0;
    for (double far : {0.002, 0.01, 0.05, 0.2, 0.5}) {
        double t = calibrate_threshold(scores, far);
        REQUIRE(t <= prev);
        prev = t;
    }
}

TEST_CASE("measured FAR at the calibrated threshold stays within target") {
    std::mt19937_64 rng(31);
    std::vector<double> scores(2000);
    for (double& s : scores) s = test_util::uniform(rng, -1.0, 1.0);
    double far = 0.001;
    double t = calibrate_threshold(scores, far);
    std::size_t accepts = 0;
    for (double s : scores) {
        if (s >= t) ++accepts;
    }
    CHECK(double(accepts) / double(scores.size()) <= far);
}

TEST_CASE("quality check: all-black fails, fixtures pass, stripes tolerated") {
    ImageBuffer black = ImageBuffer::filled(128, 128, 0, 0, 0);
    QualityReport r = quality_check(black);
    CHECK_FALSE(r.face_detected);
    CHECK_FALSE(r.passes);

    ImageBuffer face = render_fixture_face(7, 4, 0);
    QualityReport clean = quality_check(face);
    CHECK(clean.face_detected);
    CHECK(clean.contrast_ok);
    CHECK(clean.passes);

    SensorConfig sensor;
    TriggerSpec spec{make_monochromatic(344.89, 0.5), sensor, 0.0, std::nullopt};
    QualityReport striped = quality_check(inject_trigger(face, spec));
    CHECK(striped.contrast_ok);
    CHECK(striped.passes);
}

TEST_CASE("quality check: passes iff both components hold") {
    ImageBuffer face = render_fixture_face(7, 5, 0);
    QualityReport r = quality_check(face);
    CHECK(r.passes == (r.face_detected && r.contrast_ok));
}

TEST_CASE("external loopback oracle reproduces surrogate decisions") {
    test_util::TempDir tmp("oracle");
    ExternalOracle oracle(loopback_path() + " 0.995", 30.0);

    OracleBinding external;
    external.kind = OracleKind::External;
    external.threshold = 0.995;
    external.external = &oracle;

    OracleBinding surrogate;
    surrogate.threshold = 0.995;

    for (int id = 0; id < 8; ++id) {
        ImageBuffer a = render_fixture_face(900, id, 0);
        ImageBuffer b = render_fixture_face(900, (id + 3) % 8, 1);
        VerifyDecision ext = verify(a, b, external);
        VerifyDecision sur = verify(a, b, surrogate);
        REQUIRE(ext.accepted == sur.accepted);
        REQUIRE(ext.score.has_value());
        REQUIRE(*ext.score == doctest::Approx(*sur.score).epsilon(1e-15));
    }

    // DETECT mirrors the local heuristic.
    ImageBuffer face = render_fixture_face(900, 1, 0);
    CHECK(quality_check(face, external).face_detected == quality_check(face).face_detected);
    ImageBuffer black = ImageBuffer::filled(64, 64, 0, 0, 0);
    CHECK_FALSE(quality_check(black, external).face_detected);
}

TEST_CASE("external oracle failure modes are reported distinctly") {
    ImageBuffer a = ImageBuffer::filled(64, 64, 100, 100, 100);
    ImageBuffer b = ImageBuffer::filled(64, 64, 120, 120, 120);

    // cat echoes the request line back: a malformed reply.
    {
        ExternalOracle echo("cat", 5.0);
        try {
            echo.verify_images(a, b);
            FAIL("expected OracleError");
        } catch (const OracleError& e) {
            CHECK(e.kind() == OracleErrorKind::MalformedReply);
        }
    }
    // sleep never answers: a timeout.
    {
        ExternalOracle silent("sleep 30", 0.2);
        try {
            silent.verify_images(a, b);
            FAIL("expected OracleError");
        } catch (const OracleError& e) {
            CHECK(e.kind() == OracleErrorKind::Timeout);
        }
    }
    // A command that exits immediately: child gone.
    {
        ExternalOracle dead("true", 5.0);
        try {
            dead.verify_images(a, b);
            FAIL("expected OracleError");
        } catch (const OracleError& e) {
            bool gone = e.kind() == OracleErrorKind::ChildExited;
            CHECK(gone);
        }
    }
    // ERR replies surface as protocol errors (loopback on a bad file).
    {
        ExternalOracle oracle(loopback_path() + " 0.9", 30.0);
        try {
            oracle.verify_paths("/nonexistent/a.png", "/nonexistent/b.png");
            FAIL("expected OracleError");
        } catch (const OracleError& e) {
            CHECK(e.kind() == OracleErrorKind::Protocol);
        }
    }
}
