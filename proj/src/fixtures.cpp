#include "stripesim/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace stripesim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic parameter stream keyed by (seed, identity, sample, slot).
class ParamStream {
public:
    ParamStream(std::uint64_t seed, int identity, int sample)
        : key_(splitmix64(seed ^ splitmix64(std::uint64_t(identity) * 2654435761ULL + 1) ^
                          splitmix64(std::uint64_t(sample) + 0x517cc1b727220a95ULL))) {}

    double uniform(double lo, double hi) {
        key_ = splitmix64(key_);
        double t = double(key_ >> 11) * 0x1p-53;
        return lo + t * (hi - lo);
    }

    int uniform_int(int lo, int hi) {  // inclusive
        return lo + int(uniform(0.0, double(hi - lo + 1)) * (1.0 - 1e-12));
    }

private:
    std::uint64_t key_;
};

double value_noise(std::uint64_t key, double x, double y, double cell) {
    auto lattice = [&](long ix, long iy) {
        std::uint64_t h = splitmix64(key ^ splitmix64(std::uint64_t(ix) * 0x9e3779b97f4a7c15ULL) ^
                                     splitmix64(std::uint64_t(iy) + 0xda942042e4dd58b5ULL));
        return double(h >> 11) * 0x1p-53 * 2.0 - 1.0;
    };
    double gx = x / cell;
    double gy = y / cell;
    long x0 = long(std::floor(gx));
    long y0 = long(std::floor(gy));
    double fx = gx - double(x0);
    double fy = gy - double(y0);
    double top = lattice(x0, y0) * (1.0 - fx) + lattice(x0 + 1, y0) * fx;
    double bottom = lattice(x0, y0 + 1) * (1.0 - fx) + lattice(x0 + 1, y0 + 1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

struct Rgbd {
    double r, g, b;
};

void paint_ellipse(std::vector<Rgbd>& canvas, int size, double cx, double cy, double rx, double ry,
                   Rgbd color, double softness = 1.5) {
    int x0 = std::max(0, int(cx - rx - 2));
    int x1 = std::min(size - 1, int(cx + rx + 2));
    int y0 = std::max(0, int(cy - ry - 2));
    int y1 = std::min(size - 1, int(cy + ry + 2));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double dx = (x - cx) / rx;
            double dy = (y - cy) / ry;
            double d = std::sqrt(dx * dx + dy * dy);
            if (d > 1.0 + softness / rx) continue;
            double alpha = d <= 1.0 ? 1.0 : std::max(0.0, 1.0 - (d - 1.0) * rx / softness);
            Rgbd& px = canvas[std::size_t(y) * size + x];
            px.r += alpha * (color.r - px.r);
            px.g += alpha * (color.g - px.g);
            px.b += alpha * (color.b - px.b);
        }
    }
}

}  // namespace

ImageBuffer render_fixture_face(std::uint64_t seed, int identity, int sample) {
    const int size = kFixtureSize;

    // Identity-level appearance parameters; sample 0/1 share them.
    ParamStream id_params(seed, identity, /*sample=*/-1);
    double bg_top = id_params.uniform(100.0, 200.0);
    double bg_bottom = bg_top + id_params.uniform(-35.0, 35.0);
    double bg_slant = id_params.uniform(-18.0, 18.0);  // left-right luminance tilt
    double bg_tint_r = id_params.uniform(-32.0, 32.0);
    double bg_tint_b = id_params.uniform(-32.0, 32.0);

    Rgbd skin{id_params.uniform(125.0, 230.0), id_params.uniform(95.0, 190.0),
              id_params.uniform(75.0, 170.0)};
    double face_rx = id_params.uniform(50.0, 84.0);
    double face_ry = id_params.uniform(70.0, 104.0);
    double eye_dx = id_params.uniform(20.0, 36.0);
    double eye_dy = id_params.uniform(16.0, 32.0);
    double eye_r = id_params.uniform(6.0, 11.0);
    Rgbd eye{id_params.uniform(20.0, 80.0), id_params.uniform(20.0, 80.0),
             id_params.uniform(25.0, 100.0)};
    double brow_dy = id_params.uniform(9.0, 17.0);
    double mouth_dy = id_params.uniform(32.0, 50.0);
    double mouth_rx = id_params.uniform(12.0, 24.0);
    double mouth_ry = id_params.uniform(4.0, 10.0);
    Rgbd mouth{skin.r * id_params.uniform(0.6, 0.9), skin.g * id_params.uniform(0.35, 0.55),
               skin.b * id_params.uniform(0.35, 0.6)};
    double nose_len = id_params.uniform(16.0, 30.0);
    double hair_drop = id_params.uniform(0.0, 46.0);  // hair band height; 0 = bald card
    Rgbd hair{id_params.uniform(20.0, 120.0), id_params.uniform(15.0, 100.0),
              id_params.uniform(15.0, 110.0)};
    double texture_cell = id_params.uniform(4.0, 14.0);
    double texture_amp = id_params.uniform(3.0, 12.0);
    std::uint64_t texture_key = splitmix64(seed ^ splitmix64(std::uint64_t(identity) + 77));

    // Sample-level jitter: small geometric and photometric perturbations.
    ParamStream jitter(seed, identity, sample);
    double jx = jitter.uniform(-3.0, 3.0);
    double jy = jitter.uniform(-3.0, 3.0);
    double brightness = jitter.uniform(0.97, 1.03);
    double color_jr = jitter.uniform(-4.0, 4.0);
    double color_jg = jitter.uniform(-4.0, 4.0);
    double color_jb = jitter.uniform(-4.0, 4.0);
    std::uint64_t grain_key = splitmix64(seed ^ splitmix64(std::uint64_t(identity) * 31 + sample));

    std::vector<Rgbd> canvas(std::size_t(size) * size);
    for (int y = 0; y < size; ++y) {
        double ty = double(y) / double(size - 1);
        double base = bg_top + (bg_bottom - bg_top) * ty;
        for (int x = 0; x < size; ++x) {
            double tx = double(x) / double(size - 1) - 0.5;
            double v = base + bg_slant * tx;
            canvas[std::size_t(y) * size + x] = {v + bg_tint_r, v, v + bg_tint_b};
        }
    }

    double cx = size / 2.0 + jx;
    double cy = size / 2.0 + 12.0 + jy;
    if (hair_drop > 6.0) {
        paint_ellipse(canvas, size, cx, cy - face_ry * 0.72, face_rx * 1.12,
                      face_ry * 0.45 + hair_drop * 0.3, hair);
    }
    paint_ellipse(canvas, size, cx, cy, face_rx, face_ry, skin);

    // Facial texture, identity-keyed so both samples share it.
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double dx = (x - cx) / face_rx;
            double dy = (y - cy) / face_ry;
            if (dx * dx + dy * dy > 1.0) continue;
            double n = value_noise(texture_key, x - jx, y - jy, texture_cell) * texture_amp;
            Rgbd& px = canvas[std::size_t(y) * size + x];
            px.r += n;
            px.g += n;
            px.b += n * 0.7;
        }
    }

    paint_ellipse(canvas, size, cx - eye_dx, cy - eye_dy, eye_r, eye_r * 0.62, eye);
    paint_ellipse(canvas, size, cx + eye_dx, cy - eye_dy, eye_r, eye_r * 0.62, eye);
    Rgbd brow{eye.r * 0.8, eye.g * 0.8, eye.b * 0.6};
    paint_ellipse(canvas, size, cx - eye_dx, cy - eye_dy - brow_dy, eye_r * 1.5, 2.2, brow);
    paint_ellipse(canvas, size, cx + eye_dx, cy - eye_dy - brow_dy, eye_r * 1.5, 2.2, brow);
    Rgbd nose{skin.r * 0.82, skin.g * 0.82, skin.b * 0.82};
    paint_ellipse(canvas, size, cx, cy + nose_len * 0.35, 4.5, nose_len * 0.55, nose);
    paint_ellipse(canvas, size, cx, cy + mouth_dy, mouth_rx, mouth_ry, mouth);

    ImageBuffer img;
    img.width = size;
    img.height = size;
    img.pixels.resize(std::size_t(size) * size * 3);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const Rgbd& px = canvas[std::size_t(y) * size + x];
            // Fine per-sample grain, then photometric jitter.
            double grain = value_noise(grain_key, x, y, 2.0) * 1.5;
            double r = (px.r + grain + color_jr) * brightness;
            double g = (px.g + grain + color_jg) * brightness;
            double b = (px.b + grain + color_jb) * brightness;
            std::uint8_t* dst = img.at(x, y);
            dst[0] = std::uint8_t(std::lround(std::clamp(r, 0.0, 255.0)));
            dst[1] = std::uint8_t(std::lround(std::clamp(g, 0.0, 255.0)));
            dst[2] = std::uint8_t(std::lround(std::clamp(b, 0.0, 255.0)));
        }
    }
    return img;
}

PairSet generate_fixture_set(std::uint64_t seed, int count, const std::string& out_dir) {
    if (count < 2) throw std::invalid_argument("generate_fixture_set: need at least 2 identities");

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("generate_fixture_set: cannot create " + out_dir);

    PairSet set;
    set.name = "fixtures-" + std::to_string(seed) + "-" + std::to_string(count);

    std::vector<std::array<std::string, 2>> paths(count);
    for (int id = 0; id < count; ++id) {
        char sub[32];
        std::snprintf(sub, sizeof sub, "id_%03d", id);
        fs::path dir = fs::path(out_dir) / sub;
        fs::create_directories(dir, ec);
        if (ec) throw std::runtime_error("generate_fixture_set: cannot create " + dir.string());
        for (int sample = 0; sample < 2; ++sample) {
            ImageBuffer img = render_fixture_face(seed, id, sample);
            fs::path file = dir / ("s" + std::to_string(sample) + ".png");
            save_png(img, file.string());
            paths[id][sample] = file.string();
        }
        set.genuine.push_back({paths[id][0], paths[id][1]});
    }
    for (int i = 0; i < count; ++i) {
        for (int j = i + 1; j < count; ++j) {
            set.impostor.push_back({paths[i][0], paths[j][1]});
        }
    }
    return set;
}

PairSet load_pairset_from_dir(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("load_pairset_from_dir: not a directory: " + dir);
    }

    std::vector<std::vector<std::string>> identities;
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const fs::path& sub : subdirs) {
        std::vector<std::string> images;
        for (const auto& entry : fs::directory_iterator(sub)) {
            if (entry.is_regular_file() && entry.path().extension() == ".png") {
                images.push_back(entry.path().string());
            }
        }
        std::sort(images.begin(), images.end());
        if (images.size() >= 2) identities.push_back(std::move(images));
    }
    if (identities.size() < 2) {
        throw std::runtime_error(
            "load_pairset_from_dir: need at least two identity subdirectories with two PNGs "
            "each under " +
            dir);
    }

    PairSet set;
    set.name = name.empty() ? fs::path(dir).filename().string() : name;
    for (const auto& images : identities) set.genuine.push_back({images[0], images[1]});
    for (std::size_t i = 0; i < identities.size(); ++i) {
        for (std::size_t j = i + 1; j < identities.size(); ++j) {
            set.impostor.push_back({identities[i][0], identities[j][1]});
        }
    }
    return set;
}

}  // namespace stripesim
