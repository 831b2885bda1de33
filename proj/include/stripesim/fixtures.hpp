#pragma once

#include "stripesim/image.hpp"
#include "stripesim/pairs.hpp"

#include <cstdint>

namespace stripesim {

inline constexpr int kFixtureSize = 256;

/// Procedural face-like test card: layered ellipses, gradients and texture
/// with per-identity parameters. sample selects the jittered variant (two
/// per identity). Bit-identical for equal (seed, identity, sample).
ImageBuffer render_fixture_face(std::uint64_t seed, int identity, int sample);

/// Writes count identities x 2 samples as PNGs under out_dir (one
/// subdirectory per identity) and returns the pairings: count genuine pairs
/// and count*(count-1)/2 impostor pairs.
PairSet generate_fixture_set(std::uint64_t seed, int count, const std::string& out_dir);

}  // namespace stripesim
