#pragma once

#include <string>
#include <vector>

namespace stripesim {

/// Verification pair lists. Genuine pairs share an identity, impostor pairs
/// do not; paths must resolve when the set is used.
struct PairSet {
    struct Pair {
        std::string a;
        std::string b;
    };

    std::string name;
    std::vector<Pair> genuine;
    std::vector<Pair> impostor;
};

/// Folder convention: one subdirectory per identity, images sorted by name.
/// Genuine pairs are (first, second) image of each identity with >= 2
/// images; impostor pairs are (first of i, second of j) for i < j.
PairSet load_pairset_from_dir(const std::string& dir, const std::string& name = "");

}  // namespace stripesim
