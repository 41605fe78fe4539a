#pragma once

#include <string>
#include <vector>

#include "dtc/tae.hpp"

namespace dtc::dataio {

struct Checkpoint {
    tae::TaeModel model;
    std::vector<std::vector<double>> centroids;  // empty when none were saved
};

// Binary, versioned container for a model and (optionally) cluster
// centroids. Parameter values are stored as raw little-endian doubles, so a
// save/load/save round trip is byte-identical. The payload carries a
// checksum; truncated or corrupted files are rejected on load.
void save_checkpoint(const std::string& path, const tae::TaeModel& model,
                     const std::vector<std::vector<double>>* centroids = nullptr);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace dtc::dataio
