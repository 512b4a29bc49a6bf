#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "relus/core.hpp"

namespace relus {

enum class Dist { gaussian, uniform };

struct GenSpec {
    std::size_t d = 2;
    std::size_t n = 1;
    Dist dist = Dist::gaussian;
    std::uint64_t seed = 0;
};

/// Features with labels as parsed from external files, before normalization.
struct RawTable {
    std::vector<Vec> features;
    std::vector<int> labels;  // +-1
};

/// Linearly separable dataset: draws x_i and a hidden witness from the
/// requested distribution, labels by the sign of the witness inner product, rescales the
/// witness so the minimum margin is exactly 1, then jointly rescales features
/// into the unit ball (margins are invariant under (x/c, c*w)).
Dataset gen_separable(const GenSpec& spec);

/// Same construction, plus a held-out draw from the same hidden witness and
/// the same feature scaling.  Held-out samples may fall outside the unit ball;
/// they are for risk estimation only and carry no witness.
std::pair<Dataset, Dataset> gen_separable_split(const GenSpec& spec, std::size_t n_test);

/// Canonical-basis dataset {(e_1,+1),...,(e_d,+1)} with all-ones witness.
Dataset gen_adversarial(std::size_t d);

/// CSV loader.  A header row is auto-detected by a non-numeric feature field.
/// positive_label maps that label value to +1 and every other value to -1;
/// when empty, exactly two distinct label values are required and the first
/// one seen maps to +1.
RawTable load_csv(const std::string& path, std::size_t label_column,
                  const std::string& positive_label = "");

/// IDX loader (big-endian magic 0x803 images / 0x801 labels).  Keeps only
/// samples whose byte label is keep.first or keep.second and maps them to
/// relabel.first / relabel.second; images flatten to raw byte intensities.
RawTable load_idx(const std::string& images_path, const std::string& labels_path,
                  std::pair<int, int> keep, std::pair<int, int> relabel);

/// Scales all feature vectors by 1/max_i||x_i||; no witness is attached.
Dataset finalize(const RawTable& table);

void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace relus
