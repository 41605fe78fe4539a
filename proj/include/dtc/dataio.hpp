#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dtc::dataio {

// A set of n univariate sequences of equal length with optional binary
// labels. Labels are carried for evaluation only; training never reads them.
struct Dataset {
    std::string name;
    std::size_t n = 0;
    std::size_t length = 0;
    std::vector<double> values;  // n x length, row-major
    std::vector<int> labels;     // empty when unlabeled, otherwise n entries in {0,1}

    // Ground-truth event windows (synthetic data only), one list per sequence.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> event_windows;

    bool has_labels() const { return !labels.empty(); }

    std::span<const double> sequence(std::size_t i) const {
        return {values.data() + i * length, length};
    }
    std::span<double> sequence(std::size_t i) { return {values.data() + i * length, length}; }

    std::size_t positives() const;
    // Class distribution ratio r = positives / negatives.
    double class_ratio() const;
};

// Loads a UCR-style text dataset: one sequence per line, class label first,
// then L values, comma- or tab-delimited (auto-detected). Train and test
// files are concatenated; original labels are remapped to {0,1} by sorted
// order of the distinct values. Ragged rows, non-numeric fields and more
// than two classes are rejected with line numbers.
Dataset load_ucr(const std::string& train_path, const std::string& test_path,
                 const std::string& name = "");

// Per-sequence standardization to mean 0 / std 1 (constant sequences map
// to all zeros).
Dataset znormalize(Dataset data);

// Synthetic event dataset: negatives are colored noise, positives add one
// or two bipolar pulses (positive lobe followed by a negative lobe) at
// random positions. Ground-truth windows are recorded per sequence.
Dataset synth_events(std::size_t n, std::size_t length, double event_rate, std::uint64_t seed);

}  // namespace dtc::dataio
