#include "dtc/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dtc/rng.hpp"

namespace dtc::dataio {

std::size_t Dataset::positives() const {
    std::size_t count = 0;
    for (int label : labels) count += (label == 1);
    return count;
}

double Dataset::class_ratio() const {
    if (!has_labels()) throw std::logic_error("class_ratio: dataset has no labels");
    const std::size_t pos = positives();
    const std::size_t neg = labels.size() - pos;
    if (neg == 0) throw std::logic_error("class_ratio: no negative samples");
    return static_cast<double>(pos) / static_cast<double>(neg);
}

namespace {

char detect_delimiter(const std::string& line) {
    if (line.find('\t') != std::string::npos) return '\t';
    if (line.find(',') != std::string::npos) return ',';
    return ' ';
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    if (delim == ' ') {
        std::istringstream stream(line);
        while (stream >> field) fields.push_back(field);
        return fields;
    }
    std::istringstream stream(line);
    while (std::getline(stream, field, delim)) {
        // Trim surrounding whitespace so "1, 2" parses cleanly.
        const auto begin = field.find_first_not_of(" \t\r");
        if (begin == std::string::npos) {
            fields.emplace_back();
            continue;
        }
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(field.substr(begin, end - begin + 1));
    }
    return fields;
}

double parse_value(const std::string& field, const std::string& path, std::size_t line_no) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric field '" + field + "'");
    }
    if (consumed != field.size()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric field '" + field + "'");
    }
    return value;
}

struct RawRows {
    std::vector<double> raw_labels;
    std::vector<double> values;
    std::size_t length = 0;
};

void load_file(const std::string& path, RawRows& rows) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;
    char delim = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (delim == 0) delim = detect_delimiter(line);

        const std::vector<std::string> fields = split_fields(line, delim);
        if (fields.size() < 2) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected a label and at least one value");
        }
        const std::size_t row_length = fields.size() - 1;
        if (rows.length == 0) {
            rows.length = row_length;
        } else if (row_length != rows.length) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": row has " +
                                     std::to_string(row_length) + " values, expected " +
                                     std::to_string(rows.length));
        }
        rows.raw_labels.push_back(parse_value(fields[0], path, line_no));
        for (std::size_t i = 1; i < fields.size(); ++i) {
            rows.values.push_back(parse_value(fields[i], path, line_no));
        }
    }
}

}  // namespace

Dataset load_ucr(const std::string& train_path, const std::string& test_path,
                 const std::string& name) {
    RawRows rows;
    load_file(train_path, rows);
    if (!test_path.empty()) load_file(test_path, rows);
    if (rows.raw_labels.empty()) {
        throw std::runtime_error("dataset is empty: " + train_path);
    }

    std::map<double, int> label_map;
    for (double raw : rows.raw_labels) label_map.emplace(raw, 0);
    if (label_map.size() > 2) {
        throw std::runtime_error(train_path + ": found " + std::to_string(label_map.size()) +
                                 " classes, expected at most 2");
    }
    int next = 0;
    for (auto& [raw, mapped] : label_map) mapped = next++;

    Dataset data;
    data.name = name;
    data.n = rows.raw_labels.size();
    data.length = rows.length;
    data.values = std::move(rows.values);
    data.labels.reserve(data.n);
    for (double raw : rows.raw_labels) data.labels.push_back(label_map.at(raw));
    return data;
}

Dataset znormalize(Dataset data) {
    constexpr double kEps = 1e-12;
    for (std::size_t i = 0; i < data.n; ++i) {
        auto seq = data.sequence(i);
        double mean = 0.0;
        for (double v : seq) mean += v;
        mean /= static_cast<double>(seq.size());
        double var = 0.0;
        for (double v : seq) var += (v - mean) * (v - mean);
        var /= static_cast<double>(seq.size());
        const double stddev = std::sqrt(var);
        if (stddev < kEps) {
            for (double& v : seq) v = 0.0;
        } else {
            for (double& v : seq) v = (v - mean) / stddev;
        }
    }
    return data;
}

Dataset synth_events(std::size_t n, std::size_t length, double event_rate, std::uint64_t seed) {
    if (n == 0 || length < 32) {
        throw std::invalid_argument("synth_events: need n >= 1 and length >= 32");
    }
    if (event_rate < 0.0 || event_rate > 1.0) {
        throw std::invalid_argument("synth_events: event_rate must be in [0, 1]");
    }

    Rng rng(seed);
    Dataset data;
    data.name = "synth-events";
    data.n = n;
    data.length = length;
    data.values.assign(n * length, 0.0);
    data.labels.assign(n, 0);
    data.event_windows.assign(n, {});

    const double min_width = std::max(3.0, static_cast<double>(length) / 30.0);
    const double max_width = std::max(min_width + 1.0, static_cast<double>(length) / 15.0);

    for (std::size_t i = 0; i < n; ++i) {
        auto seq = data.sequence(i);

        // Colored noise background: AR(1) with a per-sequence smoothness,
        // scaled to unit marginal variance.
        const double phi = 0.75 + 0.15 * rng.uniform();
        const double drive = std::sqrt(1.0 - phi * phi);
        seq[0] = rng.gaussian(0.0, 1.0);
        for (std::size_t t = 1; t < length; ++t) {
            seq[t] = phi * seq[t - 1] + drive * rng.gaussian(0.0, 1.0);
        }

        const bool has_event = rng.uniform() < event_rate;
        if (!has_event) continue;
        data.labels[i] = 1;

        const std::size_t n_pulses = 1 + (rng.uniform() < 0.5 ? 1 : 0);
        for (std::size_t p = 0; p < n_pulses; ++p) {
            double width = min_width + (max_width - min_width) * rng.uniform();
            double margin = 4.0 * width;
            double span = static_cast<double>(length) - 2.0 * margin;
            if (span <= 1.0) {
                width = min_width;
                margin = 4.0 * width;
                span = static_cast<double>(length) - 2.0 * margin;
            }
            const double center = margin + span * rng.uniform();

            const auto lo = static_cast<std::size_t>(std::max(0.0, center - 3.0 * width));
            const auto hi = std::min(length, static_cast<std::size_t>(center + 3.0 * width) + 1);

            // Reject a second pulse that would overlap the first window.
            bool overlaps = false;
            for (const auto& [wlo, whi] : data.event_windows[i]) {
                if (lo < whi && wlo < hi) overlaps = true;
            }
            if (overlaps) continue;

            // Bipolar pulse: positive lobe followed by a negative lobe
            // (derivative-of-Gaussian profile).
            const double amplitude = 4.0 + 2.0 * rng.uniform();
            for (std::size_t t = lo; t < hi; ++t) {
                const double u = (static_cast<double>(t) - center) / width;
                seq[t] += amplitude * (-u) * std::exp(-0.5 * u * u);
            }
            data.event_windows[i].emplace_back(lo, hi);
        }
    }
    return data;
}

}  // namespace dtc::dataio
