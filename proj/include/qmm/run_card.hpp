#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmm/classifier.hpp"

namespace qmm {

struct OutputOptions {
    int decimate = 10;  // CSV keeps every n-th step
    std::vector<std::pair<double, double>> plot_windows;  // in units of a
};

// A parsed run card: flat key = value lines under [run], [couplings],
// [output] and [classifier] headers. Unknown keys are rejected with their
// line number.
struct RunCard {
    std::string name;
    RunConfig config;
    OutputOptions output;
    ClassifierConfig classifier;
    int classify_decimate = 5;  // analysis stride over the step grid
    std::optional<PhaseLabel> expected_label;
    std::optional<std::pair<PhaseLabel, PhaseLabel>> expected_transition;
};

RunCard parse_run_card(std::istream& in, const std::string& name);
RunCard load_run_card(const std::string& path);

} // namespace qmm
