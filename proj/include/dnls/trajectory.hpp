#pragma once

#include <string>
#include <vector>

#include "dnls/lattice.hpp"

namespace dnls {

/// Sampled time evolution on a uniform grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexField> states;
    /// l2 norm of each stored state.
    std::vector<double> norms;
    std::string scheme;
    double dt = 0.0;
};

}  // namespace dnls
