#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dnls/jost.hpp"
#include "dnls/lattice.hpp"

namespace dnls {

/// [u, v](n) = u(n+1) v(n) - u(n) v(n+1). Throws if n or n+1 is outside either window.
cplx wronskian(const ComplexField& u, const ComplexField& v, int n);

/// W = [f+, f-] at a site, computed from the modified Jost functions so that
/// complex angles do not overflow:
///   W = e^{-i theta} m+(n+1) m-(n) - e^{i theta} m+(n) m-(n+1).
cplx wronskian_from_m(const ComplexField& m_plus, const ComplexField& m_minus, cplx theta, int n);

struct ScatteringData {
    double theta = 0.0;
    cplx W;    // [f+, f-]
    cplx W1;   // [f+, conj f-]
    /// Undefined at the band edges theta in {0, +-pi}.
    std::optional<cplx> T;
    std::optional<cplx> R_plus;
    std::optional<cplx> R_minus;
    /// max - min of W over the constancy sites, relative to |W| (absolute when W = 0).
    double wronskian_spread = 0.0;
};

struct ScatteringOptions {
    int site = 0;
    int constancy_radius = 2;
    /// Relative tolerance for the two forms of T and the constancy of W.
    double consistency_tol = 1e-9;
};

ScatteringData scattering_data(const Potential& q, double theta, const ScatteringOptions& opts = {});

/// T = -2i sin theta / W with the edge rewrite 1/sin h = 1/(2 tan(h/2)) + tan(h/2)/2,
/// h the distance to the nearest edge. Equivalent to the direct quotient; used
/// where |sin theta| is small.
cplx transmission_edge_form(cplx W, double theta);

/// Identity residuals for one data point (all zero in exact arithmetic).
struct ScatteringResiduals {
    double unitarity_plus = 0.0;   // | |T|^2 + |R+|^2 - 1 |
    double unitarity_minus = 0.0;  // | |T|^2 + |R-|^2 - 1 |
    double cross = 0.0;            // | T conj(R+) + R- conj(T) |
    double tw = 0.0;               // | T W + 2i sin theta |
};

ScatteringResiduals scattering_residuals(const ScatteringData& d);

struct GenericityReport {
    cplx W_at_0;
    cplx W_at_pi;
    cplx W_at_minus_pi;
    bool is_generic = false;
    /// Energies 0 and/or 4 at which W vanishes.
    std::vector<int> resonant_edges;
    double threshold = 0.0;
    double grid_max_W = 0.0;
    /// min over the grid of |W| / (2 |sin theta|) (>= 1 expected).
    double min_lower_bound_ratio = 0.0;
    std::size_t grid_size = 0;
};

struct GenericityOptions {
    std::size_t grid_size = 512;
    double relative_threshold = 1e-8;
};

GenericityReport classify_genericity(const Potential& q, const GenericityOptions& opts = {});

}  // namespace dnls
