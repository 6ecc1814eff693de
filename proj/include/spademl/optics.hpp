#ifndef SPADEML_OPTICS_HPP
#define SPADEML_OPTICS_HPP

#include <string>
#include <vector>

#include "spademl/dataset.hpp"

namespace spademl {

// PSF width sigma and object scale factor f; all photon statistics
// depend on them only through sigma_eff = sigma / f, in pixel units.
struct OpticsParams {
    double sigma = 9.5;
    double scale_factor = 1.0;

    double sigma_eff() const { return sigma / scale_factor; }
};

// One detection mode: a unit-norm real linear combination of HG_mn
// basis states.
struct DetectionMode {
    struct Term {
        int m;
        int n;
        double coeff;
    };
    std::vector<Term> terms;
    std::string name;
};

struct ModeSet {
    std::vector<DetectionMode> modes;
    bool residual = true;
};

struct ProbabilityVector {
    std::vector<std::string> labels;
    std::vector<double> p;
};

// Square detection grid spanning -half_extent..+half_extent at unit
// pixel spacing, centered on the source centroid.
struct DiGrid {
    int half_extent = 40;

    int side() const { return 2 * half_extent + 1; }
};

enum class ModeSetKind {
    cartesian_lowest,
    diagonal_lowest,
    second_order_5dim,
    extended_third_order,
};

// Amplitude of the HG_mn component of a PSF displaced to (x, y):
// exp(-(x^2+y^2)/(8s^2)) x^m y^n / (sqrt(m! n!) (2s)^(m+n)).
double hg_coefficient(int m, int n, double x, double y, double sigma_eff);

// Optimized mixing angle for the (HG01, HG02) pair; returns (sin, cos).
std::pair<double, double> rotation_angle(double sigma_eff);

ModeSet build_mode_set(ModeSetKind kind, double sigma_eff);

const char* mode_set_kind_name(ModeSetKind kind);

// Exact mode-outcome distribution, residual bucket last when enabled.
ProbabilityVector spade_distribution(const SourceObject& src, const OpticsParams& params,
                                     const ModeSet& modes);

// Exact image-plane distribution over the grid, row-major with outcome
// labels "x,y" in grid coordinates. Throws NumericalGuardError when the
// blurred source leaks more than 1e-6 of its mass outside the grid.
ProbabilityVector di_distribution(const SourceObject& src, const OpticsParams& params,
                                  const DiGrid& grid);

void validate_mode_set(const ModeSet& modes);

} // namespace spademl

#endif
