#ifndef SPADEML_FEATURES_HPP
#define SPADEML_FEATURES_HPP

#include <string>
#include <vector>

#include "spademl/dataset.hpp"
#include "spademl/sampler.hpp"

namespace spademl {

// Second- to fourth-order intensity moments, Cartesian and diagonal
// (45-degree rotated) bases, in pixel-unit powers.
struct MomentEstimates {
    double m20 = 0.0;        // <x^2>
    double m02 = 0.0;        // <y^2>
    double diag_plus = 0.0;  // <(x+y)^2>/2
    double diag_minus = 0.0; // <(x-y)^2>/2
    double m03 = 0.0;        // <y^3>
    double m04 = 0.0;        // <y^4>
};

struct FeatureVector {
    std::vector<double> values;
    std::string schema;
};

MomentEstimates moments_exact(const SourceObject& src);

// Empirical moments of the image-plane frequencies; no deconvolution,
// so the expectation of m20 is <x^2>_source + sigma_eff^2.
MomentEstimates moments_from_di(const FrequencyVector& f, const DiGrid& grid);

// schema "moments_diag" selects [diag_plus, diag_minus]; any other
// schema treats the input frequencies as the feature slots in order.
FeatureVector assemble_features(const FrequencyVector& f, const std::string& schema);
FeatureVector assemble_features(const MomentEstimates& m, const std::string& schema);

} // namespace spademl

#endif
