#ifndef SPADEML_EXPERIMENT_HPP
#define SPADEML_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spademl/dataset.hpp"
#include "spademl/evaluate.hpp"
#include "spademl/optics.hpp"

namespace spademl {

enum class Measurement {
    di,
    spade_diagonal,
    spade_cartesian,
    spade_half_half,
    spade_extended,
    di_moments,
};

enum class ModelKind { rf, fcnn };

struct ExperimentConfig {
    int schema_version = 1;
    std::string images_path;
    std::string labels_path;
    std::vector<int> classes;
    std::uint64_t cap_per_class = kNoCap;
    double sigma = 9.5;
    std::vector<double> scale_factors; // sigma_eff = sigma / f per cell
    std::vector<std::uint64_t> photon_counts;
    Measurement measurement = Measurement::spade_diagonal;
    ModelKind model = ModelKind::rf;
    int folds = 10;
    double train_fraction = 0.7;
    int di_half_extent = 40;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    std::size_t scatter_sample = 300;
    int rf_trees = 200;
    int rf_max_depth = -1;
    int rf_features_per_split = 0; // 0 = ceil(sqrt(d))
    FcnnSpec fcnn;
};

struct CellResult {
    double sigma_eff = 0.0;
    std::uint64_t photon_count = 0;
    EvaluationReport report;
    std::uint64_t eval_seed = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::size_t> class_counts; // realized, parallel to config.classes
    std::vector<CellResult> cells;
    double wall_seconds = 0.0;
};

ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

// Parses and sanity-checks a config without running it. Throws
// ConfigError / DataError on problems.
void validate_config(const ExperimentConfig& config);

// Full pipeline: sources -> exact distributions -> finite-N sampling ->
// features -> train/evaluate per (f, N) cell. Writes accuracy.csv, one
// confusion CSV per cell, and manifest.json under config.output_dir.
// n_workers <= 0 picks up the SPADEML_WORKERS env var (default 1).
ExperimentReport run_experiment(const ExperimentConfig& config, int n_workers = 0);

// Exact per-image moment scatter (label, m20, m02, diag_plus,
// diag_minus, m03) written to scatter.csv under config.output_dir.
void emit_scatter(const ExperimentConfig& config);

const char* measurement_name(Measurement m);
const char* model_kind_name(ModelKind m);

} // namespace spademl

#endif
