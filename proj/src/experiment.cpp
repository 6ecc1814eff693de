#include "spademl/experiment.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <mutex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "spademl/errors.hpp"
#include "spademl/features.hpp"
#include "spademl/rng.hpp"
#include "spademl/sampler.hpp"

namespace spademl {

using nlohmann::json;

const char* measurement_name(Measurement m) {
    switch (m) {
        case Measurement::di: return "di";
        case Measurement::spade_diagonal: return "spade_diagonal";
        case Measurement::spade_cartesian: return "spade_cartesian";
        case Measurement::spade_half_half: return "spade_half_half";
        case Measurement::spade_extended: return "spade_extended";
        case Measurement::di_moments: return "di_moments";
    }
    return "?";
}

const char* model_kind_name(ModelKind m) {
    return m == ModelKind::rf ? "rf" : "fcnn";
}

namespace {

Measurement parse_measurement(const std::string& s) {
    for (Measurement m : {Measurement::di, Measurement::spade_diagonal,
                          Measurement::spade_cartesian, Measurement::spade_half_half,
                          Measurement::spade_extended, Measurement::di_moments})
        if (s == measurement_name(m)) return m;
    throw ConfigError("unknown measurement '" + s + "'");
}

ModelKind parse_model(const std::string& s) {
    if (s == "rf") return ModelKind::rf;
    if (s == "fcnn") return ModelKind::fcnn;
    throw ConfigError("unknown model '" + s + "'");
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig c;
    try {
        c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1)
            throw ConfigError("unsupported schema_version " +
                              std::to_string(c.schema_version));
        c.images_path = j.at("images_path").get<std::string>();
        c.labels_path = j.at("labels_path").get<std::string>();
        c.classes = j.at("classes").get<std::vector<int>>();
        if (j.contains("cap_per_class"))
            c.cap_per_class = j["cap_per_class"].get<std::uint64_t>();
        if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
        if (j.contains("sigma_eff_values")) {
            // convenience alternative to scale_factors
            for (double s : j["sigma_eff_values"].get<std::vector<double>>())
                c.scale_factors.push_back(c.sigma / s);
        } else if (j.contains("scale_factors")) {
            c.scale_factors = j["scale_factors"].get<std::vector<double>>();
        } else {
            for (int s = 1; s <= 10; ++s) c.scale_factors.push_back(c.sigma / s);
        }
        c.photon_counts = j.at("photon_counts").get<std::vector<std::uint64_t>>();
        c.measurement = parse_measurement(j.at("measurement").get<std::string>());
        if (j.contains("model")) c.model = parse_model(j["model"].get<std::string>());
        if (j.contains("folds")) c.folds = j["folds"].get<int>();
        if (j.contains("train_fraction"))
            c.train_fraction = j["train_fraction"].get<double>();
        if (j.contains("di_half_extent"))
            c.di_half_extent = j["di_half_extent"].get<int>();
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
        c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("scatter_sample"))
            c.scatter_sample = j["scatter_sample"].get<std::size_t>();
        if (j.contains("rf_trees")) c.rf_trees = j["rf_trees"].get<int>();
        if (j.contains("rf_max_depth")) c.rf_max_depth = j["rf_max_depth"].get<int>();
        if (j.contains("rf_features_per_split"))
            c.rf_features_per_split = j["rf_features_per_split"].get<int>();
        if (j.contains("fcnn")) {
            const auto& f = j["fcnn"];
            if (f.contains("hidden")) c.fcnn.hidden = f["hidden"].get<std::vector<int>>();
            if (f.contains("learning_rate"))
                c.fcnn.learning_rate = f["learning_rate"].get<double>();
            if (f.contains("dropout")) c.fcnn.dropout = f["dropout"].get<double>();
            if (f.contains("patience")) c.fcnn.patience = f["patience"].get<int>();
            if (f.contains("max_epochs")) c.fcnn.max_epochs = f["max_epochs"].get<int>();
            if (f.contains("batch_size")) c.fcnn.batch_size = f["batch_size"].get<int>();
            if (f.contains("multiclass")) c.fcnn.multiclass = f["multiclass"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["images_path"] = c.images_path;
    j["labels_path"] = c.labels_path;
    j["classes"] = c.classes;
    if (c.cap_per_class != kNoCap) j["cap_per_class"] = c.cap_per_class;
    j["sigma"] = c.sigma;
    j["scale_factors"] = c.scale_factors;
    j["photon_counts"] = c.photon_counts;
    j["measurement"] = measurement_name(c.measurement);
    j["model"] = model_kind_name(c.model);
    j["folds"] = c.folds;
    j["train_fraction"] = c.train_fraction;
    j["di_half_extent"] = c.di_half_extent;
    j["master_seed"] = c.master_seed;
    j["output_dir"] = c.output_dir;
    j["rf_trees"] = c.rf_trees;
    j["rf_max_depth"] = c.rf_max_depth;
    j["rf_features_per_split"] = c.rf_features_per_split;
    return j.dump(2);
}

void validate_config(const ExperimentConfig& c) {
    if (c.classes.empty()) throw ConfigError("classes must be non-empty");
    std::set<int> uniq(c.classes.begin(), c.classes.end());
    if (uniq.size() != c.classes.size()) throw ConfigError("duplicate class id");
    for (int cls : c.classes)
        if (cls < 0 || cls > 9) throw ConfigError("class ids must be in 0..9");
    if (c.scale_factors.empty()) throw ConfigError("scale_factors must be non-empty");
    for (double f : c.scale_factors)
        if (!(f > 0.0)) throw ConfigError("scale factors must be > 0");
    if (c.photon_counts.empty()) throw ConfigError("photon_counts must be non-empty");
    for (std::uint64_t n : c.photon_counts)
        if (n < 1) throw ConfigError("photon counts must be >= 1");
    if (!(c.sigma > 0.0)) throw ConfigError("sigma must be > 0");
    if (c.folds < 2) throw ConfigError("folds must be >= 2");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    if (c.di_half_extent < 14)
        throw ConfigError("di_half_extent must be >= 14 to cover the source");

    if (!std::filesystem::exists(c.images_path))
        throw DataError("images file not found: " + c.images_path);
    if (!std::filesystem::exists(c.labels_path))
        throw DataError("labels file not found: " + c.labels_path);

    if (c.measurement == Measurement::di || c.measurement == Measurement::di_moments) {
        // worst-case 1-D leakage for a pixel at the support edge
        for (double f : c.scale_factors) {
            const double s = c.sigma / f;
            const double edge = 14.0;
            double inside = 0.0, total = 0.0;
            for (int i = -10 * c.di_half_extent; i <= 10 * c.di_half_extent; ++i) {
                const double d = i - edge;
                const double v = std::exp(-d * d / (2.0 * s * s));
                total += v;
                if (std::abs(i) <= c.di_half_extent) inside += v;
            }
            const double leak_2d = 1.0 - (inside / total) * (inside / total);
            if (leak_2d > 1e-6) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "di grid half_extent %d too small for sigma_eff %.3g "
                              "(worst-case leakage %.2e)",
                              c.di_half_extent, s, leak_2d);
                throw ConfigError(msg);
            }
        }
    }
}

namespace {

struct PreparedData {
    std::vector<SourceObject> sources;
    std::vector<int> labels;
    std::vector<std::size_t> class_counts;
};

PreparedData prepare(const ExperimentConfig& c) {
    auto [images, labels] = parse_idx_files(c.images_path, c.labels_path);
    std::set<int> classes(c.classes.begin(), c.classes.end());
    const LabeledSubset subset =
        select_classes(images, labels, classes, c.cap_per_class,
                       derive_seed(c.master_seed, "select"));

    PreparedData data;
    data.class_counts.assign(c.classes.size(), 0);
    for (std::uint32_t i = 0; i < subset.images.count; ++i) {
        SourceObject src = to_source_object(subset.images.image(i), subset.images.rows,
                                            subset.images.cols);
        src.source_index = subset.original_indices[i];
        src.label = subset.labels.labels[i];
        data.labels.push_back(src.label);
        data.sources.push_back(std::move(src));
        for (std::size_t k = 0; k < c.classes.size(); ++k)
            if (c.classes[k] == subset.labels.labels[i]) ++data.class_counts[k];
    }
    return data;
}

// One feature row per source for a given (sigma_eff, N) cell. The
// sampling seed depends only on (master seed, measurement, sigma_eff
// bits, N, original image index), never on execution order.
Matrix cell_features(const ExperimentConfig& c, const PreparedData& data,
                     double sigma_eff, std::uint64_t n_photons) {
    OpticsParams params{c.sigma, c.sigma / sigma_eff};
    const std::uint64_t cell_seed =
        derive_seed(c.master_seed, measurement_name(c.measurement),
                    std::bit_cast<std::uint64_t>(sigma_eff), n_photons);

    ModeSet primary, secondary;
    switch (c.measurement) {
        case Measurement::spade_diagonal:
            primary = build_mode_set(ModeSetKind::diagonal_lowest, sigma_eff);
            break;
        case Measurement::spade_cartesian:
            primary = build_mode_set(ModeSetKind::cartesian_lowest, sigma_eff);
            break;
        case Measurement::spade_extended:
            primary = build_mode_set(ModeSetKind::extended_third_order, sigma_eff);
            break;
        case Measurement::spade_half_half:
            primary = build_mode_set(ModeSetKind::cartesian_lowest, sigma_eff);
            secondary = build_mode_set(ModeSetKind::diagonal_lowest, sigma_eff);
            break;
        default:
            break;
    }

    const DiGrid grid{c.di_half_extent};
    Matrix out;
    out.rows = data.sources.size();
    for (std::size_t i = 0; i < data.sources.size(); ++i) {
        const SourceObject& src = data.sources[i];
        const std::uint64_t seed =
            derive_seed(cell_seed, static_cast<std::uint64_t>(src.source_index));
        std::vector<double> row;
        switch (c.measurement) {
            case Measurement::di: {
                const auto p = di_distribution(src, params, grid);
                row = sample_frequencies(p, n_photons, seed).frequencies();
                break;
            }
            case Measurement::di_moments: {
                const auto p = di_distribution(src, params, grid);
                const auto f = sample_frequencies(p, n_photons, seed);
                row = assemble_features(moments_from_di(f, grid), "moments_diag").values;
                break;
            }
            case Measurement::spade_half_half: {
                const auto pc = spade_distribution(src, params, primary);
                const auto pd = spade_distribution(src, params, secondary);
                row = sample_split_bases(pc, pd, n_photons, seed).frequencies();
                break;
            }
            default: {
                const auto p = spade_distribution(src, params, primary);
                row = sample_frequencies(p, n_photons, seed).frequencies();
                break;
            }
        }
        if (out.cols == 0) out.cols = row.size();
        out.data.insert(out.data.end(), row.begin(), row.end());
    }
    return out;
}

void write_confusion_csv(const std::string& path, const EvaluationReport& report) {
    std::ofstream out(path);
    out << "truth\\predicted";
    for (int c : report.class_ids) out << "," << c;
    out << "\n";
    for (std::size_t r = 0; r < report.confusion.size(); ++r) {
        out << report.class_ids[r];
        for (std::uint64_t v : report.confusion[r]) out << "," << v;
        out << "\n";
    }
}

json mode_set_to_json(const ModeSet& set) {
    json modes = json::array();
    for (const auto& mode : set.modes) {
        json terms = json::array();
        for (const auto& t : mode.terms) terms.push_back({t.m, t.n, t.coeff});
        modes.push_back({{"name", mode.name}, {"terms", terms}});
    }
    return {{"modes", modes}, {"residual", set.residual}};
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, int n_workers) {
    const auto t0 = std::chrono::steady_clock::now();
    validate_config(config);
    std::filesystem::create_directories(config.output_dir);

    const PreparedData data = prepare(config);
    for (std::size_t k = 0; k < config.classes.size(); ++k)
        if (static_cast<int>(data.class_counts[k]) < config.folds)
            throw ConfigError("class " + std::to_string(config.classes[k]) + " has " +
                              std::to_string(data.class_counts[k]) +
                              " samples, fewer than " + std::to_string(config.folds) +
                              " folds");

    if (n_workers <= 0) {
        if (const char* env = std::getenv("SPADEML_WORKERS"))
            n_workers = std::max(1, std::atoi(env));
        else
            n_workers = 1;
    }

    struct Cell {
        double sigma_eff;
        std::uint64_t n;
    };
    std::vector<Cell> cells;
    for (double f : config.scale_factors)
        for (std::uint64_t n : config.photon_counts)
            cells.push_back({config.sigma / f, n});

    ExperimentReport report;
    report.config = config;
    report.class_counts = data.class_counts;
    report.cells.resize(cells.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            try {
                const auto& cell = cells[i];
                const Matrix features =
                    cell_features(config, data, cell.sigma_eff, cell.n);
                const std::uint64_t eval_seed =
                    derive_seed(config.master_seed, "eval",
                                std::bit_cast<std::uint64_t>(cell.sigma_eff), cell.n);
                ModelSpec spec;
                if (config.model == ModelKind::rf) {
                    RandomForestSpec rf;
                    rf.n_trees = config.rf_trees;
                    rf.max_depth = config.rf_max_depth;
                    rf.features_per_split = config.rf_features_per_split;
                    spec = rf;
                } else {
                    spec = config.fcnn;
                }
                CellResult result;
                result.sigma_eff = cell.sigma_eff;
                result.photon_count = cell.n;
                result.eval_seed = eval_seed;
                result.report = evaluate(spec, features, data.labels, config.folds,
                                         config.train_fraction, eval_seed);
                report.cells[i] = std::move(result);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!failed.exchange(true)) first_error = std::current_exception();
            }
        }
    };

    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) std::rethrow_exception(first_error);

    // all writes happen after the pool drains, in cell order
    const std::filesystem::path dir(config.output_dir);
    {
        std::ofstream acc(dir / "accuracy.csv");
        acc << "sigma_eff,N,accuracy_mean,accuracy_std\n";
        for (const auto& cell : report.cells) {
            acc << fmt_double(cell.sigma_eff) << "," << cell.photon_count << ","
                << fmt_double(cell.report.accuracy_mean) << ","
                << fmt_double(cell.report.accuracy_std) << "\n";
            write_confusion_csv(
                (dir / ("confusion_sigma" + fmt_double(cell.sigma_eff) + "_N" +
                        std::to_string(cell.photon_count) + ".csv"))
                    .string(),
                cell.report);
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    json manifest;
    manifest["config"] = json::parse(config_to_json(config));
    manifest["realized_class_counts"] = json::object();
    for (std::size_t k = 0; k < config.classes.size(); ++k)
        manifest["realized_class_counts"][std::to_string(config.classes[k])] =
            data.class_counts[k];
    manifest["wall_seconds"] = report.wall_seconds;
    json cell_list = json::array();
    for (const auto& cell : report.cells) {
        cell_list.push_back({{"sigma_eff", cell.sigma_eff},
                             {"N", cell.photon_count},
                             {"eval_seed", cell.eval_seed},
                             {"accuracy_mean", cell.report.accuracy_mean},
                             {"accuracy_std", cell.report.accuracy_std},
                             {"pooled_accuracy", cell.report.pooled_accuracy}});
    }
    manifest["cells"] = cell_list;
    switch (config.measurement) {
        case Measurement::spade_diagonal:
            manifest["mode_set"] = mode_set_to_json(
                build_mode_set(ModeSetKind::diagonal_lowest, config.sigma));
            break;
        case Measurement::spade_cartesian:
            manifest["mode_set"] = mode_set_to_json(
                build_mode_set(ModeSetKind::cartesian_lowest, config.sigma));
            break;
        case Measurement::spade_half_half:
            manifest["mode_set_cartesian"] = mode_set_to_json(
                build_mode_set(ModeSetKind::cartesian_lowest, config.sigma));
            manifest["mode_set_diagonal"] = mode_set_to_json(
                build_mode_set(ModeSetKind::diagonal_lowest, config.sigma));
            break;
        case Measurement::spade_extended: {
            json per_sigma = json::object();
            for (double f : config.scale_factors)
                per_sigma[fmt_double(config.sigma / f)] = mode_set_to_json(
                    build_mode_set(ModeSetKind::extended_third_order, config.sigma / f));
            manifest["mode_set_per_sigma_eff"] = per_sigma;
            break;
        }
        default:
            break;
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
    return report;
}

void emit_scatter(const ExperimentConfig& config) {
    if (config.classes.empty()) throw ConfigError("classes must be non-empty");
    ExperimentConfig c = config;
    c.cap_per_class = std::max<std::uint64_t>(
        1, config.scatter_sample / std::max<std::size_t>(1, config.classes.size()));
    const PreparedData data = prepare(c);

    std::filesystem::create_directories(config.output_dir);
    std::ofstream out(std::filesystem::path(config.output_dir) / "scatter.csv");
    out << "label,m20,m02,diag_plus,diag_minus,m03\n";
    for (const auto& src : data.sources) {
        const MomentEstimates m = moments_exact(src);
        out << src.label << "," << fmt_double(m.m20) << "," << fmt_double(m.m02) << ","
            << fmt_double(m.diag_plus) << "," << fmt_double(m.diag_minus) << ","
            << fmt_double(m.m03) << "\n";
    }
}

} // namespace spademl
