#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relus/bounds.hpp"
#include "relus/datagen.hpp"
#include "relus/trainer.hpp"

namespace relus {

struct DataSourceSpec {
    enum class Kind { gaussian, uniform, adversarial, csv, idx };
    Kind kind = Kind::gaussian;
    std::size_t d = 32;
    std::string csv_path;
    std::size_t label_column = 0;
    std::string positive_label;
    std::string idx_images;
    std::string idx_labels;
    std::pair<int, int> keep{3, 5};
    std::pair<int, int> relabel{1, -1};
};

struct ExperimentSpec {
    DataSourceSpec source;
    std::vector<std::size_t> n_values{100};
    std::vector<std::size_t> k_values{4};
    int trials = 1;
    TrainConfig train;
    std::vector<Variant> variants{Variant::noisy};
    double success_threshold = 1e-10;
    double delta = 0.05;
    /// Optional per-k step override: nets with k <= eta_small_k_max use eta_small.
    double eta_small = 0.0;
    std::size_t eta_small_k_max = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CellResult {
    Variant variant;
    std::size_t n = 0;
    std::size_t k = 0;
    int trials = 0;
    double success_rate = 0.0;
    double mean_tau = 0.0;
    double mean_passes = 0.0;
    double tk0 = 0.0;
    double lower_bound = 0.0;
    double compression_bound = 0.0;
    double wall_ms = 0.0;
};

struct GridResult {
    std::vector<CellResult> cells;
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Loads the backing dataset for file sources; throws for generator sources.
Dataset load_file_base(const DataSourceSpec& source);

/// Trial dataset: generators draw a fresh seeded dataset, file sources take
/// the first n samples after a seeded shuffle of the preloaded base.
Dataset make_trial_dataset(const ExperimentSpec& spec, const Dataset* base, std::size_t n,
                           int trial);

/// Runs every (variant, n, k) cell for the configured trials.  Cells are
/// independent with functionally derived seeds, so the result is identical
/// for any thread count.
GridResult run_grid(const ExperimentSpec& spec, int threads = 1);

/// CSV with a fixed header and rows sorted by (variant, n, k); floats carry
/// 9 significant digits.
std::string to_csv(const GridResult& result);
void emit_csv(const GridResult& result, const std::string& path);

/// JSON report of all closed-form bounds; when a trained report is supplied
/// the a-posteriori compression bound is evaluated from the observed tau_k
/// and complement risk.
std::string bounds_report_json(const ExperimentSpec& spec, const Dataset* data,
                               const TrainReport* report);

void save_report_json(const TrainReport& report, const std::string& path);
TrainReport load_report_json(const std::string& path);

/// Plain key=value config file ('#' comments, comma lists for grids).
std::map<std::string, std::string> parse_config_file(const std::string& path);
ExperimentSpec experiment_from_config(const std::map<std::string, std::string>& kv);

}  // namespace relus
