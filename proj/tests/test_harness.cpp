#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "relus/harness.hpp"

using namespace relus;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("relus_harness_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Drops the trailing wall-clock column from every CSV row so timing jitter
// cannot affect equality checks.
std::string strip_wall_ms(const std::string& csv) {
    std::stringstream in(csv), out;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
    }
    return out.str();
}

ExperimentSpec tiny_adversarial_spec() {
    ExperimentSpec spec;
    spec.source.kind = DataSourceSpec::Kind::adversarial;
    spec.source.d = 4;
    spec.n_values = {4};
    spec.k_values = {2};
    spec.trials = 2;
    spec.train.eta = 0.1;
    spec.train.rho = 0.0;
    spec.train.max_passes = 2000;
    spec.variants = {Variant::vanilla, Variant::noisy};
    spec.seed = 11;
    return spec;
}

}  // namespace

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::vanilla, Variant::noisy, Variant::leaky})
        CHECK(variant_from_name(variant_name(v)) == v);
    CHECK(variant_name(Variant::noisy) == "noisy");
    CHECK_THROWS(variant_from_name("elu"));
}

TEST_CASE("parse_config_file") {
    TempDir dir;
    const std::string path = dir.file("exp.cfg");
    write_file(path,
               "# comment line\n"
               "source = gaussian\n"
               "\n"
               "n_list = 20,40\n"
               "  k_list=2 , 4  # trailing comment\n"
               "eta=0.05\n");
    auto kv = parse_config_file(path);
    CHECK(kv.at("source") == "gaussian");
    CHECK(kv.at("n_list") == "20,40");
    CHECK(kv.at("eta") == "0.05");

    CHECK_THROWS_WITH_AS(parse_config_file(dir.file("nope.cfg")),
                         doctest::Contains("nope.cfg"), std::runtime_error);
}

TEST_CASE("experiment_from_config") {
    std::map<std::string, std::string> kv{
        {"source", "uniform"}, {"d", "16"},        {"n_list", "20,40"},
        {"k_list", "2,4"},     {"trials", "3"},    {"variants", "noisy,vanilla"},
        {"eta", "0.02"},       {"gamma", "50"},    {"rho", "inf"},
        {"init_std", "0.2"},   {"patience", "7"},  {"schedule", "uniform"},
        {"max_passes", "100"}, {"seed", "9"},      {"delta", "0.1"},
        {"threshold", "1e-8"},
    };
    ExperimentSpec spec = experiment_from_config(kv);
    CHECK(spec.source.kind == DataSourceSpec::Kind::uniform);
    CHECK(spec.source.d == 16);
    CHECK(spec.n_values == std::vector<std::size_t>{20, 40});
    CHECK(spec.k_values == std::vector<std::size_t>{2, 4});
    CHECK(spec.trials == 3);
    CHECK(spec.variants == std::vector<Variant>{Variant::noisy, Variant::vanilla});
    CHECK(spec.train.eta == 0.02);
    CHECK(spec.train.gamma == 50.0);
    CHECK(std::isinf(spec.train.rho));
    CHECK(spec.train.init_std == 0.2);
    CHECK(spec.train.patience == 7);
    CHECK(spec.train.schedule == Schedule::uniform);
    CHECK(spec.train.max_passes == 100);
    CHECK(spec.seed == 9);
    CHECK(spec.delta == 0.1);
    CHECK(spec.success_threshold == 1e-8);

    kv["source"] = "carrier-pigeon";
    CHECK_THROWS_AS(experiment_from_config(kv), std::runtime_error);
    kv["source"] = "uniform";
    kv["variants"] = "noisy,sigmoid";
    CHECK_THROWS_AS(experiment_from_config(kv), std::runtime_error);
}

TEST_CASE("to_csv header, ordering, and empty grid") {
    GridResult empty;
    CHECK(to_csv(empty) ==
          "variant,n,k,trials,success_rate,mean_tau,mean_passes,Tk0,lower_bound,"
          "compression_bound,wall_ms\n");

    GridResult grid;
    CellResult a;
    a.variant = Variant::noisy;
    a.n = 40;
    a.k = 2;
    a.trials = 1;
    a.success_rate = 1.0;
    CellResult b = a;
    b.n = 20;
    CellResult c = a;
    c.variant = Variant::vanilla;
    grid.cells = {a, b, c};
    const std::string csv = to_csv(grid);

    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    std::vector<std::string> rows;
    while (std::getline(ss, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rfind("vanilla,40,2", 0) == 0);
    CHECK(rows[1].rfind("noisy,20,2", 0) == 0);
    CHECK(rows[2].rfind("noisy,40,2", 0) == 0);
}

TEST_CASE("run_grid on the adversarial cell") {
    ExperimentSpec spec = tiny_adversarial_spec();
    GridResult grid = run_grid(spec, 1);
    REQUIRE(grid.cells.size() == 2);
    for (const CellResult& cell : grid.cells) {
        CHECK(cell.n == 4);
        CHECK(cell.k == 2);
        CHECK(cell.trials == 2);
        CHECK(cell.success_rate == 1.0);
        CHECK(cell.mean_tau >= 4.0 / (0.1 * 2.0));  // matches theorem2_lower
        CHECK(cell.lower_bound == doctest::Approx(4.0 / (0.1 * 2.0)));
        CHECK(cell.tk0 > 0.0);
        CHECK(cell.wall_ms >= 0.0);
    }
}

TEST_CASE("run_grid is invariant to the thread count") {
    ExperimentSpec spec = tiny_adversarial_spec();
    spec.n_values = {3, 4};
    const std::string one = strip_wall_ms(to_csv(run_grid(spec, 1)));
    const std::string four = strip_wall_ms(to_csv(run_grid(spec, 4)));
    CHECK(one == four);
}

TEST_CASE("make_trial_dataset draws fresh generator data per trial") {
    ExperimentSpec spec;
    spec.source.kind = DataSourceSpec::Kind::gaussian;
    spec.source.d = 8;
    spec.seed = 2;
    Dataset t0 = make_trial_dataset(spec, nullptr, 10, 0);
    Dataset t0b = make_trial_dataset(spec, nullptr, 10, 0);
    Dataset t1 = make_trial_dataset(spec, nullptr, 10, 1);
    CHECK(t0.size() == 10);
    CHECK(t0.samples[0].x == t0b.samples[0].x);
    CHECK(t0.samples[0].x != t1.samples[0].x);
}

TEST_CASE("make_trial_dataset subsamples file sources") {
    TempDir dir;
    const std::string path = dir.file("rows.csv");
    std::ofstream out(path);
    for (int i = 0; i < 20; ++i)
        out << 0.1 * (i + 1) << ",0.5," << (i % 2 == 0 ? 1 : -1) << "\n";
    out.close();

    ExperimentSpec spec;
    spec.source.kind = DataSourceSpec::Kind::csv;
    spec.source.csv_path = path;
    spec.source.label_column = 2;
    spec.seed = 4;
    Dataset base = load_file_base(spec.source);
    CHECK(base.size() == 20);

    Dataset sub = make_trial_dataset(spec, &base, 5, 0);
    Dataset sub_again = make_trial_dataset(spec, &base, 5, 0);
    CHECK(sub.size() == 5);
    CHECK(sub.samples[0].x == sub_again.samples[0].x);
    CHECK_THROWS(make_trial_dataset(spec, &base, 21, 0));
}

TEST_CASE("bounds_report_json") {
    ExperimentSpec spec = tiny_adversarial_spec();
    spec.n_values = {4};
    spec.k_values = {2};
    Dataset data = gen_adversarial(4);

    TrainConfig cfg = spec.train;
    cfg.variant = Variant::vanilla;
    Rng rng(1);
    Network net(init_weights(2, 4, 0.0, 0.1, rng), default_second_layer(2));
    TrainReport report = run(data, std::move(net), cfg);
    REQUIRE(report.converged);

    const std::string js = bounds_report_json(spec, &data, &report);
    auto parsed = nlohmann::json::parse(js);
    CHECK(parsed.contains("parameters"));
    CHECK(parsed["Tk0"].get<double>() > 0.0);
    CHECK(parsed["lower_bound"].get<double>() ==
          doctest::Approx(4.0 / (0.1 * 2.0)));
    // n = 4 < 2 tau_k here, so the compression entry reports the precondition.
    CHECK(js.find("compression") != std::string::npos);
}

TEST_CASE("train report JSON round-trip") {
    TempDir dir;
    Dataset data = gen_adversarial(4);
    TrainConfig cfg;
    cfg.eta = 0.1;
    cfg.variant = Variant::vanilla;
    cfg.audit = true;
    Rng rng(3);
    Network net(init_weights(2, 4, 0.0, 0.1, rng), default_second_layer(2));
    TrainReport report = run(data, std::move(net), cfg);

    const std::string path = dir.file("report.json");
    save_report_json(report, path);
    TrainReport back = load_report_json(path);
    CHECK(back.converged == report.converged);
    CHECK(back.tau_k == report.tau_k);
    CHECK(back.total_iterations == report.total_iterations);
    CHECK(back.final_weights == report.final_weights);
    CHECK(back.v == report.v);
    CHECK(back.picked_indices == report.picked_indices);
    CHECK(back.complement_set == report.complement_set);
    CHECK(back.phi_trace == report.phi_trace);
    CHECK(back.psi_sq_trace == report.psi_sq_trace);
    CHECK(back.final_loss == report.final_loss);
    CHECK(back.w_max == report.w_max);
    CHECK(back.rho_effective == report.rho_effective);
    CHECK(back.eta == report.eta);
    CHECK(back.gamma == report.gamma);

    CHECK(audit_step_invariants(back, data, cfg).empty());
    CHECK_THROWS(load_report_json(dir.file("missing.json")));
}

TEST_CASE("emit_csv writes exactly to_csv") {
    TempDir dir;
    ExperimentSpec spec = tiny_adversarial_spec();
    GridResult grid = run_grid(spec, 2);
    const std::string path = dir.file("grid.csv");
    emit_csv(grid, path);
    CHECK(read_file(path) == to_csv(grid));
}
