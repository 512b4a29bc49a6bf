#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relus/harness.hpp"

namespace {

using namespace relus;

int cmd_gen(const std::string& out, bool adversarial, const std::string& dist, std::size_t d,
            std::size_t n, std::uint64_t seed) {
    Dataset data;
    if (adversarial) {
        data = gen_adversarial(d);
    } else {
        GenSpec gs;
        gs.d = d;
        gs.n = n;
        gs.dist = dist == "uniform" ? Dist::uniform : Dist::gaussian;
        gs.seed = seed;
        data = gen_separable(gs);
    }
    write_dataset_csv(data, out);
    std::cout << "wrote " << data.size() << " samples (d=" << data.dim() << ") to " << out << "\n";
    return 0;
}

ExperimentSpec load_spec(const std::string& config_path, std::uint64_t* seed_override) {
    ExperimentSpec spec = experiment_from_config(parse_config_file(config_path));
    if (seed_override) spec.seed = *seed_override;
    return spec;
}

int cmd_train(const ExperimentSpec& spec, const std::string& out) {
    const std::size_t n = spec.n_values.front();
    const std::size_t k = spec.k_values.front();

    Dataset base_storage;
    const Dataset* base = nullptr;
    if (spec.source.kind == DataSourceSpec::Kind::csv ||
        spec.source.kind == DataSourceSpec::Kind::idx) {
        base_storage = load_file_base(spec.source);
        base = &base_storage;
    }
    const Dataset data = make_trial_dataset(spec, base, n, 0);

    TrainConfig cfg = spec.train;
    cfg.variant = spec.variants.front();
    cfg.seed = Rng(spec.seed).derive(1).next_u64();
    Rng init_rng = Rng(spec.seed).derive(2);
    Network net(init_weights(k, data.dim(), cfg.rho, cfg.init_std, init_rng),
                default_second_layer(k));

    const TrainReport rep = run(data, std::move(net), cfg);
    std::cout << "variant=" << variant_name(cfg.variant) << " n=" << data.size() << " k=" << k
              << " converged=" << (rep.converged ? "true" : "false") << " tau_k=" << rep.tau_k
              << " iterations=" << rep.total_iterations << " final_loss=" << rep.final_loss
              << " final_error=" << rep.final_error << "\n";
    if (cfg.audit) {
        const auto violations = audit_step_invariants(rep, data, cfg);
        for (const std::string& v : violations) std::cerr << "audit violation: " << v << "\n";
        if (!violations.empty()) return 2;
    }
    if (!out.empty()) {
        save_report_json(rep, out);
        std::cout << "trace written to " << out << "\n";
    }
    return 0;
}

int cmd_grid(const ExperimentSpec& spec, const std::string& out, int threads) {
    const GridResult result = run_grid(spec, threads);
    if (out.empty()) {
        std::cout << to_csv(result);
    } else {
        emit_csv(result, out);
        std::cout << "wrote " << result.cells.size() << " cells to " << out << "\n";
    }
    return 0;
}

int cmd_bounds(const ExperimentSpec& spec, const std::string& report_path,
               const std::string& out) {
    Dataset base_storage;
    const Dataset* base = nullptr;
    if (spec.source.kind == DataSourceSpec::Kind::csv ||
        spec.source.kind == DataSourceSpec::Kind::idx) {
        base_storage = load_file_base(spec.source);
        base = &base_storage;
    }
    const Dataset data = make_trial_dataset(spec, base, spec.n_values.front(), 0);

    TrainReport rep;
    const TrainReport* rep_ptr = nullptr;
    if (!report_path.empty()) {
        rep = load_report_json(report_path);
        rep_ptr = &rep;
    }
    const std::string json = bounds_report_json(spec, &data, rep_ptr);
    if (out.empty()) {
        std::cout << json;
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open " + out);
        f << json;
    }
    return 0;
}

int cmd_audit(const std::string& report_path, double omega_norm) {
    const TrainReport rep = load_report_json(report_path);
    TrainConfig cfg;
    cfg.eta = rep.eta;
    cfg.gamma = rep.gamma;
    Dataset stub;
    if (omega_norm > 0.0) stub.separator = Vec{omega_norm};  // only the norm matters here
    const auto violations = audit_step_invariants(rep, stub, cfg);
    for (const std::string& v : violations) std::cerr << "audit violation: " << v << "\n";
    std::cout << (violations.empty() ? "audit clean" : "audit failed") << " (tau_k=" << rep.tau_k
              << ")\n";
    return violations.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-injected SGD for two-layer ReLU networks"};
    app.require_subcommand(1);

    std::string config_path, out, report_path, dist = "gaussian";
    std::uint64_t seed = 0;
    bool have_seed = false;
    int threads = 1;
    bool adversarial = false;
    std::size_t d = 2, n = 100;
    double omega_norm = 0.0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) cmd->add_option("--config", config_path, "key=value config file")->required();
        cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            have_seed = true;
        });
        cmd->add_option("--out", out, "output path");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a dataset CSV");
    gen->add_flag("--adversarial", adversarial, "canonical-basis dataset");
    gen->add_option("--dist", dist, "gaussian|uniform");
    gen->add_option("--d", d, "input dimension");
    gen->add_option("--n", n, "sample count");
    gen->add_option("--seed", seed, "seed");
    gen->add_option("--out", out, "output CSV path")->required();

    CLI::App* train = app.add_subcommand("train", "run a single training job");
    add_common(train, true);

    CLI::App* grid = app.add_subcommand("grid", "run a success-rate grid");
    add_common(grid, true);
    grid->add_option("--threads", threads, "worker threads");

    CLI::App* bounds = app.add_subcommand("bounds", "evaluate closed-form bounds");
    add_common(bounds, true);
    bounds->add_option("--report", report_path, "trained trace JSON for a-posteriori bounds");

    CLI::App* audit = app.add_subcommand("audit", "replay a saved trace against proof invariants");
    audit->add_option("--report", report_path, "trace JSON")->required();
    audit->add_option("--omega-norm", omega_norm, "witness norm for the update-cap check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(out, adversarial, dist, d, n, seed);
        if (audit->parsed()) return cmd_audit(report_path, omega_norm);

        ExperimentSpec spec;
        try {
            spec = load_spec(config_path, have_seed ? &seed : nullptr);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        if (train->parsed()) return cmd_train(spec, out);
        if (grid->parsed()) return cmd_grid(spec, out, threads);
        if (bounds->parsed()) return cmd_bounds(spec, report_path, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
