#include "relus/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace relus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Functional seed keys; tags keep the data / init / train streams disjoint.
enum : std::uint64_t { kTagData = 1, kTagInit = 2, kTagTrain = 3 };

std::uint64_t mix_key(std::uint64_t tag, std::uint64_t n, std::uint64_t k, std::uint64_t trial,
                      std::uint64_t variant) {
    std::uint64_t h = tag;
    for (std::uint64_t part : {n, k, trial, variant}) {
        h ^= part + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

double mean_or_nan(const std::vector<double>& xs) {
    if (xs.empty()) return kNaN;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void ExperimentSpec::validate() const {
    if (n_values.empty() || k_values.empty())
        throw std::runtime_error("experiment: empty n or k grid");
    if (trials < 1) throw std::runtime_error("experiment: trials >= 1 required");
    if (variants.empty()) throw std::runtime_error("experiment: no variants selected");
    train.validate();
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::vanilla: return "vanilla";
        case Variant::noisy: return "noisy";
        case Variant::leaky: return "leaky";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "vanilla") return Variant::vanilla;
    if (name == "noisy") return Variant::noisy;
    if (name == "leaky") return Variant::leaky;
    throw std::runtime_error("unknown variant '" + name + "'");
}

Dataset load_file_base(const DataSourceSpec& source) {
    switch (source.kind) {
        case DataSourceSpec::Kind::csv:
            return finalize(load_csv(source.csv_path, source.label_column, source.positive_label));
        case DataSourceSpec::Kind::idx:
            return finalize(load_idx(source.idx_images, source.idx_labels, source.keep, source.relabel));
        default:
            throw std::runtime_error("load_file_base: not a file source");
    }
}

Dataset make_trial_dataset(const ExperimentSpec& spec, const Dataset* base, std::size_t n,
                           int trial) {
    const Rng master(spec.seed);
    Rng rng = master.derive(mix_key(kTagData, n, 0, static_cast<std::uint64_t>(trial), 0));
    switch (spec.source.kind) {
        case DataSourceSpec::Kind::gaussian:
        case DataSourceSpec::Kind::uniform: {
            GenSpec gs;
            gs.d = spec.source.d;
            gs.n = n;
            gs.dist = spec.source.kind == DataSourceSpec::Kind::gaussian ? Dist::gaussian
                                                                          : Dist::uniform;
            gs.seed = rng.next_u64();
            return gen_separable(gs);
        }
        case DataSourceSpec::Kind::adversarial:
            return gen_adversarial(spec.source.d);
        case DataSourceSpec::Kind::csv:
        case DataSourceSpec::Kind::idx: {
            if (base == nullptr) throw std::runtime_error("make_trial_dataset: missing base data");
            if (n > base->size())
                throw std::runtime_error("make_trial_dataset: n exceeds available file data");
            std::vector<std::size_t> order(base->size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.next_u64() % i]);
            Dataset out;
            for (std::size_t i = 0; i < n; ++i) out.samples.push_back(base->samples[order[i]]);
            return out;
        }
    }
    throw std::runtime_error("make_trial_dataset: bad source");
}

namespace {

CellResult run_cell(const ExperimentSpec& spec, const Dataset* base, Variant variant,
                    std::size_t n, std::size_t k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Rng master(spec.seed);

    CellResult cell;
    cell.variant = variant;
    cell.n = n;
    cell.k = k;
    cell.trials = spec.trials;

    int successes = 0;
    double tau_sum = 0.0;
    double pass_sum = 0.0;
    std::vector<double> tk0s, lowers, compressions;

    for (int trial = 0; trial < spec.trials; ++trial) {
        const Dataset data = make_trial_dataset(spec, base, n, trial);

        TrainConfig cfg = spec.train;
        cfg.variant = variant;
        if (spec.eta_small > 0.0 && k <= spec.eta_small_k_max) cfg.eta = spec.eta_small;
        cfg.seed = master
                       .derive(mix_key(kTagTrain, n, k, static_cast<std::uint64_t>(trial),
                                       static_cast<std::uint64_t>(variant)))
                       .next_u64();

        Rng init_rng = master.derive(
            mix_key(kTagInit, n, k, static_cast<std::uint64_t>(trial), 0));
        Network net(init_weights(k, data.dim(), cfg.rho, cfg.init_std, init_rng),
                    default_second_layer(k));

        const TrainReport rep = run(data, std::move(net), cfg);
        const bool success = rep.final_loss <= spec.success_threshold;
        if (success) ++successes;
        tau_sum += static_cast<double>(rep.tau_k);
        pass_sum += static_cast<double>(rep.total_iterations) / static_cast<double>(data.size());

        if (data.separator) {
            BoundInputs in;
            in.k = k;
            in.n = data.size();
            in.eta = cfg.eta;
            in.v = rep.v;
            in.rho = rep.rho_effective;
            in.omega_star_norm = norm2(*data.separator);
            tk0s.push_back(theorem1_Tk0(in));
            lowers.push_back(theorem2_lower(in));
        }
        if (success && static_cast<long>(data.size()) >= 2 * rep.tau_k) {
            // 0/1 risk on the complement of the picked-sample set.
            Network trained(rep.final_weights, rep.v);
            std::size_t wrong = 0;
            for (std::size_t idx : rep.complement_set)
                if (predict(trained, data.samples[idx].x) != data.samples[idx].y) ++wrong;
            BoundInputs in;
            in.n = data.size();
            in.delta = spec.delta;
            in.tau_k = rep.tau_k;
            in.complement_risk = rep.complement_set.empty()
                                     ? 0.0
                                     : static_cast<double>(wrong) /
                                           static_cast<double>(rep.complement_set.size());
            compressions.push_back(theorem3_compression(in));
        }
    }

    cell.success_rate = static_cast<double>(successes) / static_cast<double>(spec.trials);
    cell.mean_tau = tau_sum / static_cast<double>(spec.trials);
    cell.mean_passes = pass_sum / static_cast<double>(spec.trials);
    cell.tk0 = mean_or_nan(tk0s);
    cell.lower_bound = mean_or_nan(lowers);
    cell.compression_bound = mean_or_nan(compressions);
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

}  // namespace

GridResult run_grid(const ExperimentSpec& spec, int threads) {
    spec.validate();
    if (threads < 1) threads = 1;

    Dataset base_storage;
    const Dataset* base = nullptr;
    if (spec.source.kind == DataSourceSpec::Kind::csv ||
        spec.source.kind == DataSourceSpec::Kind::idx) {
        base_storage = load_file_base(spec.source);
        base = &base_storage;
        for (std::size_t n : spec.n_values)
            if (n > base_storage.size())
                throw std::runtime_error("run_grid: grid n exceeds available file data");
    }

    struct Task {
        Variant variant;
        std::size_t n, k;
    };
    std::vector<Task> tasks;
    for (Variant v : spec.variants)
        for (std::size_t n : spec.n_values)
            for (std::size_t k : spec.k_values) tasks.push_back({v, n, k});

    GridResult result;
    result.cells.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                result.cells[i] = run_cell(spec, base, tasks[i].variant, tasks[i].n, tasks[i].k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::sort(result.cells.begin(), result.cells.end(), [](const CellResult& a, const CellResult& b) {
        return std::tie(a.variant, a.n, a.k) < std::tie(b.variant, b.n, b.k);
    });
    return result;
}

namespace {

std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

}  // namespace

std::string to_csv(const GridResult& result) {
    std::ostringstream out;
    out << "variant,n,k,trials,success_rate,mean_tau,mean_passes,Tk0,lower_bound,"
           "compression_bound,wall_ms\n";
    std::vector<const CellResult*> sorted;
    for (const CellResult& c : result.cells) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const CellResult* a, const CellResult* b) {
        return std::tie(a->variant, a->n, a->k) < std::tie(b->variant, b->n, b->k);
    });
    for (const CellResult* c : sorted) {
        out << variant_name(c->variant) << ',' << c->n << ',' << c->k << ',' << c->trials << ','
            << fmt9(c->success_rate) << ',' << fmt9(c->mean_tau) << ',' << fmt9(c->mean_passes)
            << ',' << fmt9(c->tk0) << ',' << fmt9(c->lower_bound) << ','
            << fmt9(c->compression_bound) << ',' << fmt9(c->wall_ms) << '\n';
    }
    return out.str();
}

void emit_csv(const GridResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << to_csv(result);
}

std::string bounds_report_json(const ExperimentSpec& spec, const Dataset* data,
                               const TrainReport* report) {
    nlohmann::ordered_json j;
    const std::size_t k = spec.k_values.front();
    const std::size_t n = data ? data->size() : spec.n_values.front();
    const Vec v = report ? report->v : default_second_layer(k);

    BoundInputs in;
    in.k = k;
    in.d = spec.source.d;
    in.n = n;
    in.eta = spec.train.eta;
    in.v = v;
    in.rho = std::isinf(spec.train.rho) ? 0.0 : spec.train.rho;
    in.alpha = spec.train.alpha;
    in.gamma = spec.train.gamma;
    in.patience = spec.train.patience;
    in.delta = spec.delta;

    j["parameters"] = {{"k", k},
                       {"d", in.d},
                       {"n", n},
                       {"eta", in.eta},
                       {"gamma", in.gamma},
                       {"rho", in.rho},
                       {"alpha", in.alpha},
                       {"patience", in.patience},
                       {"delta", in.delta},
                       {"v", v}};

    if (data && data->separator) {
        in.omega_star_norm = norm2(*data->separator);
        j["omega_star_norm"] = in.omega_star_norm;
        j["Tk"] = theorem1_Tk(in);
        j["Tk0"] = theorem1_Tk0(in);
        j["lower_bound"] = theorem2_lower(in);
        if (in.alpha > 0.0) j["leaky_bound"] = leaky_bound(in);
        const double cor = corollary1_bound(in);
        j["corollary1_bound"] = cor;
        j["corollary1_vacuous"] = is_vacuous_risk(cor);
    } else {
        j["omega_star_norm"] = nullptr;
    }

    if (report) {
        j["tau_k"] = report->tau_k;
        j["converged"] = report->converged;
        j["final_loss"] = report->final_loss;
        j["final_error"] = report->final_error;
        if (report->gamma > 0.0 && report->w_max > 0.0) {
            in.w_max = report->w_max;
            j["prop1_confidence"] = prop1_confidence(in);
        }
        if (static_cast<long>(n) >= 2 * report->tau_k) {
            in.tau_k = report->tau_k;
            in.complement_risk = 0.0;
            if (data && !report->complement_set.empty()) {
                Network trained(report->final_weights, report->v);
                std::size_t wrong = 0;
                for (std::size_t idx : report->complement_set)
                    if (predict(trained, data->samples[idx].x) != data->samples[idx].y) ++wrong;
                in.complement_risk = static_cast<double>(wrong) /
                                     static_cast<double>(report->complement_set.size());
            }
            j["complement_risk"] = in.complement_risk;
            const double comp = theorem3_compression(in);
            j["compression_bound"] = comp;
            j["compression_vacuous"] = is_vacuous_risk(comp);
        } else {
            j["compression_bound"] = "precondition n>=2tau_k violated";
        }
    }
    return j.dump(2) + "\n";
}

void save_report_json(const TrainReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["eta"] = report.eta;
    j["gamma"] = report.gamma;
    j["v"] = report.v;
    j["converged"] = report.converged;
    j["tau_k"] = report.tau_k;
    j["total_iterations"] = report.total_iterations;
    j["final_loss"] = report.final_loss;
    j["final_error"] = report.final_error;
    j["w_max"] = report.w_max;
    j["rho_effective"] = report.rho_effective;
    j["picked_indices"] = report.picked_indices;
    j["complement_set"] = report.complement_set;
    j["phi_trace"] = report.phi_trace;
    j["psi_sq_trace"] = report.psi_sq_trace;
    j["weights"] = {{"rows", report.final_weights.rows},
                    {"cols", report.final_weights.cols},
                    {"data", report.final_weights.data}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_report_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

TrainReport load_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_report_json: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("version", 0) != 1)
        throw std::runtime_error("load_report_json: unsupported trace version");
    TrainReport rep;
    rep.eta = j.at("eta").get<double>();
    rep.gamma = j.at("gamma").get<double>();
    rep.v = j.at("v").get<Vec>();
    rep.converged = j.at("converged").get<bool>();
    rep.tau_k = j.at("tau_k").get<long>();
    rep.total_iterations = j.at("total_iterations").get<long>();
    rep.final_loss = j.at("final_loss").get<double>();
    rep.final_error = j.at("final_error").get<double>();
    rep.w_max = j.at("w_max").get<double>();
    rep.rho_effective = j.at("rho_effective").get<double>();
    rep.picked_indices = j.at("picked_indices").get<std::vector<std::size_t>>();
    rep.complement_set = j.at("complement_set").get<std::vector<std::size_t>>();
    rep.phi_trace = j.at("phi_trace").get<std::vector<double>>();
    rep.psi_sq_trace = j.at("psi_sq_trace").get<std::vector<double>>();
    const auto& w = j.at("weights");
    rep.final_weights = Matrix(w.at("rows").get<std::size_t>(), w.at("cols").get<std::size_t>());
    rep.final_weights.data = w.at("data").get<std::vector<double>>();
    return rep;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

ExperimentSpec experiment_from_config(const std::map<std::string, std::string>& kv) {
    ExperimentSpec spec;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto get_double = [&](const std::string& key, double& out) {
        if (const std::string* s = get(key)) {
            if (*s == "inf") out = std::numeric_limits<double>::infinity();
            else out = std::stod(*s);
        }
    };
    auto get_size = [&](const std::string& key, std::size_t& out) {
        if (const std::string* s = get(key)) out = static_cast<std::size_t>(std::stoull(*s));
    };
    auto get_sizes = [&](const std::string& key, std::vector<std::size_t>& out) {
        if (const std::string* s = get(key)) {
            out.clear();
            for (const std::string& item : split_list(*s))
                out.push_back(static_cast<std::size_t>(std::stoull(item)));
        }
    };

    try {
        if (const std::string* s = get("source")) {
            if (*s == "gaussian") spec.source.kind = DataSourceSpec::Kind::gaussian;
            else if (*s == "uniform") spec.source.kind = DataSourceSpec::Kind::uniform;
            else if (*s == "adversarial") spec.source.kind = DataSourceSpec::Kind::adversarial;
            else if (*s == "csv") spec.source.kind = DataSourceSpec::Kind::csv;
            else if (*s == "idx") spec.source.kind = DataSourceSpec::Kind::idx;
            else throw std::runtime_error("unknown source '" + *s + "'");
        }
        get_size("d", spec.source.d);
        if (const std::string* s = get("csv_path")) spec.source.csv_path = *s;
        get_size("label_column", spec.source.label_column);
        if (const std::string* s = get("positive_label")) spec.source.positive_label = *s;
        if (const std::string* s = get("idx_images")) spec.source.idx_images = *s;
        if (const std::string* s = get("idx_labels")) spec.source.idx_labels = *s;
        if (const std::string* s = get("keep")) {
            const auto items = split_list(*s);
            if (items.size() != 2) throw std::runtime_error("keep needs two values");
            spec.source.keep = {std::stoi(items[0]), std::stoi(items[1])};
        }
        if (const std::string* s = get("relabel")) {
            const auto items = split_list(*s);
            if (items.size() != 2) throw std::runtime_error("relabel needs two values");
            spec.source.relabel = {std::stoi(items[0]), std::stoi(items[1])};
        }

        get_sizes("n_list", spec.n_values);
        get_sizes("k_list", spec.k_values);
        std::size_t single = 0;
        get_size("n", single);
        if (single) spec.n_values = {single};
        single = 0;
        get_size("k", single);
        if (single) spec.k_values = {single};

        if (const std::string* s = get("trials")) spec.trials = std::stoi(*s);
        if (const std::string* s = get("variants")) {
            spec.variants.clear();
            for (const std::string& name : split_list(*s))
                spec.variants.push_back(variant_from_name(name));
        } else if (const std::string* s2 = get("variant")) {
            spec.variants = {variant_from_name(*s2)};
        }

        get_double("eta", spec.train.eta);
        get_double("gamma", spec.train.gamma);
        get_double("rho", spec.train.rho);
        get_double("init_std", spec.train.init_std);
        get_double("alpha", spec.train.alpha);
        if (const std::string* s = get("patience")) spec.train.patience = std::stoi(*s);
        if (const std::string* s = get("max_passes")) spec.train.max_passes = std::stoi(*s);
        if (const std::string* s = get("schedule")) {
            if (*s == "cyclic") spec.train.schedule = Schedule::cyclic;
            else if (*s == "uniform") spec.train.schedule = Schedule::uniform;
            else throw std::runtime_error("unknown schedule '" + *s + "'");
        }
        if (const std::string* s = get("audit")) spec.train.audit = (*s == "true" || *s == "1");
        get_double("threshold", spec.success_threshold);
        spec.train.convergence_tol = spec.success_threshold;
        get_double("delta", spec.delta);
        get_double("eta_small", spec.eta_small);
        get_size("eta_small_k_max", spec.eta_small_k_max);
        if (const std::string* s = get("seed")) spec.seed = std::stoull(*s);

        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config error: ") + e.what());
    }
    return spec;
}

}  // namespace relus
