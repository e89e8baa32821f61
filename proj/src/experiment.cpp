#include "drsl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <json.hpp>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "drsl/error.hpp"

namespace drsl {

namespace {

using nlohmann::json;

template <typename T>
std::vector<T> as_list(const json& v) {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

EstimatorSpec parse_estimator_spec(const json& e) {
    EstimatorSpec s;
    auto& b = s.base;
    b.kind = parse_estimator(e.at("name").get<std::string>());
    if (e.contains("encoding")) b.scheme = parse_encoding(e.at("encoding").get<std::string>());
    if (e.contains("threshold")) s.threshold = e.at("threshold").get<double>();
    if (e.contains("aggregation")) {
        const auto a = e.at("aggregation").get<std::string>();
        if (a != "union" && a != "and") throw UsageError(fmt::format("unknown aggregation '{}'", a));
        s.aggregation = a == "union" ? Aggregation::Union : Aggregation::And;
    }
    const char* key = b.kind == EstimatorKind::Reg ? "lambda" : "epsilon0";
    if (!e.contains(key)) throw UsageError(fmt::format("estimator '{}' needs '{}'", to_string(b.kind), key));
    s.grid = as_list<double>(e.at(key));
    if (s.grid.empty()) throw UsageError(fmt::format("estimator '{}' has an empty '{}' grid", to_string(b.kind), key));
    if (e.contains("lr")) b.adam.lr = e.at("lr").get<double>();
    if (e.contains("iters")) b.adam.iters = e.at("iters").get<std::size_t>();
    if (e.contains("batch")) b.adam.batch = e.at("batch").get<std::size_t>();
    if (e.contains("inner_starts")) b.adam.inner_starts = e.at("inner_starts").get<std::size_t>();
    if (e.contains("beta1")) b.adam.beta1 = e.at("beta1").get<double>();
    if (e.contains("beta2")) b.adam.beta2 = e.at("beta2").get<double>();
    if (e.contains("max_iters")) {
        b.erm.max_iters = e.at("max_iters").get<std::size_t>();
        b.lbfgs.max_iters = b.erm.max_iters;
    }
    return s;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct Cell {
    std::size_t m;
    NoiseModel noise;
    double zeta;
    const EstimatorSpec* spec;
    double hyper;
    std::uint64_t seed;
};

MetricsRow run_cell(const SweepConfig& cfg, const Cell& cell) {
    const auto start = std::chrono::steady_clock::now();
    Dataset data = cell_dataset(cfg, cell.m, cell.noise, cell.zeta, cell.seed);
    auto est = with_hyper(cell.spec->base, cell.hyper);
    est.seed = derive_seed({cell.seed, 0x1ea4ULL});

    MetricsRow row;
    row.dataset = cfg.label;
    row.n = data.cols();
    row.m = data.rows();
    row.noise = to_string(cell.noise);
    row.zeta = cell.zeta;
    row.estimator = estimator_label(est, cell.spec->threshold, cell.spec->aggregation);
    row.seed = std::to_string(cell.seed);

    Dataset train = data;
    std::optional<Dataset> test;
    if (cfg.bic) {
        std::vector<std::size_t> idx(data.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(derive_seed({cell.seed, cell.m, 0x5b117ULL}));
        rng.shuffle(idx);
        const std::size_t half = idx.size() / 2;
        if (half == 0) throw UsageError("held-out BIC needs at least two rows");
        train = data.select_rows(std::span<const std::size_t>(idx.data(), half));
        test = data.select_rows(std::span<const std::size_t>(idx.data() + half, idx.size() - half));
    }
    const auto skel = learn_skeleton(train, est, cell.spec->threshold, cell.spec->aggregation);
    if (cfg.net) row.f1 = f1_skeleton(skel.edges, cfg.net->dag().skeleton(), row.n);
    if (test) {
        const auto dag = hill_climb(train, &skel, HillClimbConfig{});
        row.bic = bic_heldout(dag, train, *test, cfg.bic_alpha);
    }
    if (cfg.record_runtime)
        row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return row;
}

}  // namespace

Dataset cell_dataset(const SweepConfig& cfg, std::size_t m, NoiseModel noise, double zeta, std::uint64_t seed) {
    Dataset data;
    if (cfg.net) {
        data = sample(*cfg.net, m, derive_seed({seed, m}));
    } else {
        data = *cfg.data;
    }
    ContaminationConfig cc;
    cc.model = noise;
    cc.zeta = zeta;
    cc.adversary_k = cfg.adversary_k;
    cc.adversary_max_parents = cfg.adversary_max_parents;
    cc.adversary_seed = derive_seed({seed, 0xadfULL});
    cc.seed = derive_seed({seed, m, 0xc047ULL});
    cc.uniform_failure = cfg.uniform_failure;
    return contaminate(data, cc).data;
}

std::string estimator_label(const EstimatorConfig& c) {
    if (c.kind == EstimatorKind::Reg) return fmt::format("reg[lambda={}]", c.lambda);
    return fmt::format("{}[eps0={}]", to_string(c.kind), c.epsilon0);
}

std::string estimator_label(const EstimatorConfig& c, double threshold, Aggregation agg) {
    auto label = estimator_label(c);
    label.pop_back();
    label += fmt::format(";tau={}", threshold);
    if (agg == Aggregation::And) label += ";and";
    return label + "]";
}

EstimatorConfig with_hyper(EstimatorConfig config, double value) {
    if (config.kind == EstimatorKind::Reg) {
        config.lambda = value;
    } else {
        config.epsilon0 = value;
    }
    return config;
}

SweepConfig parse_sweep_config(const std::string& text, const std::string& base_dir) {
    SweepConfig c;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(fmt::format("sweep config parse error: {}", e.what()));
    }
    try {
        if (doc.contains("network")) {
            const auto path = resolve(doc.at("network").get<std::string>(), base_dir);
            c.net = load_network(path);
            c.label = std::filesystem::path(path).stem().string();
        } else if (doc.contains("dataset")) {
            const auto path = resolve(doc.at("dataset").get<std::string>(), base_dir);
            c.data = load_dataset(path);
            c.label = std::filesystem::path(path).stem().string();
        } else {
            throw UsageError("sweep config needs 'network' or 'dataset'");
        }
        if (doc.contains("label")) c.label = doc.at("label").get<std::string>();
        if (doc.contains("m")) c.m = as_list<std::size_t>(doc.at("m"));
        if (c.data) c.m = {c.data->rows()};
        if (doc.contains("noise")) {
            c.noise.clear();
            for (const auto& s : as_list<std::string>(doc.at("noise"))) c.noise.push_back(parse_noise(s));
        }
        if (doc.contains("zeta")) c.zeta = as_list<double>(doc.at("zeta"));
        if (doc.contains("estimators"))
            for (const auto& e : doc.at("estimators")) c.estimators.push_back(parse_estimator_spec(e));
        if (doc.contains("seeds")) {
            const auto& s = doc.at("seeds");
            if (s.is_number_integer()) {
                const auto k = s.get<std::int64_t>();
                if (k < 1) throw UsageError("'seeds' count must be >= 1");
                c.seeds.resize(static_cast<std::size_t>(k));
                std::iota(c.seeds.begin(), c.seeds.end(), std::uint64_t{0});
            } else {
                c.seeds = s.get<std::vector<std::uint64_t>>();
            }
        }
        if (doc.contains("adversary_k")) c.adversary_k = doc.at("adversary_k").get<std::size_t>();
        if (doc.contains("adversary_max_parents")) c.adversary_max_parents = doc.at("adversary_max_parents").get<std::size_t>();
        if (doc.contains("uniform_failure")) c.uniform_failure = doc.at("uniform_failure").get<bool>();
        if (doc.contains("bic")) c.bic = doc.at("bic").get<bool>();
        if (doc.contains("bic_alpha")) c.bic_alpha = doc.at("bic_alpha").get<double>();
        if (doc.contains("record_runtime")) c.record_runtime = doc.at("record_runtime").get<bool>();
        if (doc.contains("threads")) c.threads = doc.at("threads").get<unsigned>();
    } catch (const json::exception& e) {
        throw DataError(fmt::format("sweep config: {}", e.what()));
    }
    if (c.m.empty() || c.noise.empty() || c.zeta.empty() || c.estimators.empty() || c.seeds.empty())
        throw UsageError("sweep grid is empty (m, noise, zeta, estimators and seeds must be non-empty)");
    for (auto m : c.m)
        if (m == 0) throw UsageError("sample sizes must be >= 1");
    return c;
}

std::vector<MetricsRow> run_sweep(const SweepConfig& cfg) {
    if (cfg.m.empty() || cfg.noise.empty() || cfg.zeta.empty() || cfg.estimators.empty() || cfg.seeds.empty())
        throw UsageError("sweep grid is empty");
    std::vector<Cell> cells;
    for (auto m : cfg.m)
        for (auto noise : cfg.noise)
            for (double zeta : cfg.zeta) {
                // a clean run does not depend on ζ; keep a single ζ = 0 cell
                if (noise == NoiseModel::None && zeta != cfg.zeta.front()) continue;
                const double z = noise == NoiseModel::None ? 0.0 : zeta;
                for (const auto& spec : cfg.estimators)
                    for (double h : spec.grid)
                        for (auto seed : cfg.seeds) cells.push_back({m, noise, z, &spec, h, seed});
            }

    std::vector<MetricsRow> rows(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < cells.size();) {
            try {
                rows[k] = run_cell(cfg, cells[k]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned pool = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cells.size())));
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::jthread> ts;
        for (unsigned t = 0; t < pool; ++t) ts.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::vector<MetricsRow> aggregate_rows(const std::vector<MetricsRow>& rows) {
    std::vector<MetricsRow> out = rows;
    // group by everything except the seed, in first-seen order
    std::vector<std::string> order;
    std::map<std::string, std::vector<const MetricsRow*>> groups;
    for (const auto& r : rows) {
        const auto key = fmt::format("{}|{}|{}|{}|{}|{}", r.dataset, r.n, r.m, r.noise, r.zeta, r.estimator);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    for (const auto& key : order) {
        const auto& g = groups[key];
        auto collect = [&](auto field) {
            std::vector<double> v;
            for (const auto* r : g)
                if ((r->*field).has_value()) v.push_back(*(r->*field));
            return v;
        };
        MetricsRow mean = *g.front(), sd = *g.front();
        mean.seed = "mean";
        sd.seed = "std";
        for (auto field : {&MetricsRow::f1, &MetricsRow::bic, &MetricsRow::runtime_ms}) {
            const auto v = collect(field);
            mean.*field = v.empty() ? std::nullopt : std::optional<double>(mean_of(v));
            sd.*field = v.empty() ? std::nullopt : std::optional<double>(std_of(v));
        }
        out.push_back(mean);
        out.push_back(sd);
    }
    return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, const std::string& comment) {
    std::string out;
    if (!comment.empty()) {
        std::istringstream in(comment);
        std::string line;
        while (std::getline(in, line)) out += "# " + line + "\n";
    }
    out += kMetricsHeader;
    out += '\n';
    for (const auto& r : rows) out += format_metrics_row(r) + '\n';
    return out;
}

}  // namespace drsl
