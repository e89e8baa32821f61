// Command-line driver: generate, contaminate, learn, evaluate and sweep.

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "drsl/bn.hpp"
#include "drsl/contamination.hpp"
#include "drsl/error.hpp"
#include "drsl/evaluation.hpp"
#include "drsl/experiment.hpp"
#include "drsl/hill_climb.hpp"
#include "drsl/lossmoments.hpp"
#include "drsl/skeleton.hpp"

namespace {

using namespace drsl;

// Every option of the subcommand with its value, one per line.
std::string echo(const CLI::App* sub) {
    std::string out = fmt::format("drsl {}\n", sub->get_name());
    std::istringstream in(sub->config_to_str(true, false));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '[') out += line + "\n";
    return out;
}

nlohmann::ordered_json echo_json(const CLI::App* sub) {
    auto arr = nlohmann::ordered_json::array();
    std::istringstream in(echo(sub));
    std::string line;
    while (std::getline(in, line)) arr.push_back(line);
    return arr;
}

// Inserts a "_meta" entry at the front of a JSON document.
std::string with_meta(const std::string& json_text, const CLI::App* sub) {
    auto doc = nlohmann::ordered_json::parse(json_text);
    nlohmann::ordered_json out;
    out["_meta"] = echo_json(sub);
    for (auto& [k, v] : doc.items()) out[k] = v;
    return out.dump(1) + "\n";
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file(path, text);
    }
}

std::optional<std::vector<int>> cards_from(const std::string& network_path) {
    if (network_path.empty()) return std::nullopt;
    return load_network(network_path).cardinalities();
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct LearnOpts {
    std::string data, network, out, diagnostics, estimator = "reg", encoding = "dummy", aggregation = "union";
    double lambda = 0.0, epsilon0 = 0.0, threshold = 1e-2, lr = 1.0;
    std::optional<double> epsilon;
    std::size_t batch = 500, iters = 200, inner_starts = 10, max_iters = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

EstimatorConfig estimator_from(const LearnOpts& o, std::size_t m) {
    EstimatorConfig c;
    c.kind = parse_estimator(o.estimator);
    c.scheme = parse_encoding(o.encoding);
    c.lambda = o.lambda;
    c.epsilon0 = o.epsilon ? *o.epsilon * static_cast<double>(m) : o.epsilon0;
    c.adam.lr = o.lr;
    c.adam.batch = o.batch;
    c.adam.iters = o.iters;
    c.adam.inner_starts = o.inner_starts;
    if (o.max_iters > 0) {
        c.erm.max_iters = o.max_iters;
        c.lbfgs.max_iters = o.max_iters;
    }
    c.seed = o.seed;
    if (c.lambda < 0) throw UsageError("--lambda must be >= 0");
    if (c.epsilon0 < 0) throw UsageError("--epsilon0 must be >= 0");
    return c;
}

Aggregation aggregation_from(const std::string& s) {
    if (s == "union") return Aggregation::Union;
    if (s == "and") return Aggregation::And;
    throw UsageError(fmt::format("unknown aggregation '{}'", s));
}

std::vector<std::size_t> true_neighbors(const DiscreteBayesNet& net, std::size_t r) {
    std::vector<std::size_t> out;
    for (auto [u, v] : net.dag().skeleton()) {
        if (u == r) out.push_back(v);
        if (v == r) out.push_back(u);
    }
    std::sort(out.begin(), out.end());
    return out;
}

DiagnosticsReport diagnose(const StateDistribution& dist, std::size_t r, std::span<const std::size_t> support,
                           Encoding scheme, const WeightMatrix* ref) {
    if (ref) return diagnostics(dist, r, *ref, support, scheme);
    const auto mom = compute_moments(dist, r, scheme);
    WeightMatrix W = WeightMatrix::zeros(mom.view);
    try {
        W = solve_surrogate(mom, support);
    } catch (const SolverError&) {
        // singular support: keep W = 0, the report flags it
    }
    return diagnostics(dist, r, W, support, scheme);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust skeleton learning for discrete Bayesian networks"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Sample a dataset from a network");
    std::string g_network, g_out, g_net_out;
    std::size_t g_m = 0, g_random = 0, g_max_parents = 2;
    int g_card = 2;
    std::uint64_t g_seed = 0;
    gen->add_option("--network", g_network, "Network JSON file");
    gen->add_option("--random", g_random, "Use a random network with this many nodes");
    gen->add_option("--max-parents", g_max_parents, "Parent limit for --random")->capture_default_str();
    gen->add_option("--cardinality", g_card, "Cardinality of every node for --random")->capture_default_str();
    gen->add_option("--network-out", g_net_out, "Also write the random network here");
    gen->add_option("-m,--m", g_m, "Number of samples")->required();
    gen->add_option("--seed", g_seed, "Random seed")->capture_default_str();
    gen->add_option("-o,--out", g_out, "Output CSV (default stdout)");

    // contaminate
    auto* con = app.add_subcommand("contaminate", "Corrupt a dataset");
    std::string c_data, c_network, c_out, c_noise = "huber";
    double c_zeta = 0.0;
    std::size_t c_k = 20, c_mp = 1;
    std::uint64_t c_seed = 0, c_adv_seed = 0;
    bool c_uniform = false;
    con->add_option("--data", c_data, "Input dataset CSV")->required();
    con->add_option("--network", c_network, "Network JSON supplying cardinalities");
    con->add_option("--noise", c_noise, "none | huber | independent")->capture_default_str();
    con->add_option("--zeta", c_zeta, "Corruption probability")->capture_default_str();
    con->add_option("--adversary-k", c_k, "Mixture components")->capture_default_str();
    con->add_option("--adversary-max-parents", c_mp, "Parent limit of adversary networks")->capture_default_str();
    con->add_option("--adversary-seed", c_adv_seed, "Seed of the adversary mixture")->capture_default_str();
    con->add_option("--seed", c_seed, "Seed of the corruption draws")->capture_default_str();
    con->add_flag("--uniform-failure", c_uniform, "Independent failure replaces cells uniformly at random");
    con->add_option("-o,--out", c_out, "Output CSV (default stdout)");

    // learn-skeleton
    auto* learn = app.add_subcommand("learn-skeleton", "Learn the undirected skeleton");
    LearnOpts lo;
    learn->add_option("--data", lo.data, "Dataset CSV")->required();
    learn->add_option("--network", lo.network, "Network JSON supplying cardinalities");
    learn->add_option("--estimator", lo.estimator, "wass | kl | reg")->capture_default_str();
    learn->add_option("--encoding", lo.encoding, "dummy | effects")->capture_default_str();
    learn->add_option("--lambda", lo.lambda, "Group penalty for reg")->capture_default_str();
    learn->add_option("--epsilon0", lo.epsilon0, "Radius scale; epsilon = epsilon0 / m")->capture_default_str();
    learn->add_option("--epsilon", lo.epsilon, "Radius given directly (overrides --epsilon0)");
    learn->add_option("--threshold", lo.threshold, "Block-norm threshold")->capture_default_str();
    learn->add_option("--aggregation", lo.aggregation, "union | and")->capture_default_str();
    learn->add_option("--lr", lo.lr, "Adam step size (wass)")->capture_default_str();
    learn->add_option("--batch", lo.batch, "Batch size (wass)")->capture_default_str();
    learn->add_option("--iters", lo.iters, "Outer iterations (wass)")->capture_default_str();
    learn->add_option("--inner-starts", lo.inner_starts, "Greedy starts per sample (wass)")->capture_default_str();
    learn->add_option("--max-iters", lo.max_iters, "Solver iteration cap for reg/kl (0 = default)")->capture_default_str();
    learn->add_option("--seed", lo.seed, "Random seed")->capture_default_str();
    learn->add_option("--threads", lo.threads, "Worker threads (0 = all cores)")->capture_default_str();
    learn->add_option("-o,--out", lo.out, "Skeleton JSON (default stdout)");
    learn->add_option("--diagnostics", lo.diagnostics, "Diagnostics sidecar (default <out>.diagnostics.json)");

    // learn-dag
    auto* ldag = app.add_subcommand("learn-dag", "Hill-climbing DAG search with BIC");
    std::string d_data, d_network, d_skel, d_out;
    std::size_t d_max_iters = 10000, d_restarts = 0;
    std::uint64_t d_seed = 0;
    ldag->add_option("--data", d_data, "Dataset CSV")->required();
    ldag->add_option("--network", d_network, "Network JSON supplying cardinalities");
    ldag->add_option("--skeleton", d_skel, "Restrict candidate edges to this skeleton");
    ldag->add_option("--max-iters", d_max_iters, "Move limit")->capture_default_str();
    ldag->add_option("--hc-restarts", d_restarts, "Perturb-and-reclimb rounds")->capture_default_str();
    ldag->add_option("--seed", d_seed, "Seed for restarts")->capture_default_str();
    ldag->add_option("-o,--out", d_out, "DAG JSON (default stdout)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Skeleton F1 and held-out BIC");
    std::string e_skel, e_dag, e_truth, e_train, e_test, e_data, e_out, e_bic_on = "test", e_label = "data";
    double e_alpha = 1.0;
    std::uint64_t e_seed = 0;
    eval->add_option("--skeleton", e_skel, "Skeleton JSON");
    eval->add_option("--dag", e_dag, "DAG JSON (its skeleton is scored when --skeleton is absent)");
    eval->add_option("--truth", e_truth, "Ground-truth network JSON");
    eval->add_option("--train", e_train, "Training split CSV");
    eval->add_option("--test", e_test, "Test split CSV");
    eval->add_option("--data", e_data, "Full dataset CSV, split in halves by --seed");
    eval->add_option("--bic-on", e_bic_on, "test | full")->capture_default_str();
    eval->add_option("--alpha", e_alpha, "Additive smoothing")->capture_default_str();
    eval->add_option("--seed", e_seed, "Split seed")->capture_default_str();
    eval->add_option("--label", e_label, "Dataset column value")->capture_default_str();
    eval->add_option("-o,--out", e_out, "Metrics CSV (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Grid experiment from a JSON config");
    std::string s_config, s_out;
    unsigned s_threads = 0;
    bool s_runtime = false;
    sweep->add_option("--config", s_config, "Sweep config JSON")->required();
    sweep->add_option("--threads", s_threads, "Worker threads (0 = config value)")->capture_default_str();
    sweep->add_flag("--record-runtime", s_runtime, "Fill the runtime_ms column (output no longer byte-stable)");
    sweep->add_option("-o,--out", s_out, "Metrics CSV (default stdout)");

    // diagnostics
    auto* diag = app.add_subcommand("diagnostics", "Regularity diagnostics on the true neighbor sets");
    std::string x_network, x_data, x_out, x_encoding = "dummy";
    diag->add_option("--network", x_network, "Network JSON (true neighbors; exact moments without --data)")->required();
    diag->add_option("--data", x_data, "Use empirical moments of this dataset");
    diag->add_option("--encoding", x_encoding, "dummy | effects")->capture_default_str();
    diag->add_option("-o,--out", x_out, "Report JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            if (g_m == 0) throw UsageError("--m must be >= 1");
            if (g_network.empty() == (g_random == 0)) throw UsageError("give exactly one of --network or --random");
            DiscreteBayesNet net;
            if (!g_network.empty()) {
                net = load_network(g_network);
            } else {
                if (g_card < 2) throw UsageError("--cardinality must be >= 2");
                if (g_random > 1 && g_max_parents >= g_random) throw UsageError("--max-parents must be < n");
                net = random_network(g_random, g_max_parents, std::vector<int>(g_random, g_card), g_seed);
                if (!g_net_out.empty()) save_network(net, g_net_out);
            }
            emit(g_out, dataset_to_csv(sample(net, g_m, g_seed), echo(gen)));
        } else if (con->parsed()) {
            ContaminationConfig cc;
            cc.model = parse_noise(c_noise);
            cc.zeta = c_zeta;
            cc.adversary_k = c_k;
            cc.adversary_max_parents = c_mp;
            cc.adversary_seed = c_adv_seed;
            cc.seed = c_seed;
            cc.uniform_failure = c_uniform;
            const auto data = load_dataset(c_data, cards_from(c_network));
            emit(c_out, dataset_to_csv(contaminate(data, cc).data, echo(con)));
        } else if (learn->parsed()) {
            const auto data = load_dataset(lo.data, cards_from(lo.network));
            const auto est = estimator_from(lo, data.rows());
            if (!(lo.threshold >= 0.0)) throw UsageError("--threshold must be >= 0");
            std::vector<NodeFit> fits;
            const auto skel = learn_skeleton(data, est, lo.threshold, aggregation_from(lo.aggregation),
                                             lo.threads ? lo.threads : default_threads(), &fits);
            emit(lo.out, with_meta(skeleton_to_json(skel), learn));

            std::string side = lo.diagnostics;
            if (side.empty() && !lo.out.empty() && lo.out != "-") side = lo.out + ".diagnostics.json";
            if (!side.empty()) {
                const auto dist = empirical_distribution(data);
                std::vector<DiagnosticsReport> reps;
                for (std::size_t r = 0; r < data.cols(); ++r) {
                    std::vector<std::size_t> support;
                    for (std::size_t i = 0; i < data.cols(); ++i)
                        if (i != r && fits[r].scores[i] > lo.threshold) support.push_back(i);
                    reps.push_back(diagnose(dist, r, support, est.scheme, &fits[r].W));
                }
                write_file(side, with_meta(diagnostics_to_json(reps), learn));
            }
        } else if (ldag->parsed()) {
            const auto data = load_dataset(d_data, cards_from(d_network));
            std::optional<Skeleton> skel;
            if (!d_skel.empty()) {
                skel = parse_skeleton(read_file(d_skel), data.names());
                if (skel->names != data.names()) throw DataError("skeleton node names do not match the dataset header");
            }
            const auto dag = hill_climb(data, skel ? &*skel : nullptr, HillClimbConfig{d_max_iters, d_restarts, d_seed});
            emit(d_out, with_meta(dag_to_json(dag, data.names()), ldag));
        } else if (eval->parsed()) {
            if (e_skel.empty() && e_dag.empty()) throw UsageError("give --skeleton and/or --dag");
            if (e_bic_on != "test" && e_bic_on != "full") throw UsageError("--bic-on must be test or full");
            std::optional<DiscreteBayesNet> truth;
            if (!e_truth.empty()) truth = load_network(e_truth);
            const auto cards = truth ? std::optional<std::vector<int>>(truth->cardinalities()) : std::nullopt;
            std::vector<std::string> names = truth ? truth->names() : std::vector<std::string>{};

            std::optional<Dataset> train, test;
            if (!e_data.empty()) {
                const auto full = load_dataset(e_data, cards);
                if (e_bic_on == "full") {
                    train = full;
                    test = full;
                } else {
                    std::vector<std::size_t> idx(full.rows());
                    std::iota(idx.begin(), idx.end(), std::size_t{0});
                    Rng rng(derive_seed({e_seed, full.rows(), 0x5b117ULL}));
                    rng.shuffle(idx);
                    const std::size_t half = idx.size() / 2;
                    train = full.select_rows(std::span<const std::size_t>(idx.data(), half));
                    test = full.select_rows(std::span<const std::size_t>(idx.data() + half, idx.size() - half));
                }
            } else {
                if (!e_train.empty()) train = load_dataset(e_train, cards);
                if (!e_test.empty()) test = load_dataset(e_test, cards);
                if (e_bic_on == "full" && train && test) {
                    auto v = train->values();
                    v.insert(v.end(), test->values().begin(), test->values().end());
                    Dataset all(train->names(), train->cardinalities(), std::move(v));
                    train = all;
                    test = all;
                }
            }
            if (names.empty() && train) names = train->names();
            if (names.empty() && test) names = test->names();

            MetricsRow row;
            row.dataset = e_label;
            row.seed = std::to_string(e_seed);
            row.estimator = "external";
            std::optional<Dag> dag;
            if (!e_dag.empty()) dag = parse_dag(read_file(e_dag), names);
            std::optional<Skeleton> skel;
            if (!e_skel.empty()) skel = parse_skeleton(read_file(e_skel), names);
            row.n = skel ? skel->size() : dag->size();
            if (truth) {
                if (truth->size() != row.n)
                    throw DataError(fmt::format("estimate has {} nodes but the truth has {}", row.n, truth->size()));
                if (skel && skel->names != truth->names()) throw DataError("skeleton node names differ from the truth");
                const EdgeSet est = skel ? skel->edges : dag->skeleton();
                row.f1 = f1_skeleton(est, truth->dag().skeleton(), row.n);
            }
            if (dag && test) {
                if (!train) throw UsageError("held-out BIC needs --train with --test, or --data");
                if (dag->size() != test->cols()) throw DataError("DAG size does not match the dataset width");
                row.m = test->rows();
                row.bic = bic_heldout(*dag, *train, *test, e_alpha);
            }
            std::string text;
            std::istringstream in(echo(eval));
            for (std::string line; std::getline(in, line);) text += "# " + line + "\n";
            text += std::string(kMetricsHeader) + "\n" + format_metrics_row(row) + "\n";
            emit(e_out, text);
        } else if (sweep->parsed()) {
            const auto base = std::filesystem::path(s_config).parent_path().string();
            auto cfg = parse_sweep_config(read_file(s_config), base);
            if (s_threads > 0) cfg.threads = s_threads;
            if (s_runtime) cfg.record_runtime = true;
            const auto rows = aggregate_rows(run_sweep(cfg));
            // the thread count does not affect the rows, so it is not echoed
            std::string comment = fmt::format("drsl sweep\nconfig = {}\n", s_config);
            comment += nlohmann::json::parse(read_file(s_config)).dump();
            emit(s_out, metrics_csv(rows, comment));
        } else if (diag->parsed()) {
            const auto net = load_network(x_network);
            const auto scheme = parse_encoding(x_encoding);
            const auto dist = x_data.empty() ? exact_distribution(net) : empirical_distribution(load_dataset(x_data, net.cardinalities()));
            if (dist.names != net.names()) throw DataError("dataset header does not match the network node names");
            std::vector<DiagnosticsReport> reps;
            for (std::size_t r = 0; r < net.size(); ++r) {
                const auto support = true_neighbors(net, r);
                reps.push_back(diagnose(dist, r, support, scheme, nullptr));
            }
            emit(x_out, with_meta(diagnostics_to_json(reps), diag));
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
