// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <fmt/format.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "drsl/erm.hpp"
#include "drsl/experiment.hpp"
#include "drsl/kl.hpp"
#include "drsl/lossmoments.hpp"
#include "drsl/wasserstein.hpp"
#include "helpers.hpp"

using namespace drsl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

// Mean F1 per estimator label and m over the seeded rows of a config, plus the slowest cell in seconds.
struct SweepSummary {
    std::map<std::string, std::map<std::size_t, double>> f1;
    double max_cell_seconds = 0.0;
};

SweepSummary run_config(const std::string& name) {
    const std::string path = std::string(DRSL_CONFIG_DIR) + "/" + name + ".json";
    auto cfg = parse_sweep_config(read_file(path), DRSL_CONFIG_DIR);
    const auto start = std::chrono::steady_clock::now();
    const auto rows = run_sweep(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    SweepSummary s;
    std::map<std::string, std::map<std::size_t, int>> count;
    for (const auto& r : rows) {
        s.f1[r.estimator][r.m] += *r.f1;
        count[r.estimator][r.m]++;
    }
    std::size_t cells = 0;
    for (auto& [est, by_m] : s.f1)
        for (auto& [m, v] : by_m) {
            v /= count[est][m];
            ++cells;
        }
    s.max_cell_seconds = secs / static_cast<double>(std::max<std::size_t>(cells, 1));
    return s;
}

std::string kind_of(const std::string& label) { return label.substr(0, label.find('[')); }

std::string describe(const SweepSummary& s, std::size_t m) {
    std::string out;
    for (const auto& [est, by_m] : s.f1) out += fmt::format("{}{}={:.4f}", out.empty() ? "" : " ", kind_of(est), by_m.at(m));
    return out;
}

Outcome noisefree_recovery() {
    Outcome o;
    const auto cancer = run_config("noisefree_cancer");
    const auto quake = run_config("noisefree_earthquake");
    const auto asia = run_config("noisefree_asia");
    for (const auto& [est, by_m] : cancer.f1) o.require(by_m.at(1000) == 1.0, "cancer " + kind_of(est) + " below 1");
    for (const auto& [est, by_m] : quake.f1) {
        const auto k = kind_of(est);
        if (k == "kl") o.require(by_m.at(1000) >= 0.85, "earthquake kl below 0.85");
        if (k == "reg") o.require(by_m.at(1000) >= 0.90, "earthquake reg below 0.90");
    }
    const std::map<std::string, double> asia_ref{{"wass", 0.7800}, {"kl", 0.7285}, {"reg", 0.7897}};
    for (const auto& [est, by_m] : asia.f1)
        o.require(std::abs(by_m.at(1000) - asia_ref.at(kind_of(est))) <= 0.12, "asia " + kind_of(est) + " off by > 0.12");
    const double slowest = std::max({cancer.max_cell_seconds, quake.max_cell_seconds, asia.max_cell_seconds});
    o.require(slowest <= 300.0, "cell runtime above 5 min");
    const auto msg = fmt::format("cancer[{}] earthquake[{}] asia[{}] slowest cell {:.1f}s", describe(cancer, 1000),
                                 describe(quake, 1000), describe(asia, 1000), slowest);
    o.detail = o.detail.empty() ? msg : msg + " | " + o.detail;
    return o;
}

Outcome contaminated_recovery() {
    Outcome o;
    const auto quake = run_config("huber_earthquake");
    const auto cancer = run_config("huber_cancer");
    for (const auto& [est, by_m] : quake.f1)
        o.require(std::abs(by_m.at(1000) - 0.7509) <= 0.12, "earthquake " + kind_of(est) + " off by > 0.12");
    for (const auto& [est, by_m] : cancer.f1) o.require(by_m.at(1000) >= 0.80, "cancer " + kind_of(est) + " below 0.80");
    const auto msg =
        fmt::format("earthquake zeta=0.2 [{}] cancer zeta=0.5 [{}]", describe(quake, 1000), describe(cancer, 1000));
    o.detail = o.detail.empty() ? msg : msg + " | " + o.detail;
    return o;
}

Outcome sample_size_trend() {
    Outcome o;
    const auto s = run_config("trend_earthquake");
    std::string msg;
    for (const auto& [est, by_m] : s.f1) {
        const auto k = kind_of(est);
        msg += k + "[";
        int inversions = 0;
        double prev = -1.0;
        for (const auto& [m, f] : by_m) {
            msg += fmt::format("{}{}:{:.3f}", prev < 0 ? "" : " ", m, f);
            if (prev >= 0 && f < prev) {
                ++inversions;
                o.require(prev - f <= 0.03, k + " drop above 0.03");
            }
            if (m >= 2000) o.require(f == 1.0, fmt::format("{} below 1 at m={}", k, m));
            prev = f;
        }
        msg += "] ";
        o.require(inversions <= 1, k + " has more than one inversion");
    }
    o.detail = o.detail.empty() ? msg : msg + "| " + o.detail;
    return o;
}

Outcome greedy_vs_exact() {
    Outcome o;
    Rng rng(2024);
    int matches = 0, exceed = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.index(7);
        const auto cards = testing::random_cards(rng, n, 4);
        const EncodedView view(cards, rng.index(n));
        const auto W = testing::random_weights(view, rng, 1.5);
        const auto scheme = rng.index(2) ? Encoding::Effects : Encoding::Dummy;
        std::vector<int> xi;
        for (int c : cards) xi.push_back(static_cast<int>(rng.index(c)));
        const double gammas[] = {0.0, 0.1, 1.0};
        const InnerSupremum inner(W, gammas[rng.index(3)], scheme);
        const auto ex = inner.exact(xi);
        Rng g(trial);
        const auto gr = inner.greedy(xi, inner.full_starts(), g);
        exceed += gr.value > ex.value + 1e-12;
        matches += gr.value >= ex.value - 1e-9;
    }
    o.require(matches >= 180, "fewer than 90% matches");
    o.require(exceed == 0, "greedy exceeded exact");
    o.detail = fmt::format("{}/200 matched, {} exceeded", matches, exceed) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome large_gamma() {
    Outcome o;
    Rng rng(5);
    std::size_t moved = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.index(5);
        const auto cards = testing::random_cards(rng, n, 3);
        const auto W = testing::random_weights(EncodedView(cards, rng.index(n)), rng);
        std::vector<std::string> names;
        std::vector<int> vals;
        for (std::size_t j = 0; j < n; ++j) names.push_back("V" + std::to_string(j));
        for (int i = 0; i < 20; ++i)
            for (int c : cards) vals.push_back(static_cast<int>(rng.index(c)));
        const Dataset data(names, cards, vals);
        const auto scheme = trial % 2 ? Encoding::Effects : Encoding::Dummy;
        const double eps = 0.05 * rng.uniform();
        for (double scale : {1.0, 3.0}) {
            const WassDualState st{W, scale * identity_gamma_bound(W), eps};
            const InnerSupremum inner(st.W, st.gamma, scheme);
            for (std::size_t i = 0; i < data.rows(); ++i) {
                const auto row = data.row(i);
                const auto wc = inner.exact(row);
                moved += !std::equal(row.begin(), row.end(), wc.state.begin());
            }
            const double dual = wass_dual_objective(st, data, scheme, InnerMethod::Exact);
            const double rhs = empirical_risk(W, data, scheme) + st.gamma * eps;
            worst = std::max(worst, std::abs(dual - rhs) / (1.0 + std::abs(dual)));
        }
    }
    o.require(moved == 0, "a sample moved");
    o.require(worst <= 1e-12, "dual differs from risk + gamma*eps");
    o.detail = fmt::format("{} samples moved, max relative gap {:.2e}", moved, worst) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome gradients() {
    Outcome o;
    const double h = 1e-6;
    double kl_worst = 0.0, wass_worst = 0.0;
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto cards = testing::random_cards(rng, 2 + rng.index(4), 4);
        const auto net = random_network(cards.size(), std::min<std::size_t>(2, cards.size() - 1), cards, rng.next());
        const auto data = sample(net, 60, rng.next());
        const auto scheme = trial % 2 ? Encoding::Effects : Encoding::Dummy;
        const auto pr = encode_problem(data, rng.index(cards.size()), scheme);
        KlDualState st{testing::random_weights(pr.view, rng), 0.2 + 2 * rng.uniform(), rng.uniform()};
        const auto g = kl_gradient(st, pr);
        Eigen::MatrixXd fd(g.dW.rows(), g.dW.cols());
        for (Eigen::Index i = 0; i < fd.rows(); ++i)
            for (Eigen::Index k = 0; k < fd.cols(); ++k) {
                auto up = st, dn = st;
                up.W.W(i, k) += h;
                dn.W.W(i, k) -= h;
                fd(i, k) = (kl_dual_objective(up, pr) - kl_dual_objective(dn, pr)) / (2 * h);
            }
        auto up = st, dn = st;
        up.gamma += h;
        dn.gamma -= h;
        const double fdg = (kl_dual_objective(up, pr) - kl_dual_objective(dn, pr)) / (2 * h);
        kl_worst = std::max({kl_worst, (fd - g.dW).norm() / std::max(1.0, g.dW.norm()),
                             std::abs(fdg - g.dgamma) / std::max(1.0, std::abs(g.dgamma))});
    }
    Rng wrng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + wrng.index(5);
        const auto cards = testing::random_cards(wrng, n, 3);
        const EncodedView view(cards, wrng.index(n));
        const auto scheme = wrng.index(2) ? Encoding::Effects : Encoding::Dummy;
        const auto net = random_network(n, std::min<std::size_t>(2, n - 1), cards, wrng.next());
        const auto data = sample(net, 25, wrng.next());
        WassDualState st{testing::random_weights(view, wrng, 1.5), 0.2 + wrng.uniform(), wrng.uniform()};
        const auto wc = worst_cases(st, data, scheme, InnerMethod::Exact);
        const auto g = wass_subgradient(st, data, wc, scheme);
        Eigen::MatrixXd fd(g.dW.rows(), g.dW.cols());
        for (Eigen::Index i = 0; i < fd.rows(); ++i)
            for (Eigen::Index k = 0; k < fd.cols(); ++k) {
                auto up = st, dn = st;
                up.W.W(i, k) += h;
                dn.W.W(i, k) -= h;
                fd(i, k) = (wass_frozen_objective(up, data, wc, scheme) - wass_frozen_objective(dn, data, wc, scheme)) /
                           (2 * h);
            }
        auto up = st, dn = st;
        up.gamma += h;
        dn.gamma -= h;
        const double fdg =
            (wass_frozen_objective(up, data, wc, scheme) - wass_frozen_objective(dn, data, wc, scheme)) / (2 * h);
        wass_worst = std::max({wass_worst, (fd - g.dW).norm() / std::max(1.0, g.dW.norm()),
                               std::abs(fdg - g.dgamma) / std::max(1.0, std::abs(g.dgamma))});
    }
    o.require(kl_worst <= 1e-5, "kl gradient mismatch");
    o.require(wass_worst <= 1e-5, "wasserstein subgradient mismatch");
    o.detail = fmt::format("max relative error kl {:.2e}, wass {:.2e}", kl_worst, wass_worst) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome dro_to_erm() {
    Outcome o;
    const auto data = testing::conditioned_data(5000, 1);
    const auto mom = compute_moments(empirical_distribution(data), 3, Encoding::Dummy);
    const auto ls = solve_surrogate(mom, mom.view.features());
    const double kl_gap = (kl_fit(data, 3, 0.0, Encoding::Dummy).W.W - ls.W).norm();
    AdamConfig opt;
    opt.lr = 0.1;
    const double wass_gap = (wass_fit(data, 3, 0.0, opt, Encoding::Dummy, 7).W.W - ls.W).norm();
    o.require(kl_gap <= 0.05, "kl far from least squares");
    o.require(wass_gap <= 0.05, "wasserstein far from least squares");
    o.detail = fmt::format("||W-W_ls||_F kl {:.2e}, wass {:.2e}", kl_gap, wass_gap) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome erm_machinery() {
    Outcome o;
    // prox against the analytic block soft-threshold
    const std::vector<double> grid{-2.0, -0.5, 0.0, 0.5, 2.0};
    const EncodedView view({3, 2, 2}, 1);
    double prox_err = 0.0;
    for (double a : grid)
        for (double b : grid)
            for (double c : grid)
                for (double t : {0.0, 0.3, 1.0, 2.5, 10.0}) {
                    auto W = WeightMatrix::zeros(view);
                    W.W << a, b, c;
                    const auto out = prox_block_l21(W, t);
                    const auto scale = [&](double norm) { return norm <= t ? 0.0 : 1.0 - t / norm; };
                    const double s0 = scale(std::hypot(a, b)), s2 = scale(std::abs(c));
                    prox_err = std::max({prox_err, std::abs(out.W(0, 0) - s0 * a), std::abs(out.W(1, 0) - s0 * b),
                                         std::abs(out.W(2, 0) - s2 * c)});
                }
    o.require(prox_err <= 1e-14, "prox mismatch");

    std::size_t increases = 0;
    const auto asia = sample(testing::load_fixture("asia"), 1000, 3);
    for (auto scheme : {Encoding::Dummy, Encoding::Effects})
        for (double lam : {0.0, 0.01, 0.1}) {
            ErmConfig cfg;
            cfg.lambda = lam;
            cfg.record_history = true;
            const auto res = erm_fit(asia, 5, cfg, scheme);
            for (std::size_t k = 1; k < res.history.size(); ++k) increases += res.history[k] > res.history[k - 1];
        }
    o.require(increases == 0, "objective increased");

    std::size_t nonzero = 0;
    const auto quake = sample(testing::load_fixture("earthquake"), 500, 8);
    for (std::size_t r = 0; r < quake.cols(); ++r) {
        const auto mom = compute_moments(empirical_distribution(quake), r, Encoding::Effects);
        const WeightMatrix g{mom.view, -mom.C};
        double bound = 0.0;
        for (auto j : mom.view.features()) bound = std::max(bound, g.block_norm(j));
        ErmConfig cfg;
        cfg.lambda = bound * 1.0001;
        nonzero += erm_fit(mom, cfg).W.W.cwiseAbs().maxCoeff() != 0.0;
    }
    o.require(nonzero == 0, "W nonzero above the bound");
    o.detail = fmt::format("prox max error {:.1e} over 625 cases, {} increases, {} nonzero fits above bound", prox_err,
                           increases, nonzero) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DRSL_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / ("drsl_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto t = [&](const std::string& n) { return (dir / n).string(); };
    const std::string net = std::string(DRSL_DATA_DIR) + "/networks/";
    write_file(t("sweep.json"), R"({"network": ")" + net + R"(earthquake.json", "m": [300, 600], "seeds": 4,
        "noise": ["none", "huber", "independent"], "zeta": [0.2], "bic": true,
        "estimators": [{"name": "reg", "lambda": [0.01, 0.1], "threshold": 0.2},
                       {"name": "kl", "epsilon0": 1, "threshold": 0.2},
                       {"name": "wass", "epsilon0": 1, "lr": 0.1, "iters": 20, "threshold": 0.2}]})");
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"generate --network " + net + "asia.json --m 800 --seed 7 -o " + t("g.csv"), {t("g.csv")}},
        {"generate --random 7 --max-parents 2 --cardinality 3 --m 200 --seed 2 --network-out " + t("r.json") + " -o " +
             t("r.csv"),
         {t("r.csv"), t("r.json")}},
        {"contaminate --data " + t("g.csv") + " --noise huber --zeta 0.3 --adversary-seed 4 --seed 5 -o " + t("h.csv"),
         {t("h.csv")}},
        {"contaminate --data " + t("g.csv") + " --noise independent --zeta 0.2 --seed 5 -o " + t("i.csv"), {t("i.csv")}},
        {"learn-skeleton --data " + t("h.csv") + " --estimator wass --epsilon0 1 --lr 0.1 --iters 30 --threads 4 -o " +
             t("w.json"),
         {t("w.json"), t("w.json.diagnostics.json")}},
        {"learn-skeleton --data " + t("h.csv") + " --estimator kl --epsilon0 1 --threads 4 -o " + t("k.json"),
         {t("k.json"), t("k.json.diagnostics.json")}},
        {"learn-skeleton --data " + t("h.csv") + " --estimator reg --lambda 0.01 --aggregation and -o " + t("s.json"),
         {t("s.json"), t("s.json.diagnostics.json")}},
        {"learn-dag --data " + t("g.csv") + " --skeleton " + t("w.json") + " -o " + t("d.json"), {t("d.json")}},
        {"evaluate --dag " + t("d.json") + " --truth " + net + "asia.json --data " + t("g.csv") + " -o " + t("e.csv"),
         {t("e.csv")}},
        {"diagnostics --network " + net + "asia.json -o " + t("x.json"), {t("x.json")}},
        {"sweep --config " + t("sweep.json") + " --threads 4 -o " + t("p.csv"), {t("p.csv")}},
    };
    std::size_t files = 0;
    for (const auto& [cmd, outputs] : commands) {
        const auto name = cmd.substr(0, cmd.find(' '));
        if (run_cli(cmd) != 0) {
            o.require(false, name + " failed");
            continue;
        }
        std::vector<std::string> first;
        for (const auto& f : outputs) first.push_back(read_file(f));
        if (run_cli(cmd) != 0) {
            o.require(false, name + " failed on rerun");
            continue;
        }
        for (std::size_t k = 0; k < outputs.size(); ++k, ++files)
            o.require(read_file(outputs[k]) == first[k], name + " output differs: " + outputs[k]);
    }
    if (run_cli("sweep --config " + t("sweep.json") + " --threads 1 -o " + t("q.csv")) == 0) {
        const auto par = read_file(t("p.csv")), ser = read_file(t("q.csv"));
        o.require(par.substr(par.find("dataset,")) == ser.substr(ser.find("dataset,")), "parallel sweep differs from serial");
    } else {
        o.require(false, "serial sweep failed");
    }
    fs::remove_all(dir);
    o.detail = fmt::format("{} commands, {} output files compared", commands.size(), files) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome diagnostics_sanity() {
    Outcome o;
    const auto net = testing::load_fixture("asia");
    const auto dist = exact_distribution(net);
    const auto sk = net.dag().skeleton();
    double smallest = INFINITY;
    std::size_t count = 0;
    // the report file is keyed by node, so each encoding round-trips on its own
    for (auto scheme : {Encoding::Dummy, Encoding::Effects}) {
        std::vector<DiagnosticsReport> reports;
        for (std::size_t r = 0; r < net.size(); ++r) {
            std::vector<std::size_t> support;
            for (std::size_t j = 0; j < net.size(); ++j)
                if (sk.count({std::min(r, j), std::max(r, j)})) support.push_back(j);
            const auto mom = compute_moments(dist, r, scheme);
            reports.push_back(diagnostics(dist, r, solve_surrogate(mom, support), support, scheme));
            smallest = std::min(smallest, reports.back().lambda_min);
        }
        count += reports.size();
        o.require(diagnostics_from_json(diagnostics_to_json(reports)) == reports, "JSON round-trip differs");
    }
    o.require(smallest > 0.0, "a neighbor Gram is singular");
    o.detail = fmt::format("smallest lambda_min {:.4g} over {} reports", smallest, count) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    // optional arguments select criteria by number
    std::vector<bool> selected(11, argc == 1);
    for (int a = 1; a < argc; ++a) {
        const int k = std::atoi(argv[a]);
        if (k >= 1 && k <= 10) selected[k] = true;
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"noisefree recovery", noisefree_recovery},
        {"contaminated recovery", contaminated_recovery},
        {"sample-size trend", sample_size_trend},
        {"greedy vs exact", greedy_vs_exact},
        {"large-gamma property", large_gamma},
        {"gradient correctness", gradients},
        {"DRO to ERM degeneration", dro_to_erm},
        {"ERM machinery", erm_machinery},
        {"pipeline determinism", determinism},
        {"diagnostics sanity", diagnostics_sanity},
    };
    int failed = 0, ran = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!selected[k + 1]) continue;
        ++ran;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        fmt::print("{} {:2} {}: {}\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{}/{} criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
