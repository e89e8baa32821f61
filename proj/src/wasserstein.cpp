#include "drsl/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>

#include "drsl/error.hpp"

namespace drsl {

InnerSupremum::InnerSupremum(const WeightMatrix& W, double gamma, Encoding scheme)
    : view_(W.view), scheme_(scheme), gamma_(gamma), n_(W.view.nodes()), q_(W.view.target_width()) {
    if (!(gamma >= 0.0)) throw UsageError("gamma must be >= 0");
    const auto& cards = view_.cardinalities();
    contrib_.resize(n_);
    dist_.resize(n_);
    std::vector<double> enc;
    for (std::size_t j = 0; j < n_; ++j) {
        const int c = cards[j];
        full_starts_ += static_cast<std::size_t>(c);
        enc.assign(static_cast<std::size_t>(c - 1), 0.0);
        contrib_[j].assign(static_cast<std::size_t>(c) * q_, 0.0);
        for (int v = 0; v < c; ++v) {
            encode_into(scheme, c, v, enc.data());
            double* out = contrib_[j].data() + static_cast<std::size_t>(v) * q_;
            if (j == view_.target()) {
                std::copy(enc.begin(), enc.end(), out);
                continue;
            }
            const auto blk = W.block(j);
            for (std::size_t k = 0; k < q_; ++k) {
                double s = 0.0;
                for (std::size_t a = 0; a < enc.size(); ++a) s += blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) * enc[a];
                out[k] = s;
            }
        }
        dist_[j].resize(static_cast<std::size_t>(c * c));
        for (int a = 0; a < c; ++a)
            for (int b = 0; b < c; ++b) dist_[j][static_cast<std::size_t>(a * c + b)] = encoding_distance(scheme, c, a, b);
    }
}

double InnerSupremum::transport(std::span<const int> x, std::span<const int> xi) const {
    double t = 0.0;
    const auto& cards = view_.cardinalities();
    for (std::size_t j = 0; j < n_; ++j) t += dist_[j][static_cast<std::size_t>(x[j] * cards[j] + xi[j])];
    return t;
}

double InnerSupremum::objective(std::span<const int> x, std::span<const int> xi) const {
    const std::size_t r = view_.target();
    double loss = 0.0;
    for (std::size_t k = 0; k < q_; ++k) {
        double e = contrib_[r][static_cast<std::size_t>(x[r]) * q_ + k];
        for (std::size_t j = 0; j < n_; ++j)
            if (j != r) e -= contrib_[j][static_cast<std::size_t>(x[j]) * q_ + k];
        loss += e * e;
    }
    return 0.5 * loss - gamma_ * transport(x, xi);
}

WorstCase InnerSupremum::exact(std::span<const int> xi) const {
    const auto& cards = view_.cardinalities();
    double total = 1.0;
    for (int c : cards) total *= c;
    if (total > 1e6) throw UsageError(fmt::format("exact inner supremum needs {} states (limit 1e6)", total));
    WorstCase best{{xi.begin(), xi.end()}, objective(xi, xi), 0.0};
    std::vector<int> x(n_, 0);
    bool have_lex = false;
    WorstCase lex;  // best non-sample state, lexicographically first among ties
    for (;;) {
        const double v = objective(x, xi);
        if (!have_lex || v > lex.value) {
            lex.state = x;
            lex.value = v;
            have_lex = true;
        }
        std::size_t j = n_;
        bool done = true;
        while (j > 0) {
            --j;
            if (++x[j] < cards[j]) {
                done = false;
                break;
            }
            x[j] = 0;
        }
        if (done) break;
    }
    if (lex.value > best.value) best = std::move(lex);
    best.transport = transport(best.state, xi);
    return best;
}

WorstCase InnerSupremum::greedy(std::span<const int> xi, std::size_t starts, Rng& rng) const {
    if (starts == 0) throw UsageError("greedy inner supremum needs at least one start");
    const auto& cards = view_.cardinalities();
    const std::size_t r = view_.target();

    // scratch reused across calls on the same thread
    thread_local std::vector<std::size_t> picks, order;
    thread_local std::vector<int> x;
    thread_local std::vector<double> res;
    picks.resize(full_starts_);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    if (starts < full_starts_) {
        // partial Fisher-Yates: the first `starts` entries are a uniform subset
        for (std::size_t k = 0; k < starts; ++k) std::swap(picks[k], picks[k + rng.index(full_starts_ - k)]);
        picks.resize(starts);
    }

    WorstCase best{{xi.begin(), xi.end()}, objective(xi, xi), 0.0};
    x.resize(n_);
    res.resize(q_);
    std::size_t evals = 0;

    for (auto pick : picks) {
        std::size_t j0 = 0;
        while (pick >= static_cast<std::size_t>(cards[j0])) pick -= static_cast<std::size_t>(cards[j0++]);
        std::copy(xi.begin(), xi.end(), x.begin());
        x[j0] = static_cast<int>(pick);

        order.clear();
        for (std::size_t j = 0; j < n_; ++j)
            if (j != j0) order.push_back(j);
        rng.shuffle(order);

        // residual ℰ(x_r) - Σ_j W_jᵀℰ(x_j) and transport at the current x
        for (std::size_t k = 0; k < q_; ++k) {
            double e = contrib_[r][static_cast<std::size_t>(x[r]) * q_ + k];
            for (std::size_t j = 0; j < n_; ++j)
                if (j != r) e -= contrib_[j][static_cast<std::size_t>(x[j]) * q_ + k];
            res[k] = e;
        }
        double trans = transport(x, xi);

        for (auto j : order) {
            const int c = cards[j];
            const double* cur = contrib_[j].data() + static_cast<std::size_t>(x[j]) * q_;
            const double sign = j == r ? -1.0 : 1.0;  // target enters the residual with +, others with -
            const double dcur = dist_[j][static_cast<std::size_t>(x[j] * c + xi[j])];
            int best_v = x[j];
            double best_obj = -std::numeric_limits<double>::infinity();
            for (int v = 0; v < c; ++v) {
                const double* cand = contrib_[j].data() + static_cast<std::size_t>(v) * q_;
                double loss = 0.0;
                for (std::size_t k = 0; k < q_; ++k) {
                    const double e = res[k] + sign * (cur[k] - cand[k]);
                    loss += e * e;
                }
                const double obj = 0.5 * loss - gamma_ * (trans - dcur + dist_[j][static_cast<std::size_t>(v * c + xi[j])]);
                ++evals;
                if (obj > best_obj) {
                    best_obj = obj;
                    best_v = v;
                }
            }
            if (best_v != x[j]) {
                const double* cand = contrib_[j].data() + static_cast<std::size_t>(best_v) * q_;
                for (std::size_t k = 0; k < q_; ++k) res[k] += sign * (cur[k] - cand[k]);
                trans += dist_[j][static_cast<std::size_t>(best_v * c + xi[j])] - dcur;
                x[j] = best_v;
            }
        }
        const double v = objective(x, xi);
        if (v > best.value) {
            best.state = x;
            best.value = v;
        }
    }
    best.transport = transport(best.state, xi);
    best.evaluations = evals;
    return best;
}

namespace {

std::uint64_t sample_seed(std::uint64_t seed, std::size_t row, std::uint64_t iteration) {
    return derive_seed({seed, static_cast<std::uint64_t>(row), iteration, 0x57a55ULL});
}

std::vector<WorstCase> solve_rows(const InnerSupremum& inner, const Dataset& data, std::span<const std::size_t> rows,
                                  InnerMethod method, std::size_t starts, std::uint64_t seed, std::uint64_t iteration) {
    std::vector<WorstCase> out;
    out.reserve(rows.size());
    for (auto i : rows) {
        if (method == InnerMethod::Exact) {
            out.push_back(inner.exact(data.row(i)));
        } else {
            Rng rng(sample_seed(seed, i, iteration));
            out.push_back(inner.greedy(data.row(i), starts, rng));
        }
    }
    return out;
}

std::vector<std::size_t> all_rows(std::size_t m) {
    std::vector<std::size_t> v(m);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

void check_layout(const WassDualState& s, const Dataset& data) {
    if (s.W.view.cardinalities() != data.cardinalities())
        throw UsageError("weight layout does not match the dataset cardinalities");
    if (!(s.gamma >= 0.0)) throw UsageError("gamma must be >= 0");
    if (!(s.epsilon >= 0.0)) throw UsageError("epsilon must be >= 0");
}

WassGradient gradient_rows(const WassDualState& state, const Dataset& data, std::span<const std::size_t> rows,
                           const std::vector<WorstCase>& wc, Encoding scheme) {
    const auto& view = state.W.view;
    const auto p = static_cast<Eigen::Index>(view.feature_width());
    const auto q = static_cast<Eigen::Index>(view.target_width());
    Eigen::MatrixXd XX = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd XY = Eigen::MatrixXd::Zero(p, q);
    Eigen::VectorXd x(p), y(q);
    double trans = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& s = wc[k].state;
        for (auto j : view.features()) encode_into(scheme, view.cardinalities()[j], s[j], x.data() + view.feature_offset(j));
        encode_into(scheme, view.cardinalities()[view.target()], s[view.target()], y.data());
        XX.noalias() += x * x.transpose();
        XY.noalias() += x * y.transpose();
        trans += wc[k].transport;
    }
    (void)data;
    const double m = static_cast<double>(rows.size());
    return {(XX * state.W.W - XY) / m, state.epsilon - trans / m};
}

}  // namespace

std::vector<WorstCase> worst_cases(const WassDualState& state, const Dataset& data, Encoding scheme, InnerMethod method,
                                   std::size_t starts, std::uint64_t seed, std::uint64_t iteration) {
    check_layout(state, data);
    InnerSupremum inner(state.W, state.gamma, scheme);
    if (starts == 0) starts = inner.full_starts();
    const auto rows = all_rows(data.rows());
    return solve_rows(inner, data, rows, method, starts, seed, iteration);
}

double wass_dual_objective(const WassDualState& state, const Dataset& data, Encoding scheme, InnerMethod method,
                           std::size_t starts, std::uint64_t seed, std::uint64_t iteration) {
    const auto wc = worst_cases(state, data, scheme, method, starts, seed, iteration);
    double s = 0.0;
    for (const auto& w : wc) s += w.value;
    return state.gamma * state.epsilon + s / static_cast<double>(wc.size());
}

double wass_frozen_objective(const WassDualState& state, const Dataset& data, const std::vector<WorstCase>& wc,
                             Encoding scheme) {
    check_layout(state, data);
    if (wc.size() != data.rows()) throw UsageError("one worst case per row is required");
    double s = 0.0;
    for (const auto& w : wc) s += squared_loss(state.W, w.state, scheme) - state.gamma * w.transport;
    return state.gamma * state.epsilon + s / static_cast<double>(wc.size());
}

WassGradient wass_subgradient(const WassDualState& state, const Dataset& data, const std::vector<WorstCase>& wc,
                              Encoding scheme) {
    check_layout(state, data);
    if (wc.size() != data.rows()) throw UsageError("one worst case per row is required");
    const auto rows = all_rows(data.rows());
    return gradient_rows(state, data, rows, wc, scheme);
}

double identity_gamma_bound(const WeightMatrix& W) {
    const double rho_n = static_cast<double>(W.view.full_width());
    return rho_n * (W.W.squaredNorm() + static_cast<double>(W.view.target_width()));
}

double prop1_equivalent_objective(const WeightMatrix& W, double epsilon, const Dataset& data, Encoding scheme) {
    return empirical_risk(W, data, scheme) + epsilon * identity_gamma_bound(W);
}

void AdamConfig::validate() const {
    if (!(lr > 0.0)) throw UsageError("learning rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("Adam betas must be in [0, 1)");
    if (batch == 0) throw UsageError("batch must be >= 1");
    if (inner_starts == 0) throw UsageError("inner starts must be >= 1");
    if (!(gamma0 >= 0.0)) throw UsageError("initial gamma must be >= 0");
}

WassResult wass_fit(const Dataset& data, std::size_t target, double epsilon0, const AdamConfig& opt, Encoding scheme,
                    std::uint64_t seed) {
    opt.validate();
    if (!(epsilon0 >= 0.0) || !std::isfinite(epsilon0)) throw UsageError("epsilon0 must be a finite value >= 0");
    const std::size_t m = data.rows();
    WassDualState st{WeightMatrix::zeros(EncodedView(data.cardinalities(), target)), opt.gamma0,
                     epsilon0 / static_cast<double>(m)};
    const auto rows = all_rows(m);
    const std::size_t batch = std::min(opt.batch, m);

    auto full_objective = [&](std::uint64_t it) {
        InnerSupremum inner(st.W, st.gamma, scheme);
        auto wc = solve_rows(inner, data, rows, opt.inner, opt.inner_starts, seed, 2 * it + 1);
        double s = 0.0;
        for (const auto& w : wc) s += w.value;
        return st.gamma * st.epsilon + s / static_cast<double>(m);
    };

    WassResult res{st.W, st.gamma, full_objective(0), 0, {}};
    const double initial = res.objective;
    res.history.push_back(initial);

    Eigen::MatrixXd mW = Eigen::MatrixXd::Zero(st.W.W.rows(), st.W.W.cols());
    Eigen::MatrixXd vW = mW;
    double mg = 0.0, vg = 0.0;
    std::size_t over = 0;
    Rng batch_rng(derive_seed({seed, 0xba7c4ULL}));

    for (std::size_t it = 1; it <= opt.iters; ++it) {
        std::vector<std::size_t> idx = batch == m ? rows : batch_rng.sample_without_replacement(m, batch);
        std::sort(idx.begin(), idx.end());
        InnerSupremum inner(st.W, st.gamma, scheme);
        const auto wc = solve_rows(inner, data, idx, opt.inner, opt.inner_starts, seed, 2 * it);
        const auto g = gradient_rows(st, data, idx, wc, scheme);

        const double b1t = 1.0 - std::pow(opt.beta1, static_cast<double>(it));
        const double b2t = 1.0 - std::pow(opt.beta2, static_cast<double>(it));
        mW = opt.beta1 * mW + (1.0 - opt.beta1) * g.dW;
        vW = opt.beta2 * vW + (1.0 - opt.beta2) * g.dW.cwiseAbs2();
        mg = opt.beta1 * mg + (1.0 - opt.beta1) * g.dgamma;
        vg = opt.beta2 * vg + (1.0 - opt.beta2) * g.dgamma * g.dgamma;
        st.W.W.array() -= opt.lr * (mW.array() / b1t) / ((vW.array() / b2t).sqrt() + opt.eps);
        st.gamma -= opt.lr * (mg / b1t) / (std::sqrt(vg / b2t) + opt.eps);
        st.gamma = std::max(st.gamma, 0.0);

        const double obj = full_objective(it);
        if (!std::isfinite(obj) || !st.W.W.allFinite())
            throw SolverError(fmt::format("wasserstein fit: non-finite objective at iteration {}", it));
        res.history.push_back(obj);
        if (obj < res.objective) {
            res.objective = obj;
            res.W = st.W;
            res.gamma = st.gamma;
            res.best_iteration = it;
        }
        over = obj > 10.0 * std::abs(initial) ? over + 1 : 0;
        if (over >= 20)
            throw SolverError(fmt::format(
                "wasserstein fit diverged: objective above 10x its initial value for 20 iterations (lr {})", opt.lr));
    }
    return res;
}

}  // namespace drsl
