#include "drsl/lossmoments.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <limits>

#include "drsl/error.hpp"

namespace drsl {

namespace {

constexpr double kEigenFloor = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd encode_vec(Encoding scheme, const EncodedView& view, std::span<const int> row, bool target) {
    if (target) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(view.target_width()));
        encode_into(scheme, view.cardinalities()[view.target()], row[view.target()], y.data());
        return y;
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(view.feature_width()));
    for (auto j : view.features()) encode_into(scheme, view.cardinalities()[j], row[j], x.data() + view.feature_offset(j));
    return x;
}

std::vector<Eigen::Index> support_indices(const EncodedView& view, std::span<const std::size_t> support) {
    std::vector<Eigen::Index> idx;
    for (auto j : support)
        for (std::size_t k = 0; k < view.width(j); ++k) idx.push_back(static_cast<Eigen::Index>(view.feature_offset(j) + k));
    return idx;
}

void check_support(const EncodedView& view, std::span<const std::size_t> support) {
    for (std::size_t a = 0; a < support.size(); ++a) {
        if (support[a] >= view.nodes() || support[a] == view.target())
            throw UsageError(fmt::format("support node {} is out of range or the target", support[a]));
        for (std::size_t b = 0; b < a; ++b)
            if (support[a] == support[b]) throw UsageError("support has duplicate nodes");
    }
}

}  // namespace

WeightMatrix WeightMatrix::zeros(const EncodedView& view) {
    return {view, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(view.feature_width()),
                                        static_cast<Eigen::Index>(view.target_width()))};
}

double WeightMatrix::group_norm() const {
    double s = 0.0;
    for (auto j : view.features()) s += block_norm(j);
    return s;
}

double squared_loss(const WeightMatrix& W, std::span<const int> row, Encoding scheme) {
    if (row.size() != W.view.nodes()) throw UsageError("squared_loss: row width does not match the weight layout");
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] < 0 || row[j] >= W.view.cardinalities()[j]) throw DataError("squared_loss: category out of range");
    const Eigen::VectorXd e = encode_vec(scheme, W.view, row, true) - W.W.transpose() * encode_vec(scheme, W.view, row, false);
    return 0.5 * e.squaredNorm();
}

double empirical_risk(const WeightMatrix& W, const EncodedProblem& problem) {
    if (W.W.rows() != problem.X.cols() || W.W.cols() != problem.Y.cols())
        throw UsageError("empirical_risk: weight dimensions do not match the problem");
    const Eigen::MatrixXd R = problem.Y - problem.X * W.W;
    return 0.5 * R.rowwise().squaredNorm().mean();
}

double empirical_risk(const WeightMatrix& W, const Dataset& data, Encoding scheme) {
    return empirical_risk(W, encode_problem(data, W.view.target(), scheme));
}

Eigen::MatrixXd risk_gradient(const WeightMatrix& W, const EncodedProblem& problem) {
    const double m = static_cast<double>(problem.rows());
    return (problem.X.transpose() * (problem.X * W.W - problem.Y)) / m;
}

Eigen::MatrixXd cross_moment(const Dataset& data, std::size_t target, Encoding scheme) {
    const auto p = encode_problem(data, target, scheme);
    return (p.X.transpose() * p.X) / static_cast<double>(p.rows());
}

StateDistribution empirical_distribution(const Dataset& data) {
    StateDistribution d{data.cardinalities(), data.names(), data.values(),
                        std::vector<double>(data.rows(), 1.0 / static_cast<double>(data.rows()))};
    return d;
}

StateDistribution exact_distribution(const DiscreteBayesNet& net) {
    const auto cards = net.cardinalities();
    double total = 1.0;
    for (int c : cards) total *= c;
    if (total > 1e6) throw UsageError(fmt::format("exact enumeration needs {} states (limit 1e6)", total));
    StateDistribution d{cards, net.names(), {}, {}};
    std::vector<int> state(cards.size(), 0);
    for (;;) {
        const double p = net.joint_probability(state);
        if (p > 0.0) {
            d.states.insert(d.states.end(), state.begin(), state.end());
            d.weights.push_back(p);
        }
        // odometer, last coordinate fastest
        std::size_t j = cards.size();
        while (j > 0) {
            --j;
            if (++state[j] < cards[j]) break;
            state[j] = 0;
            if (j == 0) return d;
        }
    }
}

Moments compute_moments(const StateDistribution& dist, std::size_t target, Encoding scheme) {
    Moments mom;
    mom.view = EncodedView(dist.cardinalities, target);
    mom.scheme = scheme;
    const auto p = static_cast<Eigen::Index>(mom.view.feature_width());
    const auto q = static_cast<Eigen::Index>(mom.view.target_width());
    mom.H = Eigen::MatrixXd::Zero(p, p);
    mom.C = Eigen::MatrixXd::Zero(p, q);
    for (std::size_t k = 0; k < dist.size(); ++k) {
        const auto s = dist.state(k);
        const Eigen::VectorXd x = encode_vec(scheme, mom.view, s, false);
        const Eigen::VectorXd y = encode_vec(scheme, mom.view, s, true);
        const double w = dist.weights[k];
        mom.H.noalias() += w * x * x.transpose();
        mom.C.noalias() += w * x * y.transpose();
        mom.Syy += w * y.squaredNorm();
    }
    return mom;
}

double moment_risk(const WeightMatrix& W, const Moments& mom) {
    const auto& M = W.W;
    return 0.5 * ((M.transpose() * mom.H * M).trace() - 2.0 * (M.transpose() * mom.C).trace() + mom.Syy);
}

WeightMatrix solve_surrogate(const Moments& mom, std::span<const std::size_t> support) {
    check_support(mom.view, support);
    auto W = WeightMatrix::zeros(mom.view);
    if (support.empty()) return W;
    const auto idx = support_indices(mom.view, support);
    const Eigen::MatrixXd Hss = mom.H(idx, idx);
    const Eigen::MatrixXd Cs = mom.C(idx, Eigen::placeholders::all);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hss);
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > kEigenFloor))
        throw SolverError(fmt::format("singular Hessian on the support: lambda_min = {:.3e}", lmin));
    const Eigen::MatrixXd V = eig.eigenvectors();
    const Eigen::MatrixXd sol = V * (eig.eigenvalues().cwiseInverse().asDiagonal() * (V.transpose() * Cs));
    W.W(idx, Eigen::placeholders::all) = sol;
    return W;
}

DiagnosticsReport diagnostics(const StateDistribution& dist, std::size_t target, const WeightMatrix& W,
                              std::span<const std::size_t> support, Encoding scheme) {
    const auto mom = compute_moments(dist, target, scheme);
    check_support(mom.view, support);
    if (W.W.rows() != mom.H.rows() || W.W.cols() != mom.C.cols())
        throw UsageError("diagnostics: reference weights do not match the layout");
    DiagnosticsReport rep;
    rep.node = dist.names[target];
    for (auto j : support) rep.support.push_back(dist.names[j]);

    if (support.empty()) {
        rep.lambda_min = kInf;
        rep.incoherence = 0.0;
        rep.beta_min = kInf;
    } else {
        const auto idx = support_indices(mom.view, support);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mom.H(idx, idx));
        rep.lambda_min = eig.eigenvalues().minCoeff();
        rep.singular = !(rep.lambda_min > kEigenFloor);
        std::vector<std::size_t> complement;
        for (auto j : mom.view.features())
            if (std::find(support.begin(), support.end(), j) == support.end()) complement.push_back(j);
        if (complement.empty()) {
            rep.incoherence = 0.0;
        } else if (rep.singular) {
            rep.incoherence = kInf;
        } else {
            const Eigen::MatrixXd V = eig.eigenvectors();
            const Eigen::MatrixXd inv = V * eig.eigenvalues().cwiseInverse().asDiagonal() * V.transpose();
            const auto cidx = support_indices(mom.view, complement);
            const Eigen::MatrixXd A = mom.H(cidx, idx) * inv;
            double worst = 0.0;
            Eigen::Index row = 0;
            for (auto j : complement) {
                const auto w = static_cast<Eigen::Index>(mom.view.width(j));
                worst = std::max(worst, A.middleRows(row, w).cwiseAbs().sum());
                row += w;
            }
            rep.incoherence = worst;
        }
        rep.beta_min = kInf;
        for (auto j : support) rep.beta_min = std::min(rep.beta_min, W.block_norm(j));
    }
    rep.alpha = 1.0 - rep.incoherence;

    Eigen::VectorXd mean_abs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mom.view.target_width()));
    double sigma = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        const auto s = dist.state(k);
        const Eigen::VectorXd e =
            encode_vec(scheme, mom.view, s, true) - W.W.transpose() * encode_vec(scheme, mom.view, s, false);
        sigma = std::max(sigma, e.cwiseAbs().maxCoeff());
        mean_abs += dist.weights[k] * e.cwiseAbs();
    }
    rep.sigma_hat = sigma;
    rep.mu_hat = mean_abs.maxCoeff();
    return rep;
}

namespace {

nlohmann::ordered_json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

double denum(const nlohmann::ordered_json& v) { return v.is_null() ? kInf : v.get<double>(); }

}  // namespace

std::string diagnostics_to_json(const std::vector<DiagnosticsReport>& reports) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& r : reports) {
        doc[r.node] = {{"support", r.support},     {"lambda_min", num(r.lambda_min)},
                       {"incoherence", num(r.incoherence)}, {"alpha", num(r.alpha)},
                       {"beta_min", num(r.beta_min)},       {"sigma_hat", num(r.sigma_hat)},
                       {"mu_hat", num(r.mu_hat)},           {"singular", r.singular}};
    }
    return doc.dump(1) + "\n";
}

std::vector<DiagnosticsReport> diagnostics_from_json(const std::string& text) {
    std::vector<DiagnosticsReport> out;
    try {
        const auto doc = nlohmann::ordered_json::parse(text);
        for (const auto& [name, v] : doc.items()) {
            if (name == "_meta") continue;
            DiagnosticsReport r;
            r.node = name;
            r.support = v.at("support").get<std::vector<std::string>>();
            r.lambda_min = denum(v.at("lambda_min"));
            r.incoherence = denum(v.at("incoherence"));
            r.alpha = v.at("alpha").is_null() ? -kInf : v.at("alpha").get<double>();
            r.beta_min = denum(v.at("beta_min"));
            r.sigma_hat = denum(v.at("sigma_hat"));
            r.mu_hat = denum(v.at("mu_hat"));
            r.singular = v.at("singular").get<bool>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("diagnostics JSON: {}", e.what()));
    }
    return out;
}

}  // namespace drsl
