#include "drsl/kl.hpp"

#include <cmath>
#include <fmt/format.h>

#include "drsl/error.hpp"

namespace drsl {

namespace {

struct Terms {
    Eigen::MatrixXd R;   // residuals Y - XW
    Eigen::VectorXd a;   // ℓ_i / γ
    double amax = 0.0;
    double lme = 0.0;    // ln mean e^{a}
    Eigen::VectorXd p;   // softmax weights
};

Terms terms(const Eigen::MatrixXd& W, double gamma, const EncodedProblem& pr) {
    if (!(gamma >= kGammaFloor)) throw UsageError(fmt::format("gamma {} is below the floor {}", gamma, kGammaFloor));
    if (W.rows() != pr.X.cols() || W.cols() != pr.Y.cols()) throw UsageError("KL dual: weight shape mismatch");
    Terms t;
    t.R = pr.Y - pr.X * W;
    t.a = 0.5 * t.R.rowwise().squaredNorm() / gamma;
    t.amax = t.a.maxCoeff();
    const Eigen::ArrayXd ex = (t.a.array() - t.amax).exp();
    const double s = ex.sum();
    t.lme = t.amax + std::log(s / static_cast<double>(pr.rows()));
    t.p = ex.matrix() / s;
    return t;
}

}  // namespace

double kl_dual_objective(const KlDualState& state, const EncodedProblem& problem) {
    const auto t = terms(state.W.W, state.gamma, problem);
    return state.gamma * t.lme + state.gamma * state.epsilon;
}

double kl_dual_objective(const KlDualState& state, const Dataset& data, Encoding scheme) {
    return kl_dual_objective(state, encode_problem(data, state.W.view.target(), scheme));
}

KlGradient kl_gradient(const KlDualState& state, const EncodedProblem& problem) {
    const auto t = terms(state.W.W, state.gamma, problem);
    KlGradient g;
    g.dW = -(problem.X.transpose() * (t.p.asDiagonal() * t.R));
    g.dgamma = t.lme - t.p.dot(t.a) + state.epsilon;
    return g;
}

KlGradient kl_gradient(const KlDualState& state, const Dataset& data, Encoding scheme) {
    return kl_gradient(state, encode_problem(data, state.W.view.target(), scheme));
}

Eigen::VectorXd kl_weights(const KlDualState& state, const EncodedProblem& problem) {
    return terms(state.W.W, state.gamma, problem).p;
}

namespace {

double softplus(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
double softplus_inv(double y) { return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y)); }

}  // namespace

KlResult kl_fit(const Dataset& data, std::size_t target, double epsilon0, Encoding scheme, const LbfgsConfig& config,
                double gamma0) {
    if (!(epsilon0 >= 0.0) || !std::isfinite(epsilon0)) throw UsageError("epsilon0 must be a finite value >= 0");
    if (!(gamma0 > kGammaFloor)) throw UsageError("initial gamma must exceed the floor");
    const auto pr = encode_problem(data, target, scheme);
    const double eps = epsilon0 / static_cast<double>(pr.rows());
    const auto P = pr.X.cols(), Q = pr.Y.cols();
    const Eigen::Index nw = P * Q;

    auto fn = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
        const Eigen::Map<const Eigen::MatrixXd> W(z.data(), P, Q);
        const double theta = z[nw];
        const double gamma = kGammaFloor + softplus(theta);
        const auto t = terms(W, gamma, pr);
        g.head(nw) = Eigen::Map<const Eigen::VectorXd>(
            Eigen::MatrixXd(-(pr.X.transpose() * (t.p.asDiagonal() * t.R))).data(), nw);
        g[nw] = (t.lme - t.p.dot(t.a) + eps) * sigmoid(theta);
        return gamma * t.lme + gamma * eps;
    };

    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(nw + 1);
    z0[nw] = softplus_inv(gamma0 - kGammaFloor);
    const auto r = lbfgs_minimize(fn, z0, config);

    KlResult out;
    out.W = WeightMatrix::zeros(pr.view);
    out.W.W = Eigen::Map<const Eigen::MatrixXd>(r.x.data(), P, Q);
    out.gamma = kGammaFloor + softplus(r.x[nw]);
    out.objective = r.f;
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

}  // namespace drsl
