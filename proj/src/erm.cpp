#include "drsl/erm.hpp"

#include <cmath>
#include <fmt/format.h>

#include "drsl/error.hpp"

namespace drsl {

void ErmConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be a finite value >= 0");
    if (!(tol > 0.0)) throw UsageError("tol must be > 0");
}

double erm_objective(const WeightMatrix& W, const Dataset& data, double lambda, Encoding scheme) {
    return empirical_risk(W, data, scheme) + lambda * W.group_norm();
}

double erm_objective(const WeightMatrix& W, const Moments& mom, double lambda) {
    return moment_risk(W, mom) + lambda * W.group_norm();
}

WeightMatrix prox_block_l21(const WeightMatrix& W, double t) {
    WeightMatrix out = W;
    for (auto j : W.view.features()) {
        auto b = out.block(j);
        const double nrm = b.norm();
        if (nrm <= t) {
            b.setZero();
        } else {
            b *= 1.0 - t / nrm;
        }
    }
    return out;
}

namespace {

double smooth(const Eigen::MatrixXd& W, const Moments& mom) {
    return 0.5 * ((W.transpose() * mom.H * W).trace() - 2.0 * (W.transpose() * mom.C).trace() + mom.Syy);
}

}  // namespace

ErmResult erm_fit(const Moments& mom, const ErmConfig& config, const WeightMatrix* init) {
    config.validate();
    const double lam = config.lambda;
    ErmResult res{init ? *init : WeightMatrix::zeros(mom.view)};
    auto& x = res.W;
    if (x.W.rows() != mom.H.rows() || x.W.cols() != mom.C.cols()) throw UsageError("erm_fit: init has wrong shape");

    const double lip = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mom.H, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .maxCoeff(),
                                1e-12);
    double step = config.step == StepRule::Fixed ? 1.0 / lip : 1.0;

    auto F = [&](const WeightMatrix& w) { return smooth(w.W, mom) + lam * w.group_norm(); };
    double fx = F(x);
    WeightMatrix y = x;  // extrapolation point
    double t = 1.0;

    for (std::size_t it = 0; it < config.max_iters; ++it) {
        const double fy = smooth(y.W, mom);
        const Eigen::MatrixXd gy = mom.H * y.W - mom.C;
        WeightMatrix z;
        for (;;) {
            WeightMatrix trial{y.view, y.W - step * gy};
            z = prox_block_l21(trial, step * lam);
            if (config.step == StepRule::Fixed) break;
            const Eigen::MatrixXd d = z.W - y.W;
            const double upper = fy + (gy.array() * d.array()).sum() + d.squaredNorm() / (2.0 * step);
            if (smooth(z.W, mom) <= upper + 1e-12 * std::abs(upper)) break;
            step *= 0.5;
            if (step < 1e-20) throw SolverError(fmt::format("erm_fit: backtracking collapsed (step {:.3e})", step));
        }
        const double fz = F(z);
        if (!std::isfinite(fz)) throw SolverError(fmt::format("erm_fit: objective diverged at step size {:.3e}", step));

        // monotone variant: only accept z when it does not increase the objective
        const WeightMatrix prev = x;
        const bool accept = fz <= fx;
        if (accept) {
            x = z;
            fx = fz;
        }
        if (config.accelerate) {
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y.W = x.W + (t / tn) * (z.W - x.W) + ((t - 1.0) / tn) * (x.W - prev.W);
            t = tn;
        } else {
            y = x;
        }
        if (config.record_history) res.history.push_back(fx);
        res.iterations = it + 1;

        // stationarity residual at the current iterate
        const Eigen::MatrixXd gx = mom.H * x.W - mom.C;
        WeightMatrix probe = prox_block_l21(WeightMatrix{x.view, x.W - step * gx}, step * lam);
        res.residual = (x.W - probe.W).norm();
        if (res.residual <= config.tol) {
            res.converged = true;
            break;
        }
    }
    res.objective = fx;
    return res;
}

ErmResult erm_fit(const Dataset& data, std::size_t target, const ErmConfig& config, Encoding scheme) {
    const auto mom = compute_moments(empirical_distribution(data), target, scheme);
    return erm_fit(mom, config);
}

}  // namespace drsl
