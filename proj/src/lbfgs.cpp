#include "drsl/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <fmt/format.h>

#include "drsl/error.hpp"

namespace drsl {

LbfgsResult lbfgs_minimize(const Objective& fn, Eigen::VectorXd x0, const LbfgsConfig& config) {
    LbfgsResult res;
    res.x = std::move(x0);
    Eigen::VectorXd g(res.x.size());
    res.f = fn(res.x, g);
    if (!std::isfinite(res.f)) throw SolverError("lbfgs: non-finite objective at the starting point");

    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> rho;
    Eigen::VectorXd xn(res.x.size()), gn(res.x.size());
    const double initial = res.f;
    std::size_t over = 0;

    for (std::size_t it = 0; it < config.max_iters; ++it) {
        res.grad_norm = g.norm();
        if (res.grad_norm <= config.rel_tol * (1.0 + std::abs(res.f))) {
            res.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd d = -g;
        std::vector<double> alpha(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            alpha[k] = rho[k] * S[k].dot(d);
            d -= alpha[k] * Y[k];
        }
        if (!S.empty()) d *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double beta = rho[k] * Y[k].dot(d);
            d += (alpha[k] - beta) * S[k];
        }
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            // not a descent direction: restart from steepest descent
            S.clear();
            Y.clear();
            rho.clear();
            d = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        if (S.empty()) step = std::min(1.0, 1.0 / std::max(res.grad_norm, 1e-300));
        double fn_val = 0.0;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = res.x + step * d;
            fn_val = fn(xn, gn);
            if (std::isfinite(fn_val) && fn_val <= res.f + config.armijo * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        res.iterations = it + 1;
        if (!ok) {
            if (!S.empty()) {
                // stale curvature; retry from steepest descent next round
                S.clear();
                Y.clear();
                rho.clear();
                continue;
            }
            break;  // no decrease possible along -g at machine precision
        }

        const Eigen::VectorXd s = xn - res.x;
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            S.push_back(s);
            Y.push_back(y);
            rho.push_back(1.0 / sy);
            if (S.size() > config.memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        } else {
            ++res.rejected_pairs;
        }
        res.x = xn;
        g = gn;
        res.f = fn_val;
        over = res.f > config.divergence_factor * std::abs(initial) ? over + 1 : 0;
        if (over >= config.divergence_patience)
            throw SolverError(fmt::format("lbfgs: objective above {}x its initial value for {} iterations",
                                          config.divergence_factor, over));
    }
    res.grad_norm = g.norm();
    if (!std::isfinite(res.f)) throw SolverError("lbfgs: objective diverged");
    return res;
}

}  // namespace drsl
