#include "scopf/lbfgs.hpp"

#include <cmath>
#include <deque>

namespace scopf {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Box& box) {
    return x.cwiseMax(box.lower).cwiseMin(box.upper);
}

namespace {

struct Pair {
    Eigen::VectorXd s, y;
};

Eigen::VectorXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lo = x[i] <= box.lower[i] && g[i] > 0.0;
        const bool at_hi = x[i] >= box.upper[i] && g[i] < 0.0;
        if (at_lo || at_hi) m[i] = 0.0;
    }
    return m;
}

Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& g, const Eigen::VectorXd& mask) {
    Eigen::VectorXd q = g.cwiseProduct(mask);
    if (mem.empty()) return q;
    std::vector<double> alpha(mem.size()), rho(mem.size());
    std::vector<Eigen::VectorXd> s(mem.size()), y(mem.size());
    for (std::size_t i = 0; i < mem.size(); ++i) {
        s[i] = mem[i].s.cwiseProduct(mask);
        y[i] = mem[i].y.cwiseProduct(mask);
        const double sy = s[i].dot(y[i]);
        rho[i] = sy > 0.0 ? 1.0 / sy : 0.0;
    }
    for (std::size_t j = mem.size(); j-- > 0;) {
        alpha[j] = rho[j] * s[j].dot(q);
        q -= alpha[j] * y[j];
    }
    const double yy = y.back().squaredNorm();
    const double gamma = (rho.back() > 0.0 && yy > 0.0) ? 1.0 / (rho.back() * yy) : 1.0;
    Eigen::VectorXd r = gamma * q;
    for (std::size_t j = 0; j < mem.size(); ++j) {
        const double beta = rho[j] * y[j].dot(r);
        r += (alpha[j] - beta) * s[j];
    }
    return r.cwiseProduct(mask);
}

bool past(const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    return deadline && std::chrono::steady_clock::now() >= *deadline;
}

}  // namespace

LbfgsResult minimize_box(const Objective& fg, const Eigen::VectorXd& x0, const Box& box, const LbfgsOptions& options) {
    LbfgsResult res;
    Eigen::VectorXd x = project(x0, box);
    Eigen::VectorXd g(x.size());
    double f = fg(x, g);
    res.evaluations = 1;
    std::deque<Pair> mem;
    int stalled = 0;

    for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
        if (x.size() == 0) {
            res.stop = LbfgsStop::Converged;
            break;
        }
        const Eigen::VectorXd pg = project(x - g, box) - x;
        if (pg.lpNorm<Eigen::Infinity>() <= options.pg_tol) {
            res.stop = LbfgsStop::Converged;
            break;
        }
        if (past(options.deadline)) {
            res.stop = LbfgsStop::Deadline;
            break;
        }
        const Eigen::VectorXd mask = free_mask(x, g, box);
        Eigen::VectorXd d = -two_loop(mem, g, mask);
        if (!(g.dot(d) < 0.0) || !d.allFinite()) {
            mem.clear();
            d = -g.cwiseProduct(mask);
        }

        double alpha = 1.0;
        if (mem.empty()) alpha = std::min(1.0, 1.0 / std::max(1e-300, d.lpNorm<Eigen::Infinity>()));
        bool accepted = false;
        Eigen::VectorXd x_new, g_new(x.size());
        double f_new = f;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            for (int b = 0; b < options.max_backtracks; ++b, alpha *= 0.5) {
                x_new = project(x + alpha * d, box);
                f_new = fg(x_new, g_new);
                ++res.evaluations;
                if (std::isfinite(f_new) && f_new <= f + options.armijo * g.dot(x_new - x)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && !mem.empty()) {
                // retry from steepest descent with a fresh memory
                mem.clear();
                d = -g.cwiseProduct(mask);
                alpha = std::min(1.0, 1.0 / std::max(1e-300, d.lpNorm<Eigen::Infinity>()));
            } else {
                break;
            }
        }
        if (!accepted) {
            res.stop = LbfgsStop::LineSearch;
            break;
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            mem.push_back({s, y});
            if (static_cast<int>(mem.size()) > options.memory) mem.pop_front();
        }
        const double decrease = f - f_new;
        x = std::move(x_new);
        g = g_new;
        f = f_new;
        stalled = decrease <= options.f_rel_tol * std::max(1.0, std::abs(f)) ? stalled + 1 : 0;
        if (stalled >= options.stall_iters) {
            res.stop = LbfgsStop::Stalled;
            ++res.iterations;
            break;
        }
    }
    res.x = std::move(x);
    res.f = f;
    return res;
}

}  // namespace scopf
