#include "anthrofit/solver.hpp"

#include "anthrofit/errors.hpp"

#include <cmath>
#include <deque>

namespace anthrofit {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::gradient: return "gradient";
        case StopReason::relative_energy: return "relative-energy";
        case StopReason::iteration_cap: return "iteration-cap";
        case StopReason::non_finite: return "non-finite";
    }
    return "?";
}

namespace {

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

struct Trial {
    double t = 0.0;
    double f = 0.0;
    double df = 0.0;  // directional derivative g . d
    Eigen::VectorXd x;
    Eigen::VectorXd g;
    bool finite = false;
};

struct LineSearch {
    const Objective& objective;
    const Eigen::VectorXd& x0;
    const Eigen::VectorXd& d;

    Trial at(double t) const {
        Trial trial;
        trial.t = t;
        trial.x = x0 + t * d;
        const double f = objective(trial.x, trial.g);
        trial.f = f;
        trial.finite = std::isfinite(f) && trial.g.allFinite();
        trial.df = trial.finite ? trial.g.dot(d) : 0.0;
        return trial;
    }
};

// Bracket-and-zoom strong Wolfe search. Falls back to the best decreasing
// trial when no Wolfe point is reachable; found == false means no decrease
// at all. saw_non_finite records whether any trial left the finite region,
// so the caller can tell a broken landscape from a plain stall.
bool wolfe_search(const LineSearch& ls, double f0, double df0, double t_first, Trial& out,
                  bool& saw_non_finite) {
    Trial best;  // best strictly-decreasing trial seen
    auto consider = [&](const Trial& trial) {
        if (!trial.finite) saw_non_finite = true;
        if (trial.finite && trial.f < f0 && (!best.finite || trial.f < best.f)) best = trial;
    };
    auto wolfe_ok = [&](const Trial& trial) {
        return trial.finite && trial.f <= f0 + kC1 * trial.t * df0 && std::abs(trial.df) <= -kC2 * df0;
    };

    Trial lo;  // lower bracket endpoint; t=0 data
    lo.t = 0.0;
    lo.f = f0;
    lo.df = df0;
    lo.finite = true;

    Trial prev = lo;
    double t = t_first;
    Trial hi;
    bool bracketed = false;
    for (int i = 0; i < 30 && !bracketed; ++i) {
        Trial cur = ls.at(t);
        consider(cur);
        if (!cur.finite || cur.f > f0 + kC1 * t * df0 || (i > 0 && cur.f >= prev.f)) {
            lo = prev;
            hi = cur;
            bracketed = true;
            break;
        }
        if (wolfe_ok(cur)) {
            out = cur;
            return true;
        }
        if (cur.df >= 0.0) {
            lo = cur;
            hi = prev;
            bracketed = true;
            break;
        }
        prev = cur;
        t *= 2.0;
    }
    if (!bracketed) {
        if (best.finite) {
            out = best;
            return true;
        }
        return false;
    }

    for (int i = 0; i < 40; ++i) {
        const double t_mid = 0.5 * (lo.t + hi.t);
        if (t_mid == lo.t || t_mid == hi.t) break;  // interval exhausted
        Trial cur = ls.at(t_mid);
        consider(cur);
        if (!cur.finite || cur.f > f0 + kC1 * t_mid * df0 || cur.f >= lo.f) {
            hi = cur;
        } else {
            if (wolfe_ok(cur)) {
                out = cur;
                return true;
            }
            if (cur.df * (hi.t - lo.t) >= 0.0) hi = lo;
            lo = cur;
        }
    }
    if (best.finite) {
        out = best;
        return true;
    }
    return false;
}

}  // namespace

SolveReport minimize(const Objective& objective, const Eigen::VectorXd& x0, const SolveConfig& config) {
    if (config.max_iterations <= 0 || config.gradient_tolerance <= 0.0 ||
        config.relative_energy_tolerance <= 0.0 || config.history_size <= 0)
        throw InputError("solver configuration values must be positive");

    SolveReport report;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g;
    double f = objective(x, g);
    if (!std::isfinite(f) || !g.allFinite())
        throw NumericalError("objective is not finite at the starting point");

    report.energy_trace.push_back(f);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y)

    auto finish = [&](StopReason reason, bool ok) {
        report.x = x;
        report.energy = f;
        report.gradient_norm = g.norm();
        report.reason = reason;
        report.ok = ok;
        return report;
    };

    if (g.norm() < config.gradient_tolerance) return finish(StopReason::gradient, true);

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        // two-loop recursion
        Eigen::VectorXd d = -g;
        if (!history.empty()) {
            std::vector<double> alpha(history.size());
            std::vector<double> rho(history.size());
            for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
                const auto& [s, y] = history[i];
                rho[i] = 1.0 / y.dot(s);
                alpha[i] = rho[i] * s.dot(d);
                d -= alpha[i] * y;
            }
            const auto& [s_last, y_last] = history.back();
            d *= s_last.dot(y_last) / y_last.dot(y_last);
            for (size_t i = 0; i < history.size(); ++i) {
                const auto& [s, y] = history[i];
                const double beta = rho[i] * y.dot(d);
                d += (alpha[i] - beta) * s;
            }
        }
        double df0 = g.dot(d);
        if (df0 >= 0.0) {  // not a descent direction; restart from steepest descent
            history.clear();
            d = -g;
            df0 = g.dot(d);
        }

        const double t_first = history.empty() ? 1.0 / std::max(1.0, g.norm()) : 1.0;
        LineSearch ls{objective, x, d};
        Trial step;
        bool saw_non_finite = false;
        if (!wolfe_search(ls, f, df0, t_first, step, saw_non_finite)) {
            // No decreasing step exists along this direction. Blame the
            // objective when the search ran into non-finite values, otherwise
            // treat it as converged-to-resolution.
            if (saw_non_finite) return finish(StopReason::non_finite, false);
            return finish(StopReason::relative_energy, true);
        }

        Eigen::VectorXd s = step.x - x;
        Eigen::VectorXd y = step.g - g;
        const double prev_f = f;
        x = step.x;
        g = step.g;
        f = step.f;
        report.energy_trace.push_back(f);
        report.iterations = iter + 1;

        if (g.norm() < config.gradient_tolerance) return finish(StopReason::gradient, true);
        const double denom = std::max({std::abs(prev_f), std::abs(f), 1.0});
        if ((prev_f - f) / denom < config.relative_energy_tolerance)
            return finish(StopReason::relative_energy, true);

        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            history.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(history.size()) > config.history_size) history.pop_front();
        }
    }
    return finish(StopReason::iteration_cap, true);
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double h) {
    if (h <= 0.0) throw InputError("finite-difference step must be positive");
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace anthrofit
