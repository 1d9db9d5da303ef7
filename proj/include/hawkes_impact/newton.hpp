#pragma once

#include "hawkes_impact/common.hpp"

#include <Eigen/Dense>

#include <functional>

namespace hawkes_impact {

/// Objective with analytic gradient and Hessian.
struct NewtonObjective {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<void(const Eigen::VectorXd&, double&, Eigen::VectorXd&, Eigen::MatrixXd&)> eval;
};

/// One Newton-Raphson step x - H^-1 g. The Hessian must be positive definite;
/// otherwise the step is rejected with the offending eigenvalue in the message.
/// For a linearly parameterized least-squares error one step from any start is
/// the global minimizer.
inline Eigen::VectorXd newton_step(const NewtonObjective& obj, const Eigen::VectorXd& x) {
    double value = 0.0;
    Eigen::VectorXd grad(x.size());
    Eigen::MatrixXd hess(x.size(), x.size());
    obj.eval(x, value, grad, hess);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw error("newton_step: Hessian not positive definite (min eigenvalue " +
                    std::to_string(es.eigenvalues().minCoeff()) + ")");
    return x - es.eigenvectors() *
                   (es.eigenvalues().cwiseInverse().asDiagonal() *
                    (es.eigenvectors().transpose() * grad));
}

struct NewtonOptions {
    double gradient_tol = 1e-8; // on |grad| relative to the error scale
    int max_iterations = 200;
    int max_halvings = 30;
};

struct NewtonOutcome {
    Eigen::VectorXd x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string note;
};

/// Damped Newton minimization; steps are halved while they fail to decrease
/// the objective. Fails (converged = false) on a non-PD Hessian at the start
/// or when halvings are exhausted.
inline NewtonOutcome newton_minimize(const NewtonObjective& obj, Eigen::VectorXd x,
                                     const NewtonOptions& opt = {}) {
    NewtonOutcome out;
    double value = 0.0;
    Eigen::VectorXd grad(x.size());
    Eigen::MatrixXd hess(x.size(), x.size());
    for (int it = 0; it < opt.max_iterations; ++it) {
        obj.eval(x, value, grad, hess);
        out.iterations = it;
        out.gradient_norm = grad.norm();
        if (out.gradient_norm <= opt.gradient_tol * std::max(1.0, std::abs(value))) {
            out.converged = true;
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            out.note = "non-positive-definite Hessian";
            break;
        }
        Eigen::VectorXd step = ldlt.solve(grad);
        double scale = 1.0;
        int halvings = 0;
        while (halvings <= opt.max_halvings) {
            Eigen::VectorXd cand = x - scale * step;
            if (obj.value(cand) <= value) {
                x = cand;
                break;
            }
            scale *= 0.5;
            ++halvings;
        }
        if (halvings > opt.max_halvings) {
            out.note = "line search exhausted";
            break;
        }
    }
    out.x = x;
    out.value = obj.value(x);
    return out;
}

} // namespace hawkes_impact
