#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace starsim {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using RowVecC = Eigen::RowVectorXcd;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

/// One row of a solver convergence trace.
struct TraceRow {
    int iter = 0;
    double objective = 0.0;
    double residual = 0.0;
    double aux = 0.0;  // solver-specific (lambda, step size, ...)
};

struct SolveReport {
    std::string solver;
    int iterations = 0;
    std::string termination;  // "converged", "max_iter", "infeasible", ...
    bool feasible = true;
    double final_objective = 0.0;
    double constraint_residual = 0.0;
    std::vector<TraceRow> trace;
};

}  // namespace starsim
