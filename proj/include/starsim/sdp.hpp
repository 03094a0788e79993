#pragma once

#include <string>

#include "starsim/types.hpp"

namespace starsim {

enum class Sense { LessEq, GreaterEq, Eq };

struct SdpConstraint {
    MatC a;       // Hermitian L x L
    Sense sense = Sense::Eq;
    double b = 0.0;
};

/// minimize Tr(C * Y)  s.t.  Tr(A_i * Y) sense_i b_i,  Y >= 0 (PSD cone).
struct SdpProblem {
    int dim = 0;
    MatC objective;  // Hermitian L x L
    std::vector<SdpConstraint> constraints;
};

enum class SdpStatus { optimal, infeasible, max_iter };

struct SdpSolution {
    MatC Y;
    double objective_value = 0.0;
    SdpStatus status = SdpStatus::max_iter;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    double dual_objective = 0.0;
    int iterations = 0;
    std::vector<TraceRow> trace;  // objective / max residual / gap per iterate
};

/// Dense primal-dual interior-point solve (Mehrotra-style predictor-corrector,
/// HKM direction) working natively on the complex Hermitian cone. Inequalities
/// get scalar slacks; inputs are symmetrized as (M+M^H)/2 on ingestion.
SdpSolution solve_sdp(const SdpProblem& p, double tol = 1e-7, int max_iter = 200);

/// Debug dump: dimension header then row-major matrices, plain text.
void dump_sdp(const SdpProblem& p, const std::string& path);

}  // namespace starsim
