#pragma once

// Loss family. Differentiable forms operate on autograd Vars; the numeric
// helpers evaluate the same quantities on plain matrices.
//
// Per sample, with unit q, q' and center Ce:
//   l_inv   = 2 - q.Ce - q'.Ce          in [0, 4]
//   l_oe    = 2 + q.Ce + q'.Ce = 4 - l_inv
//   s_train = l_inv - l_oe = 2 l_inv - 4
//   joint   = mean(mu y l_oe + (1 - y) l_inv)
//   var(Q)  = mean_d max(0, zeta - sqrt(Var_d(Q) + eps))

#include "roca/autograd.hpp"
#include "roca/config.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace roca {

using ag::ColVector;
using ag::Matrix;
using ag::RowVector;
using ag::Var;

/// Inputs that break the unit-norm contract.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr double kUnitTolerance = 1e-5;

/// Throws ContractError unless every row has norm 1 within `tol`.
void require_unit_rows(const Matrix& m, const char* what, double tol = kUnitTolerance);

// Numeric forms.
ColVector invariance_values(const Matrix& q, const Matrix& qp, const RowVector& center);
ColVector oe_values(const Matrix& q, const Matrix& qp, const RowVector& center);
ColVector training_scores(const ColVector& l_inv);
double joint_value(const ColVector& l_inv, const std::vector<std::uint8_t>& y, double mu);
double variance_value(const Matrix& x, double zeta, double eps);
double soft_boundary_value(const ColVector& s, double r);

// Differentiable forms. The center is a constant (no gradient).
Var invariance_term(const Var& q, const Var& qp, const RowVector& center);  // N x 1
Var oe_term(const Var& q, const Var& qp, const RowVector& center);          // N x 1
Var joint_loss(const Var& l_inv, const std::vector<std::uint8_t>& y, double mu);
Var variance_term(const Var& x, double zeta, double eps);
Var soft_boundary_term(const Var& s_train, double r);

struct LossReport {
    ColVector l_inv;
    ColVector l_oe;
    ColVector s_train;
    double l_var_q = 0.0;
    double l_var_qp = 0.0;
    double l_joint = 0.0;
    double total = 0.0;
    std::vector<std::uint8_t> labels_used;
};

struct LossInputs {
    Var q;        // unit rows
    Var qp;       // unit rows
    Var raw_q;    // pre-normalization projector output (variance term)
    Var raw_qp;
    RowVector center;
    std::vector<std::uint8_t> labels;  // ROCA / ROCA_NOV; empty means all 0
};

struct LossResult {
    Var total;
    LossReport report;
};

/// ROCA:     joint + lambda/2 (var(Q) + var(Q'))
/// COCA:     mean l_inv + lambda/2 (var(Q) + var(Q'))
/// ROCA_NOV: joint
/// COCAS:    soft_boundary(s_train, r) + lambda/2 (var(Q) + var(Q'))
LossResult total_loss(const VariantId& variant, const LossInputs& inputs, const TrainConfig& config);

struct BoundProbe {
    double alpha = 0.0;  // angle(q, Ce)
    double beta = 0.0;   // angle(q', Ce)
    double gamma = 0.0;  // angle(q, q')
    double theta = 0.0;  // dihedral angle between planes Ce-O-q and Ce-O-q'; 0 when undefined
    double l_q_ce = 0.0;
    double l_qp_ce = 0.0;
    double l_q_qp = 0.0;
    double l_inv = 0.0;
    double one_plus_l_sim = 0.0;  // 1 - sim(q, q')
    bool chord_inequality = false;
    bool angle_inequality = false;
};

BoundProbe bound_probe(const RowVector& q, const RowVector& qp, const RowVector& center);

/// Chord length between unit vectors with the given cosine.
double chord(double cosine);

}  // namespace roca
