#include "roca/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roca {

namespace {

void require_labels(const std::vector<std::uint8_t>& y, Eigen::Index n) {
    if (!y.empty() && static_cast<Eigen::Index>(y.size()) != n) {
        throw std::invalid_argument("label vector length " + std::to_string(y.size()) + " does not match batch " +
                                    std::to_string(n));
    }
}

ColVector label_column(const std::vector<std::uint8_t>& y, Eigen::Index n) {
    ColVector col = ColVector::Zero(n);
    for (std::size_t i = 0; i < y.size(); ++i) col(static_cast<Eigen::Index>(i)) = y[i] ? 1.0 : 0.0;
    return col;
}

void require_unit_center(const RowVector& c) {
    if (std::abs(c.norm() - 1.0) > kUnitTolerance) {
        throw ContractError("center has norm " + std::to_string(c.norm()) + ", expected 1");
    }
}

}  // namespace

void require_unit_rows(const Matrix& m, const char* what, double tol) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double n = m.row(i).norm();
        if (!(std::abs(n - 1.0) <= tol)) {
            throw ContractError(std::string(what) + " row " + std::to_string(i) + " has norm " + std::to_string(n) +
                                ", expected 1");
        }
    }
}

ColVector invariance_values(const Matrix& q, const Matrix& qp, const RowVector& center) {
    require_unit_rows(q, "q");
    require_unit_rows(qp, "q'");
    require_unit_center(center);
    return (2.0 - (q * center.transpose()).array() - (qp * center.transpose()).array()).matrix();
}

ColVector oe_values(const Matrix& q, const Matrix& qp, const RowVector& center) {
    require_unit_rows(q, "q");
    require_unit_rows(qp, "q'");
    require_unit_center(center);
    return (2.0 + (q * center.transpose()).array() + (qp * center.transpose()).array()).matrix();
}

ColVector training_scores(const ColVector& l_inv) { return (2.0 * l_inv.array() - 4.0).matrix(); }

double joint_value(const ColVector& l_inv, const std::vector<std::uint8_t>& y, double mu) {
    require_labels(y, l_inv.size());
    const ColVector yc = label_column(y, l_inv.size());
    const ColVector terms = mu * yc.array() * (4.0 - l_inv.array()) + (1.0 - yc.array()) * l_inv.array();
    return terms.mean();
}

double variance_value(const Matrix& x, double zeta, double eps) {
    const Eigen::Index n = x.rows();
    RowVector var = RowVector::Zero(x.cols());
    if (n > 1) {
        const RowVector mu = x.colwise().mean();
        var = (x.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(n - 1);
    }
    return (zeta - (var.array() + eps).sqrt()).max(0.0).mean();
}

double soft_boundary_value(const ColVector& s, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("soft boundary r must lie in (0, 1]");
    const auto n = s.size();
    if (n < 1) throw std::invalid_argument("soft boundary needs a non-empty batch");
    std::vector<double> sorted(s.data(), s.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const auto k = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor((1.0 - r) * n + 1e-9)));
    const double qau = sorted[static_cast<std::size_t>(k)];
    return qau + (s.array() - qau).max(0.0).sum() / (r * static_cast<double>(n));
}

Var invariance_term(const Var& q, const Var& qp, const RowVector& center) {
    require_unit_rows(q.value(), "q");
    require_unit_rows(qp.value(), "q'");
    require_unit_center(center);
    const Var c = ag::constant(center.transpose());
    return ag::add_scalar(ag::scale(ag::add(ag::matmul(q, c), ag::matmul(qp, c)), -1.0), 2.0);
}

Var oe_term(const Var& q, const Var& qp, const RowVector& center) {
    require_unit_rows(q.value(), "q");
    require_unit_rows(qp.value(), "q'");
    require_unit_center(center);
    const Var c = ag::constant(center.transpose());
    return ag::add_scalar(ag::add(ag::matmul(q, c), ag::matmul(qp, c)), 2.0);
}

Var joint_loss(const Var& l_inv, const std::vector<std::uint8_t>& y, double mu) {
    require_labels(y, l_inv.rows());
    const ColVector yc = label_column(y, l_inv.rows());
    // mu y (4 - l) + (1 - y) l = 4 mu y + (1 - y - mu y) l
    const Var weights = ag::constant((1.0 - yc.array() - mu * yc.array()).matrix());
    const Var offset = ag::constant((4.0 * mu * yc.array()).matrix());
    return ag::mean(ag::add(ag::mul(weights, l_inv), offset));
}

Var variance_term(const Var& x, double zeta, double eps) {
    Var std_dev = ag::sqrt(ag::add_scalar(ag::col_variance(x), eps));
    return ag::mean(ag::relu(ag::add_scalar(ag::scale(std_dev, -1.0), zeta)));
}

Var soft_boundary_term(const Var& s_train, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("soft boundary r must lie in (0, 1]");
    return ag::soft_boundary(s_train, r);
}

LossResult total_loss(const VariantId& variant, const LossInputs& in, const TrainConfig& config) {
    variant.validate();
    const Eigen::Index n = in.q.rows();
    require_labels(in.labels, n);
    LossResult out;
    Var l_inv = invariance_term(in.q, in.qp, in.center);
    Var s_train = ag::add_scalar(ag::scale(l_inv, 2.0), -4.0);
    Var main;
    bool with_variance = true;
    switch (variant.kind) {
        case Variant::Roca:
            main = joint_loss(l_inv, in.labels, config.mu);
            out.report.labels_used = in.labels.empty() ? std::vector<std::uint8_t>(n, 0) : in.labels;
            break;
        case Variant::RocaNoV:
            main = joint_loss(l_inv, in.labels, config.mu);
            out.report.labels_used = in.labels.empty() ? std::vector<std::uint8_t>(n, 0) : in.labels;
            with_variance = false;
            break;
        case Variant::Coca:
            main = ag::mean(l_inv);
            out.report.labels_used.assign(n, 0);
            break;
        case Variant::Cocas:
            main = soft_boundary_term(s_train, *variant.soft_boundary_r);
            out.report.labels_used.assign(n, 0);
            break;
    }
    Var total = main;
    if (with_variance) {
        if (!in.raw_q || !in.raw_qp) throw ConfigError("variant", "variance term needs raw projector outputs");
        Var vq = variance_term(in.raw_q, config.zeta, config.epsilon);
        Var vqp = variance_term(in.raw_qp, config.zeta, config.epsilon);
        out.report.l_var_q = vq.scalar();
        out.report.l_var_qp = vqp.scalar();
        if (config.lambda != 0.0) total = ag::add(total, ag::scale(ag::add(vq, vqp), config.lambda / 2.0));
    }
    out.report.l_inv = l_inv.value();
    out.report.l_oe = (4.0 - out.report.l_inv.array()).matrix();
    out.report.s_train = s_train.value();
    out.report.l_joint = joint_value(out.report.l_inv, out.report.labels_used, config.mu);
    out.report.total = total.scalar();
    out.total = total;
    return out;
}

double chord(double cosine) { return std::sqrt(std::max(0.0, 2.0 - 2.0 * cosine)); }

BoundProbe bound_probe(const RowVector& q, const RowVector& qp, const RowVector& center) {
    require_unit_rows(q, "q");
    require_unit_rows(qp, "q'");
    require_unit_center(center);
    auto clamp = [](double c) { return std::clamp(c, -1.0, 1.0); };
    const double ca = clamp(q.dot(center));
    const double cb = clamp(qp.dot(center));
    const double cg = clamp(q.dot(qp));
    BoundProbe p;
    p.alpha = std::acos(ca);
    p.beta = std::acos(cb);
    p.gamma = std::acos(cg);
    const double denom = std::sin(p.alpha) * std::sin(p.beta);
    p.theta = denom > 1e-12 ? std::acos(clamp((cg - ca * cb) / denom)) : 0.0;
    p.l_q_ce = (q - center).norm();
    p.l_qp_ce = (qp - center).norm();
    p.l_q_qp = (q - qp).norm();
    p.l_inv = 2.0 - ca - cb;
    p.one_plus_l_sim = 1.0 - cg;
    constexpr double slack = 1e-12;
    p.chord_inequality = p.l_q_ce + p.l_qp_ce + slack >= p.l_q_qp;
    p.angle_inequality = p.alpha + p.beta + slack >= p.gamma;
    return p;
}

}  // namespace roca
