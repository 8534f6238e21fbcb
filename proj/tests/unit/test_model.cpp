#include "roca/checkpoint.hpp"
#include "roca/config.hpp"
#include "roca/losses.hpp"
#include "roca/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>

using namespace roca;
namespace ag = roca::ag;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

// Central finite differences of a scalar function of one input matrix.
Matrix numeric_grad(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-6) {
    Matrix g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f(x);
        x.data()[i] = keep - h;
        const double down = f(x);
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double relative_error(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

void check_op(const std::function<ag::Var(const ag::Var&)>& op, const Matrix& x0, double tol = 1e-6) {
    auto f = [&](const Matrix& x) { return ag::sum(op(ag::constant(x))).scalar(); };
    ag::Var x = ag::parameter(x0);
    ag::backward(ag::sum(op(x)));
    EXPECT_LT(relative_error(x.grad(), numeric_grad(f, x0)), tol);
}

EncoderSpec small_spec() {
    EncoderSpec s;
    s.input_dim = 2;
    s.window_length = 16;
    s.channels = 8;
    s.projector_hidden = 12;
    s.projection_dim = 6;
    s.lstm_layers = 2;
    return s;
}

}  // namespace

TEST(Autograd, ElementwiseAndReductions) {
    Rng rng(1);
    const Matrix x = random_matrix(5, 4, rng);
    const Matrix w = random_matrix(4, 3, rng);
    check_op([](const ag::Var& v) { return ag::tanh(v); }, x);
    check_op([](const ag::Var& v) { return ag::sigmoid(v); }, x);
    check_op([](const ag::Var& v) { return ag::mul(v, v); }, x);
    check_op([](const ag::Var& v) { return ag::sqrt(ag::add_scalar(ag::mul(v, v), 1.0)); }, x);
    check_op([&](const ag::Var& v) { return ag::matmul(v, ag::constant(w)); }, x);
    check_op([](const ag::Var& v) { return ag::mul(ag::col_variance(v), ag::col_variance(v)); }, x);
    check_op([](const ag::Var& v) { return ag::mul(ag::mean(v), ag::mean(v)); }, x);
    check_op([](const ag::Var& v) { return ag::l2_normalize_rows(ag::add_scalar(v, 0.3)); }, x, 1e-5);
}

TEST(Autograd, SequenceOps) {
    Rng rng(2);
    const Matrix x = random_matrix(3 * 8, 2, rng);
    const Matrix w = random_matrix(3 * 2, 4, rng);
    check_op([&](const ag::Var& v) { return ag::matmul(ag::im2col_1d(v, 3, 8, 3), ag::constant(w)); }, x);
    check_op([](const ag::Var& v) { return ag::mul(ag::maxpool_time(v, 3, 8, 2), ag::maxpool_time(v, 3, 8, 2)); }, x);
    check_op([](const ag::Var& v) { return ag::mul(ag::mean_time(v, 3, 8), ag::mean_time(v, 3, 8)); }, x);
    check_op([](const ag::Var& v) { return ag::mul(ag::time_step(v, 3, 8, 5), ag::time_step(v, 3, 8, 2)); }, x);
}

TEST(Autograd, BatchNormTrain) {
    Rng rng(3);
    const Matrix x = random_matrix(7, 3, rng);
    const Matrix gamma = random_matrix(1, 3, rng);
    const Matrix beta = random_matrix(1, 3, rng);
    const Matrix proj = random_matrix(7, 3, rng);
    check_op(
        [&](const ag::Var& v) {
            return ag::mul(ag::batch_norm_train(v, ag::constant(gamma), ag::constant(beta), 1e-5), ag::constant(proj));
        },
        x, 1e-5);
}

TEST(Autograd, ZeroRowGuard) {
    Matrix x = Matrix::Zero(2, 4);
    x(1, 0) = 3.0;
    std::size_t zero = 0;
    const ag::Var y = ag::l2_normalize_rows(ag::constant(x), &zero);
    EXPECT_EQ(zero, 1u);
    EXPECT_NEAR(y.value().row(0).norm(), 1.0, 1e-12);
    EXPECT_NEAR(y.value().row(1).norm(), 1.0, 1e-12);
}

TEST(Model, ShapeChain) {
    EncoderSpec s;
    EXPECT_EQ(s.latent_length(), 4);  // L=16, two pool-2 blocks
    s.blocks = 3;
    s.window_length = 32;
    EXPECT_EQ(s.latent_length(), 4);
    s.window_length = 4;
    EXPECT_THROW(s.validate(), ConfigError);
    for (const char* p : {"synthetic", "aiops", "ucr", "swat", "wadi"}) {
        EXPECT_NO_THROW(EncoderSpec::from_config(profile_defaults(p)).validate()) << p;
    }
}

TEST(Model, ForwardShapesAndUnitRows) {
    Rng init(4);
    RocaModel m(small_spec(), init);
    Rng data(5);
    const Matrix x = random_matrix(8 * 16, 2, data);
    const auto out = m.forward(x, 8, false);
    EXPECT_EQ(out.z.rows(), 8 * 4);
    EXPECT_EQ(out.z.cols(), 8);
    EXPECT_EQ(out.z_rec.rows(), out.z.rows());
    EXPECT_EQ(out.z_rec.cols(), out.z.cols());
    EXPECT_EQ(out.q.rows(), 8);
    EXPECT_EQ(out.q.cols(), 6);
    for (Eigen::Index i = 0; i < 8; ++i) {
        EXPECT_NEAR(out.q.value().row(i).norm(), 1.0, 1e-5);
        EXPECT_NEAR(out.qp.value().row(i).norm(), 1.0, 1e-5);
    }
    EXPECT_GT((out.z.value() - out.z_rec.value()).norm(), 1e-6);
}

TEST(Model, ZeroInputFinite) {
    Rng init(6);
    RocaModel m(small_spec(), init);
    const auto out = m.forward(Matrix::Zero(3 * 16, 2), 3, false);
    EXPECT_TRUE(out.q.value().allFinite());
    EXPECT_TRUE(out.qp.value().allFinite());
}

TEST(Model, EvalBatchInvarianceAndDeterminism) {
    Rng init(7);
    RocaModel m(small_spec(), init);
    Rng data(8);
    // a few training passes so running statistics are not the initial ones
    Rng drop(9);
    for (int i = 0; i < 3; ++i) m.forward(random_matrix(10 * 16, 2, data), 10, true, &drop);
    const Matrix x = random_matrix(10 * 16, 2, data);
    const auto full = m.forward(x, 10, false);
    const auto again = m.forward(x, 10, false);
    EXPECT_EQ(full.q.value(), again.q.value());
    for (Eigen::Index i = 0; i < 10; ++i) {
        const auto one = m.forward(x.middleRows(i * 16, 16), 1, false);
        EXPECT_LT((one.q.value().row(0) - full.q.value().row(i)).cwiseAbs().maxCoeff(), 1e-5);
        EXPECT_LT((one.qp.value().row(0) - full.qp.value().row(i)).cwiseAbs().maxCoeff(), 1e-5);
    }
}

TEST(Model, GradientReachesEveryParameter) {
    Rng init(10);
    RocaModel m(small_spec(), init);
    Rng data(11), drop(12);
    const auto out = m.forward(random_matrix(12 * 16, 2, data), 12, true, &drop);
    const RowVector c = compute_center(out.q.value(), out.qp.value());
    LossInputs in{out.q, out.qp, out.raw_q, out.raw_qp, c, std::vector<std::uint8_t>(12, 0)};
    in.labels[3] = 1;
    const auto loss = total_loss(VariantId{}, in, TrainConfig{});
    ag::backward(loss.total);
    const auto params = m.parameters();
    std::size_t nonzero = 0;
    for (const auto& p : params) nonzero += p.has_grad() && p.grad().norm() > 0.0;
    EXPECT_GE(static_cast<double>(nonzero), 0.99 * static_cast<double>(params.size()));
}

TEST(Center, IdenticalRows) {
    RowVector u(4);
    u << 0.5, -0.5, 0.5, 0.5;
    Matrix q = u.replicate(3, 1);
    const RowVector c = compute_center(q, q);
    EXPECT_LT((c - u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Center, DegenerateMean) {
    RowVector u(3);
    u << 1.0, 0.0, 0.0;
    Matrix q(1, 3), qp(1, 3);
    q.row(0) = u;
    qp.row(0) = -u;
    const RowVector c = compute_center(q, qp, 1e-4);
    EXPECT_NEAR(c.norm(), 1.0, 1e-12);
    EXPECT_GT(c.cwiseAbs().minCoeff(), 0.0);
}

TEST(Center, RandomBatchNoZeroComponent) {
    Rng rng(13);
    Matrix q = random_matrix(20, 16, rng);
    q.rowwise().normalize();
    Matrix qp = random_matrix(20, 16, rng);
    qp.rowwise().normalize();
    const RowVector c = compute_center(q, qp);
    EXPECT_NEAR(c.norm(), 1.0, 1e-5);
    EXPECT_GT(c.cwiseAbs().minCoeff(), 0.0);
    RowVector mean = (q.colwise().sum() + qp.colwise().sum()) / 40.0;
    EXPECT_GT(c.dot(mean.normalized()), 0.999);
}

TEST(Checkpoint, RoundTripReproducesScores) {
    Rng init(14);
    RocaModel m(small_spec(), init);
    Rng data(15), drop(16);
    for (int i = 0; i < 2; ++i) m.forward(random_matrix(6 * 16, 2, data), 6, true, &drop);
    RowVector c = RowVector::Constant(6, 1.0 / std::sqrt(6.0));
    m.set_center(c);
    const auto p = std::filesystem::temp_directory_path() / "roca_ckpt_test.json";
    save_checkpoint(p, m);
    RocaModel back = load_checkpoint(p);
    EXPECT_EQ(back.spec(), m.spec());
    ASSERT_TRUE(back.center());
    EXPECT_EQ(*back.center(), c);
    const Matrix x = random_matrix(5 * 16, 2, data);
    EXPECT_EQ(back.forward(x, 5, false).q.value(), m.forward(x, 5, false).q.value());
    EXPECT_EQ(back.forward(x, 5, false).qp.value(), m.forward(x, 5, false).qp.value());
    std::filesystem::remove(p);
    EXPECT_ANY_THROW(checkpoint_from_json("{\"format\": \"something-else\"}"));
}

TEST(Model, MoveKeepsRegistryValid) {
    Rng init(17);
    RocaModel a(small_spec(), init);
    const std::string before = checkpoint_to_json(a);
    RocaModel b(std::move(a));
    EXPECT_EQ(checkpoint_to_json(b), before);
}
