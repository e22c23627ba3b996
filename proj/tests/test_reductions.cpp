#include <gtest/gtest.h>

#include "psm/experiments.hpp"
#include "psm/oracle.hpp"
#include "psm/reductions.hpp"

using namespace psm;

// ---------------------------------------------------------------- Dantzig

TEST(BuildDantzig, IdentityDesign)
{
    const auto p = build_dantzig({DenseMatrix::Identity(2, 2), Vector{{3.0, 0.0}}});
    EXPECT_EQ(p.kind, ConstraintKind::LessEqual);
    DenseMatrix expected(4, 4);
    const DenseMatrix I = DenseMatrix::Identity(2, 2);
    expected << I, -I, -I, I;
    EXPECT_TRUE(DenseMatrix(p.A).isApprox(expected));
    EXPECT_TRUE(p.b.isApprox(Vector{{3.0, 0.0, -3.0, 0.0}}));
    EXPECT_TRUE(p.b_bar.isApprox(Vector::Ones(4)));
    EXPECT_TRUE(p.c.isApprox(-Vector::Ones(4)));
    EXPECT_TRUE(p.c_bar.isZero());
}

TEST(BuildDantzig, ScalarDesign)
{
    const auto p = build_dantzig({DenseMatrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0)});
    EXPECT_TRUE(DenseMatrix(p.A).isApprox(DenseMatrix{{4.0, -4.0}, {-4.0, 4.0}}));
    EXPECT_TRUE(p.b.isApprox(Vector{{2.0, -2.0}}));
}

TEST(BuildDantzig, GaussianInstanceStartsAtCorrelationNorm)
{
    experiments::DantzigGenConfig cfg;
    cfg.seed = 3;
    const auto data = experiments::gen_dantzig(cfg);
    const auto p = build_dantzig(data.instance());
    EXPECT_EQ(p.rows(), 500);
    EXPECT_EQ(p.cols(), 500);
    auto [s, info] = to_standard_form(p);
    const DictionaryState st = initialize(s, slack_basis(info));
    EXPECT_NEAR(st.lambda_lo, (data.X.transpose() * data.y).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(RecoverDantzig, SoftThresholdUnderIdentityDesign)
{
    const Vector y{{3.0, 0.0}};
    const SolutionPath path = solve_dantzig({DenseMatrix::Identity(2, 2), y});
    const auto theta = recover_dantzig(path, 2);
    for (double lambda : {0.0, 0.5, 2.0, 3.0, 4.0, 10.0}) {
        const Vector t = theta.coefficients_at(lambda);
        EXPECT_NEAR(t(0), std::max(3.0 - lambda, 0.0), 1e-12) << lambda;
        EXPECT_NEAR(t(1), 0.0, 1e-12);
    }
    EXPECT_TRUE(theta.segments.front().coefficients.empty());
    EXPECT_TRUE(theta.segments.front().support.empty());
    EXPECT_EQ(theta.terminal().support, std::vector<Index>{0});
}

TEST(RecoverDantzig, SoftThresholdWithSigns)
{
    const Vector y{{-2.0, 5.0, 0.5}};
    const auto theta = recover_dantzig(solve_dantzig({DenseMatrix::Identity(3, 3), y}), 3);
    for (double lambda : {0.0, 0.25, 1.0, 3.0, 6.0})
        for (Index j = 0; j < 3; ++j) {
            const double expected = (y(j) > 0 ? 1.0 : -1.0) * std::max(std::abs(y(j)) - lambda, 0.0);
            EXPECT_NEAR(theta.coefficients_at(lambda)(j), expected, 1e-12);
        }
}

TEST(RecoverDantzig, LeastSquaresAtZero)
{
    experiments::Rng rng(9);
    const DenseMatrix X = rng.normal_matrix(12, 4);
    Vector y(12);
    for (Index i = 0; i < 12; ++i)
        y(i) = rng.normal();
    const SolutionPath path = solve_dantzig({X, y});
    ASSERT_EQ(path.terminal_lambda, 0.0);
    const Vector theta = recover_dantzig(path, 4).coefficients_at(0.0);
    const Vector ls = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    EXPECT_LE((theta - ls).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(RecoverDantzig, SignEquivariance)
{
    experiments::Rng rng(21);
    const DenseMatrix X = rng.normal_matrix(10, 6);
    Vector y(10);
    for (Index i = 0; i < 10; ++i)
        y(i) = rng.normal();
    const auto pos = recover_dantzig(solve_dantzig({X, y}), 6);
    const auto neg = recover_dantzig(solve_dantzig({X, -y}), 6);
    for (double lambda : {0.0, 0.3, 1.0, 2.5})
        EXPECT_LE((pos.coefficients_at(lambda) + neg.coefficients_at(lambda)).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(RecoverDantzig, FeasibleAlongPath)
{
    experiments::DantzigGenConfig cfg;
    cfg.n = 30;
    cfg.d = 60;
    cfg.s = 4;
    cfg.seed = 5;
    const auto data = experiments::gen_dantzig(cfg);
    const SolutionPath path = solve_dantzig(data.instance());
    const auto theta = recover_dantzig(path, cfg.d);
    for (const auto& seg : theta.segments)
        for (double lambda : {seg.lambda_lo, seg.lambda_hi})
            if (std::isfinite(lambda))
                EXPECT_LE(experiments::feasibility_violation(data.X, data.y, theta.coefficients_at(lambda), lambda),
                          1e-9);
}

TEST(RecoverDantzig, OverlappingSplitIsRejected)
{
    SolutionPath path;
    PathSegment seg;
    seg.lambda_lo = 0.0;
    seg.lambda_hi = 1.0;
    seg.num_cols = 4;
    seg.primal = {{0, {1.0, 0.0}}, {2, {1.0, 0.0}}};
    path.segments.push_back(seg);
    EXPECT_THROW(recover_dantzig(path, 2), ComplementarityViolation);
}

// ---------------------------------------------------------------- SVM

TEST(BuildSvm, OneSampleLayout)
{
    const SvmProgram svm = build_svm({DenseMatrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0)});
    ASSERT_EQ(svm.program.rows(), 2);
    ASSERT_EQ(svm.program.cols(), 7);
    const DenseMatrix A(svm.program.A);
    EXPECT_TRUE(A.row(0).isApprox(Eigen::RowVectorXd{{1.0, -1.0, 2.0, -2.0, 1.0, -1.0, 0.0}}));
    EXPECT_TRUE(A.row(1).isApprox(Eigen::RowVectorXd{{0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0}}));
    EXPECT_TRUE(svm.program.b.isApprox(Vector{{1.0, 0.0}}));
    EXPECT_TRUE(svm.program.b_bar.isApprox(Vector{{0.0, 1.0}}));
    EXPECT_TRUE(svm.program.c.isApprox(Vector{{-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}));
    EXPECT_EQ(svm.initial_basis, (std::vector<Index>{0, 6}));
}

TEST(BuildSvm, RejectsBadLabels)
{
    EXPECT_THROW(build_svm({DenseMatrix::Ones(2, 1), Vector{{1.0, 0.0}}}), Error);
    EXPECT_THROW(build_svm({DenseMatrix::Ones(2, 1), Vector{{1.0}}}), DimensionMismatch);
}

TEST(SolveSvm, ZeroFeaturesAllPositive)
{
    const SvmProgram svm = build_svm({DenseMatrix::Zero(3, 2), Vector::Ones(3)});
    const SolutionPath path = solve_svm(svm);
    const auto model = recover_svm(path, svm.layout);
    for (double lambda : {0.0, 1.0, 50.0}) {
        EXPECT_LE(model.coefficients_at(lambda).lpNorm<Eigen::Infinity>(), 1e-12);
        EXPECT_NEAR(model.intercept_at(lambda), 1.0, 1e-12);
        const auto ref = oracle::brute_force_optimum(svm.program, lambda);
        ASSERT_EQ(ref.status, oracle::Status::Optimal);
        EXPECT_NEAR(ref.value, 0.0, 1e-12);
    }
    // hinge slacks stay at zero
    for (const auto& seg : path.segments)
        for (const auto& e : seg.primal)
            if (e.index < 3)
                EXPECT_NEAR(e.value.at(seg.lambda_lo), 0.0, 1e-12);
}

TEST(SolveSvm, SeparableTwoPoints)
{
    const SvmInstance inst{DenseMatrix{{1.0}, {-1.0}}, Vector{{1.0, -1.0}}};
    const SvmProgram svm = build_svm(inst);
    const SolutionPath path = solve_svm(svm);
    const auto model = recover_svm(path, svm.layout);
    for (double lambda : {0.0, 0.25, 0.5, 1.0, 2.0, 10.0}) {
        const auto ref = oracle::brute_force_optimum(svm.program, lambda);
        ASSERT_EQ(ref.status, oracle::Status::Optimal);
        const Vector x = evaluate_primal(*path.find(lambda), lambda);
        EXPECT_NEAR(svm.program.objective_at(lambda).dot(x), ref.value, 1e-9) << lambda;
    }
    // margin errors vanish once ‖θ‖₁ = λ ≥ 1
    EXPECT_NEAR(svm.program.c.dot(evaluate_primal(*path.find(2.0), 2.0)), 0.0, 1e-12);
    EXPECT_LT(svm.program.c.dot(evaluate_primal(*path.find(0.5), 0.5)), -0.5);
    const Vector theta = model.coefficients_at(2.0);
    EXPECT_GT(theta(0), 0.0);
    const double b0 = model.intercept_at(2.0);
    EXPECT_EQ(svm_predict(theta, b0, Vector{{1.0}}), 1.0);
    EXPECT_EQ(svm_predict(theta, b0, Vector{{-1.0}}), -1.0);
}

TEST(SolveSvm, RandomInstanceMatchesOracle)
{
    experiments::Rng rng(17);
    const DenseMatrix X = rng.normal_matrix(4, 2);
    Vector labels(4);
    labels << 1, -1, 1, -1;
    const SvmProgram svm = build_svm({X, labels});
    const SolutionPath path = solve_svm(svm, {}, 20.0);
    ASSERT_TRUE(path.termination == Termination::LambdaNonpositive || path.termination == Termination::ReachedTarget);
    const oracle::VertexEnumerator ref(svm.program);
    const auto rep = oracle::check_path_against_oracle(ref, path, 5);
    EXPECT_TRUE(rep.passed) << rep.worst_gap << " at " << rep.worst_lambda;
}

// ---------------------------------------------------------------- differential network

TEST(BuildDiffnet, Dimensions)
{
    DiffNetInstance inst{DenseMatrix::Ones(2, 3), DenseMatrix::Ones(4, 5), DenseMatrix::Zero(2, 5)};
    const DiffNetProgram net = build_diffnet(inst);
    const Index m1 = 2, d1 = 3, d2 = 4, m2 = 5;
    EXPECT_EQ(net.program.rows(), m1 * d2 + 2 * m1 * m2);
    EXPECT_EQ(net.program.cols(), 2 * d1 * d2 + m1 * d2 + 2 * m1 * m2);
    EXPECT_EQ(static_cast<Index>(net.initial_basis.size()), net.program.rows());
    EXPECT_TRUE(net.program.b_bar.head(m1 * d2).isZero());
    EXPECT_TRUE(net.program.b_bar.tail(2 * m1 * m2).isOnes());
    EXPECT_THROW(build_diffnet({DenseMatrix::Ones(2, 3), DenseMatrix::Ones(4, 5), DenseMatrix::Zero(3, 5)}),
                 DimensionMismatch);
}

TEST(BuildDiffnet, ConstraintsReproduceMatrixProducts)
{
    experiments::Rng rng(4);
    DiffNetInstance inst{rng.normal_matrix(2, 3), rng.normal_matrix(3, 2), rng.normal_matrix(2, 2)};
    const DiffNetProgram net = build_diffnet(inst);
    const auto& L = net.layout;
    const DenseMatrix D = rng.normal_matrix(3, 3);
    const DenseMatrix C = inst.X * D;
    Vector x = Vector::Zero(L.cols());
    for (Index k = 0; k < 9; ++k) {
        x(L.d_pos(k)) = std::max(D.data()[k], 0.0);
        x(L.d_neg(k)) = std::max(-D.data()[k], 0.0);
    }
    for (Index k = 0; k < C.size(); ++k)
        x(L.c_col(k)) = C.data()[k];
    const Vector Ax = net.program.A * x;
    EXPECT_LE(Ax.head(C.size()).lpNorm<Eigen::Infinity>(), 1e-12);
    const DenseMatrix CZ = C * inst.Z;
    for (Index k = 0; k < CZ.size(); ++k) {
        EXPECT_NEAR(Ax(C.size() + k), CZ.data()[k], 1e-12);
        EXPECT_NEAR(Ax(C.size() + CZ.size() + k), -CZ.data()[k], 1e-12);
    }
}

TEST(SolveDiffnet, ScalarClosedForm)
{
    const auto net = build_diffnet(DiffNetInstance::from_covariances(DenseMatrix::Constant(1, 1, 2.0),
                                                                     DenseMatrix::Constant(1, 1, 1.0)));
    const SolutionPath path = solve_diffnet(net);
    const auto delta = recover_diffnet(path, net.layout);
    for (double lambda : {0.0, 0.2, 0.5, 1.0, 3.0})
        EXPECT_NEAR(delta.coefficients_at(lambda)(0), std::max((1.0 - lambda) / 2.0, 0.0), 1e-12) << lambda;
}

TEST(SolveDiffnet, ZeroTargetNeedsNoPivot)
{
    experiments::Rng rng(8);
    const DenseMatrix S = rng.normal_matrix(3, 3);
    const DenseMatrix SPD = S * S.transpose() + DenseMatrix::Identity(3, 3);
    const auto net = build_diffnet(DiffNetInstance::from_covariances(SPD, SPD));
    const SolutionPath path = solve_diffnet(net);
    EXPECT_EQ(path.pivot_count(), 0u);
    EXPECT_LE(recover_diffnet(path, net.layout).coefficients_at(0.0).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(SolveDiffnet, SignedProductsMatchReducedOracle)
{
    // d = 2: the C-free reduced program min ‖Δ‖₁ s.t. ±(S_X Δ S_Y − Y) ≤ λ fits the oracle
    experiments::Rng rng(12);
    auto spd = [&](Index d) {
        const DenseMatrix M = rng.normal_matrix(d, d);
        return DenseMatrix(M * M.transpose() + 0.5 * DenseMatrix::Identity(d, d));
    };
    const DenseMatrix SX = spd(2), SY = spd(2);
    const auto net = build_diffnet(DiffNetInstance::from_covariances(SX, SY));
    const SolutionPath path = solve_diffnet(net);
    ASSERT_TRUE(path.termination == Termination::LambdaNonpositive || path.termination == Termination::ReachedTarget);

    // vec(S_X Δ S_Y) = (S_Yᵀ ⊗ S_X) vec Δ
    DenseMatrix K(4, 4);
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b)
            K.block(2 * a, 2 * b, 2, 2) = SY(b, a) * SX;
    DenseMatrix A(8, 8);
    A << K, -K, -K, K;
    const DenseMatrix Y = SX - SY;
    const Eigen::Map<const Vector> vecY(Y.data(), 4);
    Vector b(8);
    b << vecY, -vecY;
    const auto reduced = ParametricProgram::from_dense(A, b, Vector::Ones(8), -Vector::Ones(8), Vector::Zero(8),
                                                       ConstraintKind::LessEqual);
    const oracle::VertexEnumerator ref(reduced);
    const auto delta = recover_diffnet(path, net.layout);
    for (const auto& seg : path.segments) {
        const double hi = std::isfinite(seg.lambda_hi) ? seg.lambda_hi : seg.lambda_lo + 1.0;
        for (double lambda : {seg.lambda_lo, 0.5 * (seg.lambda_lo + hi), hi}) {
            const auto r = ref.optimum(lambda);
            ASSERT_EQ(r.status, oracle::Status::Optimal);
            EXPECT_NEAR(-delta.coefficients_at(lambda).lpNorm<1>(), r.value, 1e-8 * (1.0 + std::abs(r.value)));
            EXPECT_TRUE(verify_segment(net.program, seg, lambda).passed);
        }
    }
}

TEST(SolveDiffnet, GeneratedInstanceCertificates)
{
    experiments::DiffNetGenConfig cfg;
    cfg.d = 6;
    cfg.n = 40;
    cfg.sparsity = 0.1;
    cfg.seed = 2;
    const auto data = experiments::gen_diffnet(cfg);
    const auto net = build_diffnet(DiffNetInstance::from_covariances(data.S_X, data.S_Y));
    SolveOptions opts;
    opts.max_pivots = 60;
    const SolutionPath path = solve_diffnet(net, opts);
    ASSERT_GT(path.pivot_count(), 0u);
    const auto delta = recover_diffnet(path, net.layout);
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        const auto& seg = path.segments[s];
        if (!std::isfinite(seg.lambda_hi))
            continue;
        EXPECT_TRUE(verify_segment(net.program, seg, seg.lambda_hi).passed) << s;
        DenseMatrix D = DenseMatrix::Zero(6, 6);
        for (const auto& e : delta.segments[s].coefficients)
            D(e.index % 6, e.index / 6) = e.value.at(seg.lambda_hi);
        EXPECT_LE(experiments::diffnet_violation(data.S_X, data.S_Y, D, seg.lambda_hi), 1e-8);
    }
}
