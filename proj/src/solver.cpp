#include "mtl/solver.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>

namespace mtl {

namespace {

constexpr double kMinRcond = 1e-12;

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "lssvm-solver", what); }

template <typename Scalar>
Matrix<Scalar> task_indicator(const IndexMatrix& counts) {
    const Index k = counts.rows();
    Matrix<Scalar> p = Matrix<Scalar>::Zero(counts.sum(), k);
    Index c = 0;
    for (Index i = 0; i < k; ++i) {
        const Index ni = counts.row(i).sum();
        p.block(c, i, ni, 1).setOnes();
        c += ni;
    }
    return p;
}

}  // namespace

template <typename Scalar>
Matrix<Scalar> expand_scores(const IndexMatrix& counts, const Matrix<Scalar>& values) {
    const Index k = counts.rows(), m = counts.cols();
    if (values.rows() != k * m) fail(Errc::DimensionMismatch, "score rows must equal k*m");
    Matrix<Scalar> y(counts.sum(), values.cols());
    Index c = 0;
    for (Index a = 0; a < k * m; ++a) {
        const Index na = counts(a / m, a % m);
        y.middleRows(c, na).rowwise() = values.row(a);
        c += na;
    }
    return y;
}

template <typename Scalar>
DualSolution<Scalar> solve_dual(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper,
                                const ScoreAssignment<Scalar>& scores) {
    const Index k = ds.tasks(), p = ds.dim(), n = ds.size();
    hyper.validate(k);
    if (scores.mode == ScoreMode::binary && scores.columns() != 1)
        fail(Errc::DimensionMismatch, "binary scores must have one column");

    DualSolution<Scalar> sol;
    sol.k_ = k;
    sol.p_ = p;
    sol.mode_ = scores.mode;
    sol.counts_ = ds.counts();
    sol.op_ = std::make_shared<const BlockOperator<Scalar>>(ds, hyper);
    for (Index i = 0; i < k; ++i) sol.offsets_.push_back(ds.offset(i));
    sol.scales_ = ds.scales();

    const auto& op = *sol.op_;
    const Scalar s = Scalar(k * p);
    const Matrix<Scalar>& abar = op.coupling();

    if (n <= k * p) {
        sol.side_ = DualSolution<Scalar>::Side::samples;
        Matrix<Scalar> qinv(n, n);
        for (Index i = 0; i < k; ++i)
            for (Index l = 0; l <= i; ++l) {
                const auto& xi = op.task_block(i);
                const auto& xl = op.task_block(l);
                auto blk = qinv.block(op.task_offset(i), op.task_offset(l), xi.cols(), xl.cols());
                blk.noalias() = (abar(i, l) / s) * (xi.transpose() * xl);
                if (l != i)
                    qinv.block(op.task_offset(l), op.task_offset(i), xl.cols(), xi.cols()) = blk.transpose();
            }
        qinv.diagonal().array() += Scalar(1);
        sol.factor_.compute(qinv);
    } else {
        sol.side_ = DualSolution<Scalar>::Side::features;
        Eigen::LLT<Matrix<Scalar>> abar_llt(abar);
        if (abar_llt.info() != Eigen::Success) fail(Errc::SingularSystem, "coupling matrix not positive definite");
        const Matrix<Scalar> abar_inv = abar_llt.solve(Matrix<Scalar>::Identity(k, k));
        Matrix<Scalar> cap = Matrix<Scalar>::Zero(k * p, k * p);
        for (Index i = 0; i < k; ++i) {
            for (Index l = 0; l < k; ++l) cap.block(i * p, l * p, p, p).diagonal().setConstant(s * abar_inv(i, l));
            const auto& xi = op.task_block(i);
            cap.block(i * p, i * p, p, p).template selfadjointView<Eigen::Lower>().rankUpdate(xi);
        }
        cap = cap.template selfadjointView<Eigen::Lower>();
        sol.factor_.compute(cap);
    }
    if (sol.factor_.info() != Eigen::Success || sol.factor_.rcond() < kMinRcond)
        fail(Errc::SingularSystem, "resolvent system is numerically singular");

    const Matrix<Scalar> y = expand_scores(sol.counts_, scores.values);
    const Matrix<Scalar> pm = task_indicator<Scalar>(sol.counts_);
    const Matrix<Scalar> qp = sol.apply_q(pm);
    const Matrix<Scalar> qy = sol.apply_q(y);
    const Matrix<Scalar> ptqp = pm.transpose() * qp;
    Eigen::LLT<Matrix<Scalar>> small(ptqp);
    if (small.info() != Eigen::Success || small.rcond() < kMinRcond)
        fail(Errc::SingularSystem, "P^T Q P is numerically singular");
    sol.b_ = small.solve(pm.transpose() * qy);
    sol.alpha_ = qy - qp * sol.b_;
    sol.w_ = op.apply_a(op.apply_z(sol.alpha_));
    return sol;
}

template <typename Scalar>
Matrix<Scalar> DualSolution<Scalar>::apply_q(const Eigen::Ref<const Matrix<Scalar>>& v) const {
    if (side_ == Side::samples) return factor_.solve(v);
    return v - op_->apply_zt(factor_.solve(op_->apply_z(v)));
}

template <typename Scalar>
Matrix<Scalar> DualSolution<Scalar>::apply_q_inverse(const Eigen::Ref<const Matrix<Scalar>>& v) const {
    return v + op_->apply_zt(op_->apply_a(op_->apply_z(v))) / Scalar(k_ * p_);
}

template <typename Scalar>
Vector<Scalar> DualSolution<Scalar>::score(const Eigen::Ref<const Vector<Scalar>>& x, Index task) const {
    if (x.size() != p_) fail(Errc::DimensionMismatch, "test point has wrong dimension");
    if (task < 0 || task >= k_) fail(Errc::DimensionMismatch, "task index out of range");
    const Vector<Scalar> xc = (x - offsets_[static_cast<std::size_t>(task)]) / scales_(task);
    return w_.middleRows(task * p_, p_).transpose() * xc / Scalar(k_ * p_) + b_.row(task).transpose();
}

template <typename Scalar>
Matrix<Scalar> DualSolution<Scalar>::score_batch(const Eigen::Ref<const Matrix<Scalar>>& x, Index task) const {
    if (x.rows() != p_) fail(Errc::DimensionMismatch, "test batch has wrong dimension");
    if (task < 0 || task >= k_) fail(Errc::DimensionMismatch, "task index out of range");
    const Matrix<Scalar> xc = (x.colwise() - offsets_[static_cast<std::size_t>(task)]) / scales_(task);
    Matrix<Scalar> g = xc.transpose() * w_.middleRows(task * p_, p_) / Scalar(k_ * p_);
    g.rowwise() += b_.row(task);
    return g;
}

template <typename Scalar>
Vector<Scalar> DualSolution<Scalar>::score_operator(const Eigen::Ref<const Vector<Scalar>>& x, Index task) const {
    if (x.size() != p_) fail(Errc::DimensionMismatch, "test point has wrong dimension");
    if (task < 0 || task >= k_) fail(Errc::DimensionMismatch, "task index out of range");
    Matrix<Scalar> u = Matrix<Scalar>::Zero(k_ * p_, 1);
    u.middleRows(task * p_, p_) = (x - offsets_[static_cast<std::size_t>(task)]) / scales_(task);
    const Matrix<Scalar> zau = op_->apply_zt(op_->apply_a(u));
    return alpha_.transpose() * zau.col(0) / Scalar(k_ * p_) + b_.row(task).transpose();
}

template <typename Scalar>
PrimalSolution<Scalar> primal_oracle(const Dataset<Scalar>& ds, const Hyperparams<Scalar>& hyper,
                                     const ScoreAssignment<Scalar>& scores, Index max_iter) {
    const Index k = ds.tasks(), p = ds.dim(), n = ds.size(), r = scores.columns();
    hyper.validate(k);
    const bool shared = hyper.lambda > Scalar(0);
    const Index w0_len = shared ? p : 0;
    const Index d = w0_len + k * p + k;
    const Scalar root = std::sqrt(Scalar(k * p));

    // residual map: xi = Y - F theta, theta = [w0; v_1..v_k; b]
    Matrix<Scalar> f = Matrix<Scalar>::Zero(n, d);
    Index row = 0;
    for (Index i = 0; i < k; ++i) {
        const Matrix<Scalar> xi = ds.task_block(i);
        for (Index l = 0; l < xi.cols(); ++l, ++row) {
            if (shared) f.row(row).head(p) = xi.col(l).transpose() / root;
            f.row(row).segment(w0_len + i * p, p) = xi.col(l).transpose() / root;
            f(row, w0_len + k * p + i) = Scalar(1);
        }
    }
    Vector<Scalar> reg = Vector<Scalar>::Zero(d);
    if (shared) reg.head(p).setConstant(Scalar(1) / hyper.lambda);
    for (Index i = 0; i < k; ++i) reg.segment(w0_len + i * p, p).setConstant(Scalar(1) / hyper.gamma(i));

    Matrix<Scalar> h = f.transpose() * f;
    h.diagonal() += reg;
    const Matrix<Scalar> rhs = f.transpose() * expand_scores(ds.counts(), scores.values);

    Eigen::ConjugateGradient<Matrix<Scalar>, Eigen::Lower | Eigen::Upper> cg;
    cg.setMaxIterations(max_iter);
    cg.setTolerance(Scalar(1e-15));
    cg.compute(h);
    Matrix<Scalar> theta = cg.solve(rhs);

    PrimalSolution<Scalar> out;
    out.iterations = cg.iterations();
    out.gradient_norm = (h * theta - rhs).norm();
    if (!(out.gradient_norm < Scalar(1e-8) * std::max(Scalar(1), rhs.norm())))
        fail(Errc::NoConvergence, "primal descent did not reach the gradient tolerance");
    out.w0 = shared ? Matrix<Scalar>(theta.topRows(p)) : Matrix<Scalar>::Zero(p, r);
    out.v = theta.middleRows(w0_len, k * p);
    out.b = theta.bottomRows(k);
    return out;
}

template class DualSolution<double>;
template Matrix<double> expand_scores<double>(const IndexMatrix&, const Matrix<double>&);
template DualSolution<double> solve_dual<double>(const Dataset<double>&, const Hyperparams<double>&,
                                                 const ScoreAssignment<double>&);
template PrimalSolution<double> primal_oracle<double>(const Dataset<double>&, const Hyperparams<double>&,
                                                      const ScoreAssignment<double>&, Index);

}  // namespace mtl
