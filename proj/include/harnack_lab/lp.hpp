#pragma once
// Dense tableau simplex for  max c.x  s.t.  A x <= b, x >= 0  with b >= 0 (slack basis is feasible).

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace harnack_lab {

struct LpResult {
    enum class Status { optimal, unbounded, iteration_limit } status = Status::optimal;
    Eigen::VectorXd x;
    double objective = 0.0;
    long pivots = 0;
};

inline LpResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                            long max_pivots = 200000, double tol = 1e-12) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex_max: dimension mismatch");
    if ((b.array() < 0.0).any()) throw std::invalid_argument("simplex_max: needs b >= 0");
    // Columns: n structural, m slacks, rhs. Row m is the objective row (reduced costs).
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMat T = RowMat::Zero(m + 1, n + m + 1);
    T.topLeftCorner(m, n) = A;
    T.block(0, n, m, m).setIdentity();
    T.col(n + m).head(m) = b;
    T.row(m).head(n) = -c.transpose();
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    LpResult out;
    long degenerate_run = 0;
    while (true) {
        if (out.pivots >= max_pivots) {
            out.status = LpResult::Status::iteration_limit;
            break;
        }
        // Dantzig pricing; switch to Bland's rule during long degenerate runs.
        const bool bland = degenerate_run > 50;
        Eigen::Index enter = -1;
        double best = -tol;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            const double rc = T(m, j);
            if (rc < best) {
                enter = j;
                if (bland) break;
                best = rc;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double ratio = INFINITY;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double a = T(i, enter);
            if (a > tol) {
                const double rt = T(i, n + m) / a;
                if (rt < ratio - 1e-15 ||
                    (bland && std::abs(rt - ratio) <= 1e-15 && leave >= 0 &&
                     basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    ratio = rt;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            out.status = LpResult::Status::unbounded;
            break;
        }
        degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
        const double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[static_cast<std::size_t>(leave)] = enter;
        ++out.pivots;
    }
    out.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] < n) out.x(basis[static_cast<std::size_t>(i)]) = T(i, n + m);
    out.objective = c.dot(out.x);
    return out;
}

}  // namespace harnack_lab
