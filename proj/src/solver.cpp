#include "msbem/solver.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <limits>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace msbem {

void SolveConfig::validate() const {
    if (!(inner_tol > 0.0 && inner_tol < outer_tol && outer_tol < 1.0))
        throw std::invalid_argument("tolerances must satisfy 0 < inner_tol < outer_tol < 1");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("iteration caps must be positive");
    quadrature.validate();
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Givens rotation zeroing b in (a, b): returns (c, s) with c real.
void givens(cplx a, cplx b, double &c, cplx &s) {
    const double na = std::abs(a), nb = std::abs(b);
    if (nb == 0.0) {
        c = 1.0;
        s = 0.0;
        return;
    }
    if (na == 0.0) {
        c = 0.0;
        s = std::conj(b) / nb;
        return;
    }
    const double nrm = std::hypot(na, nb);
    c = na / nrm;
    s = (a / na) * std::conj(b) / nrm;
}

}  // namespace

GmresResult gmres(const LinearMap &apply, const Eigen::VectorXcd &b, double tol, int maxit) {
    GmresResult res;
    const Eigen::Index n = b.size();
    res.x = Eigen::VectorXcd::Zero(n);
    const double beta = b.norm();
    if (beta == 0.0) {
        res.residual_history = {0.0};
        res.converged = true;
        return res;
    }
    res.residual_history.push_back(1.0);
    const int m = static_cast<int>(std::min<Eigen::Index>(maxit, n));
    Eigen::MatrixXcd v(n, m + 1);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<double> cs(m);
    std::vector<cplx> sn(m);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    g[0] = beta;
    v.col(0) = b / beta;
    int k = 0;
    bool done = false;
    while (k < m && !done) {
        Eigen::VectorXcd w = apply(v.col(k));
        if (w.size() != n) throw SolverError("gmres: operator returned a vector of wrong length");
        for (int i = 0; i <= k; ++i) {
            const cplx hik = v.col(i).dot(w);  // conjugates v
            h(i, k) = hik;
            w -= hik * v.col(i);
        }
        const double hn = w.norm();
        h(k + 1, k) = hn;
        const bool breakdown = hn < 1e-14 * beta;
        if (!breakdown) v.col(k + 1) = w / hn;
        for (int i = 0; i < k; ++i) {
            const cplx t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
            h(i + 1, k) = -std::conj(sn[i]) * h(i, k) + cs[i] * h(i + 1, k);
            h(i, k) = t;
        }
        givens(h(k, k), h(k + 1, k), cs[k], sn[k]);
        h(k, k) = cs[k] * h(k, k) + sn[k] * h(k + 1, k);
        h(k + 1, k) = 0.0;
        g[k + 1] = -std::conj(sn[k]) * g[k];
        g[k] = cs[k] * g[k];
        ++k;
        const double rel = std::abs(g[k]) / beta;
        res.residual_history.push_back(rel);
        if (rel <= tol) {
            res.converged = true;
            done = true;
        }
        if (breakdown) {
            // Invariant Krylov space: the least-squares solution is final.
            res.converged = true;
            done = true;
        }
    }
    // Back substitution; skip numerically zero pivots (singular consistent systems).
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(k);
    double hmax = 0.0;
    for (int i = 0; i < k; ++i) hmax = std::max(hmax, std::abs(h(i, i)));
    for (int i = k - 1; i >= 0; --i) {
        cplx s = g[i];
        for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
        y[i] = std::abs(h(i, i)) > 1e-14 * hmax ? s / h(i, i) : cplx(0.0);
    }
    res.x = v.leftCols(k) * y;
    res.iterations = k;
    return res;
}

// ---------------------------------------------------------------------------

CalderonPreconditioner::CalderonPreconditioner(LinearMap b, Eigen::SparseMatrix<double> m, double inner_tol,
                                               int max_inner)
    : b_(std::move(b)), m_(std::move(m)), inner_tol_(inner_tol), max_inner_(max_inner),
      inner_total_(std::make_shared<long>(0)) {
    if (m_.rows() != m_.cols()) throw SolverError("Gram matrix must be square");
    mt_ = m_.transpose();
    m_.makeCompressed();
    mt_.makeCompressed();
}

Eigen::VectorXcd CalderonPreconditioner::solve_gram(const Eigen::VectorXcd &r, bool transpose, int *iterations) const {
    const Eigen::SparseMatrix<double> &mat = transpose ? mt_ : m_;
    auto apply = [&mat](const Eigen::VectorXcd &x) {
        const Eigen::VectorXd re = mat * x.real(), im = mat * x.imag();
        Eigen::VectorXcd y(re.size());
        y.real() = re;
        y.imag() = im;
        return y;
    };
    GmresResult res = gmres(apply, r, inner_tol_, max_inner_);
    if (!res.converged)
        throw SolverError("inner GMRES on the Gram matrix did not reach the tolerance in " +
                          std::to_string(res.iterations) + " iterations");
    *inner_total_ += res.iterations;
    if (iterations) *iterations = res.iterations;
    return res.x;
}

Eigen::VectorXcd CalderonPreconditioner::apply(const Eigen::VectorXcd &r) const {
    if (r.size() != m_.rows()) throw SolverError("preconditioner applied to a vector of wrong length");
    const Eigen::VectorXcd y = solve_gram(r, true);
    const Eigen::VectorXcd z = b_(y);
    return solve_gram(z, false);
}

std::shared_ptr<CalderonPreconditioner> make_calderon_preconditioner(const BlockDiagonal &b,
                                                                     const Eigen::SparseMatrix<double> &m,
                                                                     const SolveConfig &cfg) {
    if (b.dim() != m.rows() || m.rows() != m.cols()) throw SolverError("preconditioner dimensions do not match");
    auto bp = std::make_shared<BlockDiagonal>(b);
    return std::make_shared<CalderonPreconditioner>([bp](const Eigen::VectorXcd &x) { return bp->apply(x); }, m,
                                                    cfg.inner_tol, cfg.max_inner);
}

// ---------------------------------------------------------------------------

ProblemSetup prepare_problem(const MultiScreen &screen, Problem problem, const IncidentWave &wave,
                             const Reduction &reduction, bool with_preconditioner, const SolveConfig &cfg,
                             BlockCache *cache) {
    cfg.validate();
    wave.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ProblemSetup s;
    s.problem = problem;
    s.kernel.kappa = wave.kappa;
    s.reduction = reduction;
    s.wave = wave;
    SpacePair pair = multitrace_pair(screen, problem, reduction);
    s.primal = std::make_shared<const FunctionSpace>(std::move(pair.primal));
    s.dual = std::make_shared<const FunctionSpace>(std::move(pair.dual));
    if (problem == Problem::dirichlet) {
        s.A = assemble_single_layer(*s.primal, *s.primal, s.kernel, cfg.quadrature);
    } else {
        s.A = assemble_hypersingular(*s.primal, *s.primal, s.kernel, cfg.quadrature);
    }
    s.rhs = assemble_rhs(*s.primal, wave, problem);
    if (with_preconditioner) {
        s.B = assemble_block_diagonal(*s.dual, problem == Problem::dirichlet ? FormTag::W : FormTag::V, s.kernel,
                                      cfg.quadrature, cache);
        s.M = assemble_duality(*s.primal, *s.dual);
    }
    s.assembly_seconds = seconds_since(t0);
    return s;
}

SolveReport solve_prepared(const ProblemSetup &setup, bool precondition, const SolveConfig &cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    rep.problem = setup.problem;
    rep.preconditioned = precondition;
    rep.space = setup.primal;
    const Eigen::MatrixXcd &a = setup.A.entries;
    auto apply_a = [&a](const Eigen::VectorXcd &x) -> Eigen::VectorXcd { return a * x; };
    GmresResult res;
    if (precondition) {
        if (!setup.B) throw SolverError("problem was prepared without preconditioner data");
        auto p = make_calderon_preconditioner(*setup.B, setup.M, cfg);
        const Eigen::VectorXcd pb = p->apply(setup.rhs);
        res = gmres([&](const Eigen::VectorXcd &x) { return p->apply(a * x); }, pb, cfg.outer_tol, cfg.max_outer);
        rep.inner_iteration_total = p->inner_iterations();
    } else {
        res = gmres(apply_a, setup.rhs, cfg.outer_tol, cfg.max_outer);
    }
    rep.coefficients = std::move(res.x);
    rep.iterations = res.iterations;
    rep.residual_history = std::move(res.residual_history);
    rep.converged = res.converged;
    rep.final_residual = rep.residual_history.back();
    rep.solve_seconds = seconds_since(t0);
    return rep;
}

namespace {
SolveReport solve_problem(const MultiScreen &screen, Problem problem, cplx kappa, const Reduction &reduction,
                          bool precondition, const SolveConfig &cfg, const IncidentWave *wave) {
    IncidentWave w;
    if (wave) w = *wave;
    w.kappa = kappa;
    const ProblemSetup setup = prepare_problem(screen, problem, w, reduction, precondition, cfg);
    return solve_prepared(setup, precondition, cfg);
}
}  // namespace

SolveReport solve_dirichlet(const MultiScreen &screen, cplx kappa, const Reduction &reduction, bool precondition,
                            const SolveConfig &cfg, const IncidentWave *wave) {
    return solve_problem(screen, Problem::dirichlet, kappa, reduction, precondition, cfg, wave);
}

SolveReport solve_neumann(const MultiScreen &screen, cplx kappa, const Reduction &reduction, bool precondition,
                          const SolveConfig &cfg, const IncidentWave *wave) {
    return solve_problem(screen, Problem::neumann, kappa, reduction, precondition, cfg, wave);
}

// ---------------------------------------------------------------------------

std::vector<double> singular_values(Eigen::MatrixXcd a) {
    const lapack_int m = static_cast<lapack_int>(a.rows()), n = static_cast<lapack_int>(a.cols());
    if (m == 0 || n == 0) return {};
    std::vector<double> s(std::min(m, n));
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw SolverError("singular value decomposition failed (info " + std::to_string(info) + ")");
    return s;
}

Eigen::MatrixXcd materialize(const Eigen::MatrixXcd &a, const LinearMap &p) {
    Eigen::MatrixXcd out(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.col(j) = p(a.col(j));
    return out;
}

ConditionResult effective_condition_number(const Eigen::MatrixXcd &a, const LinearMap *p) {
    if (a.rows() != a.cols()) throw SolverError("condition number needs a square matrix");
    if (a.rows() > dense_svd_limit)
        throw SolverError("dimension " + std::to_string(a.rows()) +
                          " exceeds the dense decomposition budget; compare iteration counts instead");
    ConditionResult r;
    r.singular_values = singular_values(p ? materialize(a, *p) : a);
    if (r.singular_values.empty()) return r;
    const double smax = r.singular_values.front();
    if (smax == 0.0) {
        r.nullity = static_cast<int>(r.singular_values.size());
        r.cond = std::numeric_limits<double>::infinity();
        return r;
    }
    double smin = smax;
    for (double s : r.singular_values) {
        if (s < 1e-8 * smax) ++r.nullity;
        else smin = std::min(smin, s);
    }
    r.cond = smax / smin;
    return r;
}

}  // namespace msbem
