/**
 * \file solver.hpp
 * \brief GMRES for consistent singular systems, the Calderon preconditioner
 * M^-1 B M^-T, Dirichlet/Neumann multi-screen solves and singular-value
 * diagnostics.
 */
#ifndef MSBEM_SOLVER_HPP
#define MSBEM_SOLVER_HPP

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "msbem/assembly.hpp"
#include "msbem/geometry.hpp"
#include "msbem/spaces.hpp"

namespace msbem {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd &)>;

struct SolveConfig {
    double outer_tol = 2.0e-5;
    double inner_tol = 2.0e-12;
    int max_outer = 2000;
    int max_inner = 2000;
    QuadratureConfig quadrature;

    void validate() const;
};

struct GmresResult {
    Eigen::VectorXcd x;
    int iterations = 0;
    std::vector<double> residual_history;  // relative to |b|, starting with 1
    bool converged = false;
};

/// Full GMRES with modified Gram-Schmidt, zero initial guess.
GmresResult gmres(const LinearMap &apply, const Eigen::VectorXcd &b, double tol, int maxit);

/// r -> M^-1 (B (M^-T r)), each Gram inverse applied by inner GMRES.
class CalderonPreconditioner {
public:
    CalderonPreconditioner(LinearMap b, Eigen::SparseMatrix<double> m, double inner_tol, int max_inner);

    Eigen::VectorXcd apply(const Eigen::VectorXcd &r) const;
    Eigen::VectorXcd operator()(const Eigen::VectorXcd &r) const { return apply(r); }

    /// Accumulated inner GMRES iterations over all applications so far.
    long inner_iterations() const { return *inner_total_; }
    void reset_counter() const { *inner_total_ = 0; }

    /// Solves M x = r (transpose = false) or M^T x = r.
    Eigen::VectorXcd solve_gram(const Eigen::VectorXcd &r, bool transpose, int *iterations = nullptr) const;

private:
    LinearMap b_;
    Eigen::SparseMatrix<double> m_, mt_;
    double inner_tol_;
    int max_inner_;
    std::shared_ptr<long> inner_total_;
};

std::shared_ptr<CalderonPreconditioner> make_calderon_preconditioner(const BlockDiagonal &b,
                                                                     const Eigen::SparseMatrix<double> &m,
                                                                     const SolveConfig &cfg);

/// Assembled data of one multi-screen problem on one (possibly reduced) space.
struct ProblemSetup {
    Problem problem = Problem::dirichlet;
    KernelConfig kernel;
    Reduction reduction;
    IncidentWave wave;
    std::shared_ptr<const FunctionSpace> primal, dual;
    GalerkinMatrix A;
    Eigen::VectorXcd rhs;
    std::optional<BlockDiagonal> B;
    Eigen::SparseMatrix<double> M;
    double assembly_seconds = 0.0;
};

/// `cache`, when given, is consulted for the preconditioner's panel blocks.
ProblemSetup prepare_problem(const MultiScreen &screen, Problem problem, const IncidentWave &wave,
                             const Reduction &reduction, bool with_preconditioner, const SolveConfig &cfg,
                             BlockCache *cache = nullptr);

struct SolveReport {
    Problem problem = Problem::dirichlet;
    bool preconditioned = false;
    Eigen::VectorXcd coefficients;
    int iterations = 0;
    std::vector<double> residual_history;
    long inner_iteration_total = 0;
    bool converged = false;
    double final_residual = 0.0;
    std::optional<double> cond;
    std::optional<int> nullity;
    std::shared_ptr<const FunctionSpace> space;
    double solve_seconds = 0.0;

    int ndof() const { return static_cast<int>(coefficients.size()); }
};

/// Left-preconditioned (P A x = P g) or plain (A x = g) GMRES solve.
SolveReport solve_prepared(const ProblemSetup &setup, bool precondition, const SolveConfig &cfg);

SolveReport solve_dirichlet(const MultiScreen &screen, cplx kappa, const Reduction &reduction, bool precondition,
                            const SolveConfig &cfg = {}, const IncidentWave *wave = nullptr);
SolveReport solve_neumann(const MultiScreen &screen, cplx kappa, const Reduction &reduction, bool precondition,
                          const SolveConfig &cfg = {}, const IncidentWave *wave = nullptr);

struct ConditionResult {
    double cond = 0.0;
    int nullity = 0;
    std::vector<double> singular_values;  // descending
};

/// Largest dimension accepted by effective_condition_number.
inline constexpr int dense_svd_limit = 4000;

/// Singular values of A (or P A); nullity counts values below 1e-8 sigma_max.
ConditionResult effective_condition_number(const Eigen::MatrixXcd &a, const LinearMap *p = nullptr);

/// Singular values of a dense complex matrix, descending (LAPACK zgesdd).
std::vector<double> singular_values(Eigen::MatrixXcd a);

/// Columns P a_j of a preconditioned operator.
Eigen::MatrixXcd materialize(const Eigen::MatrixXcd &a, const LinearMap &p);

}  // namespace msbem

#endif  // MSBEM_SOLVER_HPP
