// Acceptance checks, one PASS/FAIL line per criterion. Run with criterion
// numbers as arguments to select a subset; progress goes to stderr.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "msbem/cli.hpp"
#include "msbem/excitation.hpp"
#include "msbem/solver.hpp"
#include "oracles.hpp"

using namespace msbem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << "[violated] " << what << "; ";
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_diff(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b) { return (a - b).norm() / b.norm(); }

const std::vector<std::pair<std::string, std::function<Reduction(const MultiScreen &)>>> &reductions() {
    static const std::vector<std::pair<std::string, std::function<Reduction(const MultiScreen &)>>> r{
        {"full", [](const MultiScreen &) { return Reduction::Full(); }},
        {"partial", [](const MultiScreen &) { return Reduction::Partial(); }},
        {"single-strip", [](const MultiScreen &) { return Reduction::SingleStrip(); }},
        {"fixed-overlap", [](const MultiScreen &s) { return Reduction::FixedOverlap(default_overlap(s)); }},
    };
    return r;
}

double max_column_residual(const Eigen::MatrixXcd &a, const Eigen::MatrixXd &z) {
    const double an = a.norm();
    double worst = 0.0;
    for (int c = 0; c < z.cols(); ++c) {
        const Eigen::VectorXcd zc = z.col(c).cast<cplx>();
        worst = std::max(worst, (a * zc).norm() / (an * zc.norm()));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Low-frequency trijunction sweep shared by criteria 3, 4 and 5.

struct Cell {
    int ndof = 0;
    int np_iters = 0, cp_iters = 0;
    bool converged = false;
    Eigen::VectorXcd np_field, cp_field;
};

struct LevelData {
    std::map<std::pair<Problem, std::string>, Cell> cells;
    std::optional<ConditionResult> cond_np, cond_cp;  // Neumann, Full
};

class TrijunctionSweep {
public:
    const LevelData &level(double h, bool with_cond) {
        auto it = levels_.find(h);
        if (it != levels_.end() && (!with_cond || it->second.cond_np)) return it->second;
        LevelData &d = levels_[h];
        const MultiScreen screen = make_junction_screen(3, 1.0, h);
        const ProbeSet probes = default_probes(screen);
        SolveConfig cfg;
        IncidentWave wave;
        wave.kappa = 1.0;
        BlockCache cache;
        for (Problem p : {Problem::dirichlet, Problem::neumann})
            for (const auto &[name, make] : reductions()) {
                const auto key = std::make_pair(p, name);
                const bool need_cond = with_cond && p == Problem::neumann && name == "full";
                if (d.cells.count(key) && !need_cond) continue;
                const auto t0 = std::chrono::steady_clock::now();
                const ProblemSetup setup = prepare_problem(screen, p, wave, make(screen), true, cfg, &cache);
                const SolveReport np = solve_prepared(setup, false, cfg);
                const SolveReport cp = solve_prepared(setup, true, cfg);
                Cell c;
                c.ndof = np.ndof();
                c.np_iters = np.iterations;
                c.cp_iters = cp.iterations;
                c.converged = np.converged && cp.converged;
                if (c.converged) {
                    c.np_field = scattered_field(np, *setup.primal, p, wave.kappa, probes);
                    c.cp_field = scattered_field(cp, *setup.primal, p, wave.kappa, probes);
                }
                d.cells[key] = c;
                if (need_cond) {
                    const auto pre = make_calderon_preconditioner(*setup.B, setup.M, cfg);
                    const LinearMap pm = [&pre](const Eigen::VectorXcd &x) { return pre->apply(x); };
                    d.cond_np = effective_condition_number(setup.A.entries);
                    d.cond_cp = effective_condition_number(setup.A.entries, &pm);
                }
                std::cerr << "  h=" << h << " " << to_string(p) << " " << name << " ndof=" << c.ndof
                          << " NP=" << c.np_iters << " CP=" << c.cp_iters << " (" << fmt(seconds_since(t0)) << " s)\n";
            }
        return d;
    }

private:
    std::map<double, LevelData> levels_;
};

TrijunctionSweep &sweep() {
    static TrijunctionSweep s;
    return s;
}

const std::vector<double> sweep_h{0.4, 0.2, 0.1, 0.05};

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome o;
    const KernelConfig k{1.0};
    for (double h : {0.5, 0.25}) {
        const MultiScreen s = make_junction_screen(3, 1.0, h);
        const int n = static_cast<int>(std::lround(1.0 / h));
        int sheet_triangles = 0;
        for (const TriMesh &m : s.sheets()) sheet_triangles += m.num_triangles();

        const FunctionSpace xd = multitrace_space(s, Problem::dirichlet, Side::primal);
        const Eigen::MatrixXcd v = assemble_single_layer(xd, xd, k).entries;
        const Eigen::MatrixXd zd = singletrace_basis(s, xd);
        const int nv = effective_condition_number(v).nullity;
        const double rv = max_column_residual(v, zd);
        o.require(nv == sheet_triangles, "n=" + std::to_string(n) + " nullity(V)=" + std::to_string(nv) +
                                             " vs " + std::to_string(sheet_triangles));
        o.require(zd.cols() == sheet_triangles, "single-trace columns for V");
        o.require(rv <= 1e-8, "V residual " + fmt(rv));

        const FunctionSpace xn = multitrace_space(s, Problem::neumann, Side::primal);
        const Eigen::MatrixXcd w = assemble_hypersingular(xn, xn, k).entries;
        const Eigen::MatrixXd zn = singletrace_basis(s, xn);
        const int nw = effective_condition_number(w).nullity;
        const double rw = max_column_residual(w, zn);
        o.require(nw == zn.cols(), "n=" + std::to_string(n) + " nullity(W)=" + std::to_string(nw) + " vs " +
                                       std::to_string(zn.cols()));
        o.require(rw <= 1e-8, "W residual " + fmt(rw));
        o.detail << "n=" << n << ": nullity V " << nv << "/" << sheet_triangles << " res " << fmt(rv) << ", nullity W "
                 << nw << "/" << zn.cols() << " res " << fmt(rw) << "; ";
    }
    return o;
}

Outcome criterion2() {
    Outcome o;
    double worst = 0.0;
    for (double h : {0.5, 0.25}) {
        const MultiScreen s = make_junction_screen(3, 1.0, h);
        for (Problem p : {Problem::dirichlet, Problem::neumann}) {
            const FunctionSpace x = multitrace_space(s, p, Side::primal);
            const Eigen::MatrixXd z = singletrace_basis(s, x);
            for (double kappa : {1.0, 10.0}) {
                IncidentWave w;
                w.kappa = kappa;
                const Eigen::VectorXcd g = assemble_rhs(x, w, p);
                for (int c = 0; c < z.cols(); ++c) {
                    const Eigen::VectorXcd zc = z.col(c).cast<cplx>();
                    worst = std::max(worst, std::abs((g.array() * zc.array()).sum()) / (g.norm() * zc.norm()));
                }
            }
        }
    }
    o.require(worst <= 1e-10, "max |<rhs,z>|/(|rhs||z|) = " + fmt(worst));
    o.detail << "max |<rhs,z>|/(|rhs||z|) = " << fmt(worst) << " (tol 1e-10)";
    return o;
}

Outcome criterion3() {
    Outcome o;
    const LevelData &d = sweep().level(0.1, false);
    for (Problem p : {Problem::dirichlet, Problem::neumann}) {
        double worst = 0.0;
        for (const auto &[a, ma] : reductions())
            for (const auto &[b, mb] : reductions()) {
                if (a >= b) continue;
                const Cell &ca = d.cells.at({p, a}), &cb = d.cells.at({p, b});
                if (!ca.converged || !cb.converged) {
                    o.require(false, to_string(p) + " " + a + "/" + b + " not converged");
                    continue;
                }
                worst = std::max({worst, rel_diff(ca.cp_field, cb.cp_field), rel_diff(ca.np_field, cb.np_field)});
            }
        o.require(worst <= 1e-3, to_string(p) + " pairwise field difference " + fmt(worst));
        o.detail << to_string(p) << " max pairwise difference " << fmt(worst) << "; ";
    }
    return o;
}

Outcome criterion4() {
    Outcome o;
    for (double h : sweep_h) sweep().level(h, false);
    for (Problem p : {Problem::dirichlet, Problem::neumann})
        for (const auto &[name, make] : reductions()) {
            std::vector<int> np, cp;
            for (double h : sweep_h) {
                const Cell &c = sweep().level(h, false).cells.at({p, name});
                np.push_back(c.np_iters);
                cp.push_back(c.cp_iters);
                o.require(c.converged, to_string(p) + " " + name + " h=" + fmt(h) + " converged");
            }
            const std::string tag = to_string(p) + " " + name;
            const std::size_t n = sweep_h.size();
            o.require(cp[n - 2] < np[n - 2] && cp[n - 1] < np[n - 1], tag + " CP < NP at the two finest h");
            for (std::size_t i = 1; i < n; ++i) o.require(np[i] > np[i - 1], tag + " NP strictly increasing");
            o.require(cp[n - 1] <= 1.35 * cp[n - 2], tag + " CP growth at the finest halving");
            o.detail << tag << " NP";
            for (int v : np) o.detail << " " << v;
            o.detail << " CP";
            for (int v : cp) o.detail << " " << v;
            o.detail << "; ";
        }
    return o;
}

Outcome criterion5() {
    Outcome o;
    std::vector<double> np, cp;
    for (double h : sweep_h) {
        const LevelData &d = sweep().level(h, true);
        np.push_back(d.cond_np->cond);
        cp.push_back(d.cond_cp->cond);
        o.require(d.cond_np->nullity == d.cond_cp->nullity, "nullity preserved at h=" + fmt(h));
    }
    for (std::size_t i = 1; i < sweep_h.size(); ++i) {
        const double h = sweep_h[i - 1];
        const double bound = 1.5 * predicted_growth_factor(h / 2.0);
        const double rcp = cp[i] / cp[i - 1], rnp = np[i] / np[i - 1];
        o.require(rcp <= bound, "cond_CP ratio " + fmt(rcp) + " > " + fmt(bound) + " at h=" + fmt(h));
        o.require(rnp > rcp, "cond_NP ratio " + fmt(rnp) + " not above cond_CP ratio " + fmt(rcp) + " at h=" + fmt(h));
        o.detail << "h " << fmt(h) << "->" << fmt(h / 2) << ": CP x" << fmt(rcp) << " (bound " << fmt(bound) << "), NP x"
                 << fmt(rnp) << "; ";
    }
    o.detail << "cond_CP";
    for (double c : cp) o.detail << " " << fmt(c);
    o.detail << ", cond_NP";
    for (double c : np) o.detail << " " << fmt(c);
    return o;
}

void check_partition_of_unity(const FunctionSpace &dual_p1, Outcome &o, double &worst) {
    for (int b = 0; b < dual_p1.num_blocks(); ++b) {
        const FunctionSpace blk = dual_p1.block(b);
        const auto vals = blk.element_corner_values(Eigen::VectorXd::Ones(blk.dim()));
        std::vector<bool> touched(vals.size(), false);
        for (const Piece &pc : blk.pieces) touched[pc.element] = true;
        for (std::size_t t = 0; t < vals.size(); ++t)
            if (touched[t])
                for (double v : vals[t]) worst = std::max(worst, std::abs(v - 1.0));
    }
    o.require(worst <= 1e-12, "dual-p1 partition of unity error " + fmt(worst));
}

Outcome criterion6() {
    Outcome o;
    double pou = 0.0;
    int worst_inner = 0, checked = 0;
    double worst_gram_res = 0.0;
    SolveConfig cfg;
    for (double h : {0.2, 0.1}) {
        std::vector<MultiScreen> screens{make_junction_screen(3, 1.0, h), make_typeB_screen(h)};
        for (const MultiScreen &s : screens) {
            const bool junction = s.kind() == ScreenKind::junction;
            const auto &reds = reductions();
            for (std::size_t r = 0; r < (junction ? reds.size() : 1); ++r) {
                const Reduction red = reds[r].second(s);
                const SpacePair d = multitrace_pair(s, Problem::dirichlet, red);
                const SpacePair n = multitrace_pair(s, Problem::neumann, red);
                check_partition_of_unity(d.dual, o, pou);
                for (int b = 0; b < d.primal.num_blocks(); ++b) {
                    // dual-p1 dimension = triangle count of the supporting patch
                    o.require(d.dual.block(b).dim() == static_cast<int>(d.primal.supports[b].triangles.size()),
                              "dual-p1 dimension vs triangle count");
                    o.require(n.dual.block(b).dim() == n.primal.block(b).dim(),
                              "dual-constant dimension vs zero-boundary p1");
                }
                for (const SpacePair *sp : {&d, &n}) {
                    const Eigen::SparseMatrix<double> m = assemble_duality(sp->primal, sp->dual);
                    const CalderonPreconditioner pre([](const Eigen::VectorXcd &x) { return x; }, m, cfg.inner_tol,
                                                     cfg.max_inner);
                    const Eigen::VectorXcd rhs = Eigen::VectorXcd::LinSpaced(m.rows(), cplx(1, -1), cplx(-2, 0.5));
                    for (bool tr : {false, true}) {
                        int its = 0;
                        const Eigen::VectorXcd x = pre.solve_gram(rhs, tr, &its);
                        const Eigen::MatrixXd md(m);
                        const Eigen::VectorXcd res =
                            (tr ? Eigen::MatrixXd(md.transpose()) : md).cast<cplx>() * x - rhs;
                        worst_gram_res = std::max(worst_gram_res, res.norm() / rhs.norm());
                        worst_inner = std::max(worst_inner, its);
                        o.require(its <= m.rows(), "inner iterations within the dimension");
                        ++checked;
                    }
                }
            }
        }
    }
    // the standalone constructions on plain sheets
    for (double h : {0.5, 0.25, 0.1}) {
        const MultiScreen s = make_junction_screen(3, 1.0, h);
        const TriMesh &sheet = s.sheets()[0];
        o.require(dual_constant_space(sheet).dim() == continuous_p1_space(sheet, true).dim(),
                  "sheet dual-constant dimension");
        o.require(dual_p1_space(sheet).dim() == sheet.num_triangles(), "sheet dual-p1 dimension");
        check_partition_of_unity(dual_p1_space(sheet), o, pou);
    }
    o.require(worst_gram_res <= 2e-12 * 1.01, "Gram residual " + fmt(worst_gram_res));
    o.detail << "partition of unity error " << fmt(pou) << ", " << checked << " Gram solves, max inner iterations "
             << worst_inner << ", max residual " << fmt(worst_gram_res);
    return o;
}

Outcome criterion7() {
    Outcome o;
    using oracle::Tri3;
    using oracle::V3;
    const Tri3 unit{V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0)};
    struct Case {
        const char *name;
        Tri3 t;
        std::array<int, 3> tid;
    };
    const std::vector<Case> cases{
        {"coincident", unit, {0, 1, 2}},
        {"edge", {V3(1, 0, 0), V3(1, 1, 0), V3(0, 1, 0)}, {1, 3, 2}},
        {"bent edge", {V3(1, 0, 0), V3(0.8, 0.9, 0.6), V3(0, 1, 0)}, {1, 3, 2}},
        {"vertex", {V3(0, 0, 0), V3(0, -1, 0), V3(-1, 0, 0)}, {0, 4, 5}},
        {"bent vertex", {V3(0, 0, 0), V3(-0.3, -1, 0.4), V3(-1, 0, 0.7)}, {0, 4, 5}},
    };
    const HelmholtzKernel k0(0.0);
    const Corners cu{unit[0], unit[1], unit[2]};
    for (const Case &c : cases) {
        const cplx v = sauter_schwab_integral(k0, cu, {0, 1, 2}, {c.t[0], c.t[1], c.t[2]}, c.tid, QuadratureConfig{});
        const double ref = oracle::laplace_pair(unit, c.t);
        const double err = std::abs(v - ref) / ref;
        o.require(err <= 1e-6, std::string(c.name) + " relative error " + fmt(err));
        o.detail << c.name << " " << fmt(err) << "; ";
    }
    // well-separated pair on the tensor Gauss tier against an independent tensor Gauss
    const HelmholtzKernel k(2.0);
    const Tri3 far{V3(10, 2, 1), V3(10.8, 2.3, 1), V3(10.2, 3, 1.5)};
    QuadratureConfig q;
    q.near_threshold = q.far_threshold = 1e9;
    q.order = 6;
    const Eigen::Vector3d fs(1.0, 0.5, 0.25), ft(0.3, 1.0, 0.7);
    const cplx v = sauter_schwab_integral(k, cu, {0, 1, 2}, {far[0], far[1], far[2]}, {3, 4, 5}, q, fs, ft);
    const cplx ref = oracle::tensor_gauss([&](const V3 &x, const V3 &y) { return k(x, y); }, unit, far, 12, fs, ft);
    const double err = std::abs(v - ref) / std::abs(ref);
    o.require(err <= 1e-10, "well-separated relative error " + fmt(err));
    o.detail << "well-separated " << fmt(err);
    return o;
}

Outcome criterion8() {
    Outcome o;
    SolveConfig cfg;
    IncidentWave wave;
    wave.kappa = 10.0;
    wave.direction = Eigen::Vector3d(0, 0, -1);
    const std::vector<double> hs{0.2, 0.1, 0.05};
    for (Problem p : {Problem::neumann, Problem::dirichlet}) {
        std::vector<int> np, cp;
        for (double h : hs) {
            const auto t0 = std::chrono::steady_clock::now();
            const MultiScreen s = make_typeB_screen(h);
            const ProblemSetup setup = prepare_problem(s, p, wave, Reduction::Full(), true, cfg);
            const SolveReport a = solve_prepared(setup, false, cfg);
            const SolveReport b = solve_prepared(setup, true, cfg);
            o.require(a.converged && b.converged, to_string(p) + " h=" + fmt(h) + " converged");
            np.push_back(a.iterations);
            cp.push_back(b.iterations);
            std::cerr << "  typeb h=" << h << " " << to_string(p) << " ndof=" << a.ndof() << " NP=" << a.iterations
                      << " CP=" << b.iterations << " (" << fmt(seconds_since(t0)) << " s)\n";
        }
        if (p == Problem::neumann) o.require(cp.back() < np.back(), "neumann CP < NP at the finest h");
        o.detail << to_string(p) << " NP";
        for (int v : np) o.detail << " " << v;
        o.detail << " CP";
        for (int v : cp) o.detail << " " << v;
        o.detail << "; ";
    }
    return o;
}

Outcome criterion9() {
    Outcome o;
    const MultiScreen s = make_junction_screen(3, 1.0, 0.2);
    double sym = 0.0;
    for (double kappa : {1.0, 10.0}) {
        const KernelConfig k{kappa};
        const FunctionSpace xd = multitrace_space(s, Problem::dirichlet, Side::primal);
        const FunctionSpace xn = multitrace_space(s, Problem::neumann, Side::primal);
        const Eigen::MatrixXcd v = assemble_single_layer(xd, xd, k).entries;
        const Eigen::MatrixXcd w = assemble_hypersingular(xn, xn, k).entries;
        sym = std::max({sym, (v - v.transpose()).norm() / v.norm(), (w - w.transpose()).norm() / w.norm()});
    }
    o.require(sym <= 1e-8, "symmetry defect " + fmt(sym));

    double lin = 0.0, gauge = 0.0;
    const ProbeSet probes = default_probes(s);
    for (Problem p : {Problem::dirichlet, Problem::neumann}) {
        IncidentWave w1, w2;
        w2.amplitude = cplx(-1.5, 2.5);
        SolveConfig cfg;
        const ProblemSetup s1 = prepare_problem(s, p, w1, Reduction::Full(), true, cfg);
        const ProblemSetup s2 = prepare_problem(s, p, w2, Reduction::Full(), true, cfg);
        const SolveReport r1 = solve_prepared(s1, true, cfg);
        const SolveReport r2 = solve_prepared(s2, true, cfg);
        const Eigen::VectorXcd u1 = scattered_field(r1, *s1.primal, p, w1.kappa, probes);
        const Eigen::VectorXcd u2 = scattered_field(r2, *s2.primal, p, w2.kappa, probes);
        lin = std::max({lin, rel_diff(r2.coefficients, w2.amplitude * r1.coefficients),
                        rel_diff(u2, w2.amplitude * u1)});

        const Eigen::MatrixXd z = singletrace_basis(s, *s1.primal);
        for (int trial = 0; trial < 3; ++trial) {
            const Eigen::VectorXd mix = Eigen::VectorXd::LinSpaced(z.cols(), -1.0 + trial, 1.0 + 0.5 * trial);
            Eigen::VectorXcd shift = (z * mix).cast<cplx>() * cplx(0.6, -0.8);
            shift *= (1.0 + trial) * r1.coefficients.norm() / shift.norm();
            const Eigen::VectorXcd u = scattered_field(r1.coefficients + shift, *s1.primal, p, w1.kappa, probes);
            gauge = std::max(gauge, rel_diff(u, u1));
        }
    }
    o.require(lin <= 1e-10, "linearity defect " + fmt(lin));
    o.require(gauge <= 1e-6, "gauge defect " + fmt(gauge));
    o.detail << "symmetry " << fmt(sym) << ", linearity " << fmt(lin) << ", gauge " << fmt(gauge);
    return o;
}

}  // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
        {"nullspace conformity", criterion1},
        {"right-hand side consistency", criterion2},
        {"reductions radiate the same field", criterion3},
        {"preconditioning reduces iterations", criterion4},
        {"condition number growth", criterion5},
        {"dual-space properties", criterion6},
        {"quadrature against oracles", criterion7},
        {"type-B screen", criterion8},
        {"symmetry, linearity, gauge invariance", criterion9},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
    bool ok = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        std::cerr << "criterion " << id << " (" << all[i].first << ")...\n";
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].second();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        ok = ok && o.pass;
        std::cout << "criterion " << id << " [" << all[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " ("
                  << o.detail.str() << ") " << fmt(seconds_since(t0)) << " s" << std::endl;
    }
    return ok ? 0 : 1;
}
