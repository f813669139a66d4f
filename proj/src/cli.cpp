#include "msbem/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "msbem/parallel.hpp"

namespace msbem {

namespace {

bool parse_double(std::string_view s, double &out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int &out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

cplx parse_kappa(const std::string &text) {
    if (text == "lf") return {1.0, 0.0};
    if (text == "mf") return {10.0, 0.0};
    const auto bad = [&text] { return UsageError("kappa: cannot parse '" + text + "'"); };
    if (text.empty()) throw bad();
    cplx k;
    if (text.back() != 'i') {
        double re = 0.0;
        if (!parse_double(text, re)) throw bad();
        k = {re, 0.0};
    } else {
        const std::string body = text.substr(0, text.size() - 1);
        // split at the last sign that is not an exponent sign or the leading one
        std::size_t split = std::string::npos;
        for (std::size_t i = body.size(); i-- > 1;)
            if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
                split = i;
                break;
            }
        double re = 0.0, im = 0.0;
        std::string ims = split == std::string::npos ? body : body.substr(split);
        if (ims == "+" || ims == "-" || ims.empty()) ims += "1";
        if (split != std::string::npos && !parse_double(body.substr(0, split), re)) throw bad();
        if (!parse_double(ims, im)) throw bad();
        k = {re, im};
    }
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw bad();
    if (k.real() < 0.0 || k.imag() < 0.0) throw UsageError("kappa: real and imaginary parts must be nonnegative");
    return k;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

std::string format_kappa(cplx kappa) {
    std::string s = format_number(kappa.real());
    if (kappa.imag() != 0.0) s += (kappa.imag() < 0 ? "" : "+") + format_number(kappa.imag()) + "i";
    return s;
}

Problem parse_problem(const std::string &text) {
    if (text == "dirichlet") return Problem::dirichlet;
    if (text == "neumann") return Problem::neumann;
    throw UsageError("problem: expected dirichlet or neumann, got '" + text + "'");
}

void check_geometry_spec(const std::string &spec) {
    if (spec == "trijunction" || spec == "typeb") return;
    const std::string prefix = "mjunction:";
    int m = 0;
    if (spec.rfind(prefix, 0) == 0 && parse_int(std::string_view(spec).substr(prefix.size()), m) && m >= 3) return;
    throw UsageError("geometry: expected trijunction, mjunction:m (m >= 3) or typeb, got '" + spec + "'");
}

namespace {
void check_reduction_for(const std::string &geometry, const std::string &reduction) {
    if (geometry == "typeb" && reduction != "full")
        throw UsageError("reductions: typeb screens only support full, got '" + reduction + "'");
}
}  // namespace

MultiScreen make_geometry(const std::string &spec, double h) {
    check_geometry_spec(spec);
    if (!(h > 0.0)) throw UsageError("h: mesh width must be positive");
    if (spec == "trijunction") return make_junction_screen(3, 1.0, h);
    if (spec == "typeb") return make_typeB_screen(h);
    int m = 0;
    parse_int(std::string_view(spec).substr(10), m);
    return make_junction_screen(m, 1.0, h);
}

Eigen::Vector3d default_direction(const std::string &geometry) {
    check_geometry_spec(geometry);
    return geometry == "typeb" ? Eigen::Vector3d(0, 0, -1) : Eigen::Vector3d(0, 0, 1);
}

void check_reduction_spec(const std::string &text) {
    if (text == "full" || text == "partial" || text == "single-strip" || text == "fixed-overlap") return;
    const std::string prefix = "fixed-overlap:";
    double d = 0.0;
    if (text.rfind(prefix, 0) == 0 && parse_double(std::string_view(text).substr(prefix.size()), d) && d > 0.0)
        return;
    throw UsageError("reduction: expected full, partial, single-strip or fixed-overlap[:delta], got '" + text + "'");
}

Reduction parse_reduction(const std::string &text, const MultiScreen &screen) {
    check_reduction_spec(text);
    if (text == "full") return Reduction::Full();
    if (text == "partial") return Reduction::Partial();
    if (text == "single-strip") return Reduction::SingleStrip();
    if (text == "fixed-overlap") return Reduction::FixedOverlap(default_overlap(screen));
    double d = 0.0;
    parse_double(std::string_view(text).substr(14), d);
    return Reduction::FixedOverlap(d);
}

PrecondMode parse_precond(const std::string &text) {
    if (text == "off" || text == "np") return PrecondMode::off;
    if (text == "on" || text == "cp") return PrecondMode::on;
    if (text == "both") return PrecondMode::both;
    throw UsageError("precond: expected on, off or both, got '" + text + "'");
}

std::string to_string(PrecondMode m) {
    switch (m) {
        case PrecondMode::off: return "off";
        case PrecondMode::on: return "on";
        default: return "both";
    }
}

namespace {

void check_h_list(const std::vector<double> &h) {
    if (h.empty()) throw UsageError("h_list: at least one mesh width is required");
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !std::isfinite(h[i])) throw UsageError("h_list: mesh widths must be positive");
        if (i > 0 && !(h[i] < h[i - 1])) throw UsageError("h_list: mesh widths must be strictly decreasing");
    }
}

void check_solve(const SolveConfig &c) {
    if (!(c.outer_tol > 0.0) || !(c.outer_tol < 1.0)) throw UsageError("tol: must lie in (0, 1)");
    if (!(c.inner_tol > 0.0) || !(c.inner_tol < 1.0)) throw UsageError("inner-tol: must lie in (0, 1)");
    if (c.max_outer < 1) throw UsageError("max-outer: must be positive");
    if (c.max_inner < 1) throw UsageError("max-inner: must be positive");
}

void check_kappa(const std::string &k) { parse_kappa(k); }

/// Writes to stdout for "-", otherwise to a file.
class Output {
public:
    explicit Output(const std::string &path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw std::runtime_error("cannot write output file '" + path + "'");
    }
    std::ostream &stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_solve_config(std::ostream &os, const SolveConfig &c, bool deterministic) {
    os << "# tol = " << format_number(c.outer_tol) << "\n";
    os << "# inner_tol = " << format_number(c.inner_tol) << "\n";
    os << "# max_outer = " << c.max_outer << "\n";
    os << "# max_inner = " << c.max_inner << "\n";
    os << "# quadrature_order = " << c.quadrature.order << "\n";
    os << "# quadrature_singular_order = " << c.quadrature.singular_order << "\n";
    os << "# quadrature_far_order = " << c.quadrature.far_order << "\n";
    os << "# quadrature_near_threshold = " << format_number(c.quadrature.near_threshold) << "\n";
    os << "# quadrature_far_threshold = " << format_number(c.quadrature.far_threshold) << "\n";
    os << "# deterministic = " << (deterministic ? "true" : "false") << "\n";
    os << "# threads = " << num_threads() << "\n";
}

std::string join_numbers(const std::vector<double> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
    return s;
}

}  // namespace

void SweepSpec::validate() const {
    check_kappa(kappa_text);
    check_geometry_spec(geometry);
    check_h_list(h_list);
    if (reductions.empty()) throw UsageError("reductions: at least one reduction is required");
    for (const std::string &r : reductions) {
        check_reduction_spec(r);
        check_reduction_for(geometry, r);
    }
    check_solve(solve);
}

void cmd_sweep(const SweepSpec &spec, std::ostream &os) {
    spec.validate();
    if (spec.deterministic) set_deterministic(true);
    const cplx kappa = parse_kappa(spec.kappa_text);
    IncidentWave wave;
    wave.kappa = kappa;
    wave.direction = default_direction(spec.geometry);

    os << csv_magic << "\n";
    os << "# command = sweep\n";
    os << "# problem = " << to_string(spec.problem) << "\n";
    os << "# kappa = " << format_kappa(kappa) << "\n";
    os << "# geometry = " << spec.geometry << "\n";
    os << "# h_list = " << join_numbers(spec.h_list) << "\n";
    os << "# reductions = ";
    for (std::size_t i = 0; i < spec.reductions.size(); ++i) os << (i ? ";" : "") << spec.reductions[i];
    os << "\n# precond = " << to_string(spec.precond) << "\n";
    os << "# estimate_cond = " << (spec.estimate_cond ? "true" : "false") << "\n";
    os << "# incident_direction = " << format_number(wave.direction[0]) << ";" << format_number(wave.direction[1])
       << ";" << format_number(wave.direction[2]) << "\n";
    write_solve_config(os, spec.solve, spec.deterministic);

    std::vector<PrecondMode> modes;
    if (spec.precond != PrecondMode::on) modes.push_back(PrecondMode::off);
    if (spec.precond != PrecondMode::off) modes.push_back(PrecondMode::on);

    bool header = false;
    for (double h : spec.h_list) {
        const MultiScreen screen = make_geometry(spec.geometry, h);
        const ProbeSet probes = default_probes(screen);
        if (!header) {
            os << "problem,kappa,geometry,reduction,h,ndof,nullity,precond,outer_iters,inner_iters_total,"
                  "final_residual,cond_est";
            for (std::size_t i = 1; i <= probes.points.size(); ++i) os << ",probe_re_" << i << ",probe_im_" << i;
            os << "\n";
            header = true;
        }
        BlockCache cache;
        for (const std::string &rtext : spec.reductions) {
            const Reduction red = parse_reduction(rtext, screen);
            const ProblemSetup setup =
                prepare_problem(screen, spec.problem, wave, red, spec.precond != PrecondMode::off, spec.solve, &cache);
            for (PrecondMode mode : modes) {
                const bool pc = mode == PrecondMode::on;
                const SolveReport rep = solve_prepared(setup, pc, spec.solve);
                std::string cond, nullity;
                if (spec.estimate_cond && setup.primal->dim() <= dense_svd_limit) {
                    ConditionResult cr;
                    if (pc) {
                        auto p = make_calderon_preconditioner(*setup.B, setup.M, spec.solve);
                        const LinearMap pm = [p](const Eigen::VectorXcd &x) { return p->apply(x); };
                        cr = effective_condition_number(setup.A.entries, &pm);
                    } else {
                        cr = effective_condition_number(setup.A.entries);
                    }
                    cond = format_number(cr.cond);
                    nullity = std::to_string(cr.nullity);
                }
                os << to_string(spec.problem) << "," << format_kappa(kappa) << "," << spec.geometry << ","
                   << red.name() << "," << format_number(h) << "," << setup.primal->dim() << "," << nullity << ","
                   << (pc ? "CP" : "NP") << "," << rep.iterations << "," << rep.inner_iteration_total << ","
                   << format_number(rep.final_residual) << "," << cond;
                if (rep.converged) {
                    const Eigen::VectorXcd f = scattered_field(rep, *setup.primal, spec.problem, kappa, probes);
                    for (Eigen::Index i = 0; i < f.size(); ++i)
                        os << "," << format_number(f[i].real()) << "," << format_number(f[i].imag());
                } else {
                    for (std::size_t i = 0; i < probes.points.size(); ++i) os << ",,";
                }
                os << "\n";
                os.flush();
            }
        }
    }
}

void cmd_mesh(const std::string &geometry, double h, const std::filesystem::path &dir) {
    const MultiScreen screen = make_geometry(geometry, h);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    save_screen(screen, dir);
}

void CondSpec::validate() const {
    check_kappa(kappa_text);
    check_geometry_spec(geometry);
    check_h_list(h_list);
    check_reduction_spec(reduction);
    check_reduction_for(geometry, reduction);
    check_solve(solve);
}

double predicted_growth_factor(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("mesh width must be positive");
    const double a = 1.0 + std::abs(std::log(h)), b = 1.0 + std::abs(std::log(2.0 * h));
    return (a / b) * (a / b);
}

void cmd_cond(const CondSpec &spec, std::ostream &os) {
    spec.validate();
    if (spec.deterministic) set_deterministic(true);
    const cplx kappa = parse_kappa(spec.kappa_text);
    IncidentWave wave;
    wave.kappa = kappa;
    wave.direction = default_direction(spec.geometry);

    os << csv_magic << "\n";
    os << "# command = cond\n";
    os << "# problem = " << to_string(spec.problem) << "\n";
    os << "# kappa = " << format_kappa(kappa) << "\n";
    os << "# geometry = " << spec.geometry << "\n";
    os << "# h_list = " << join_numbers(spec.h_list) << "\n";
    os << "# reduction = " << spec.reduction << "\n";
    os << "# self_test = " << (spec.self_test ? "true" : "false") << "\n";
    os << "# nullity_threshold = 1e-08\n";
    write_solve_config(os, spec.solve, spec.deterministic);
    os << "h,ndof,cond_NP,cond_CP,nullity,predicted_factor\n";

    for (double h : spec.h_list) {
        const MultiScreen screen = make_geometry(spec.geometry, h);
        const Reduction red = parse_reduction(spec.reduction, screen);
        ConditionResult np, cp;
        int ndof = 0;
        if (spec.self_test) {
            ndof = multitrace_space(screen, spec.problem, Side::primal, red).dim();
            const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(ndof, ndof);
            const LinearMap ident = [](const Eigen::VectorXcd &x) { return x; };
            np = effective_condition_number(id);
            cp = effective_condition_number(id, &ident);
        } else {
            const ProblemSetup setup = prepare_problem(screen, spec.problem, wave, red, true, spec.solve);
            ndof = setup.primal->dim();
            if (ndof > dense_svd_limit)
                throw std::runtime_error("cond: dimension " + std::to_string(ndof) + " exceeds the dense limit " +
                                         std::to_string(dense_svd_limit));
            auto p = make_calderon_preconditioner(*setup.B, setup.M, spec.solve);
            const LinearMap pm = [p](const Eigen::VectorXcd &x) { return p->apply(x); };
            np = effective_condition_number(setup.A.entries);
            cp = effective_condition_number(setup.A.entries, &pm);
        }
        os << format_number(h) << "," << ndof << "," << format_number(np.cond) << "," << format_number(cp.cond) << ","
           << np.nullity << "," << format_number(predicted_growth_factor(h)) << "\n";
        os.flush();
    }
}

void ProbeSpec::validate() const {
    check_kappa(kappa_text);
    check_geometry_spec(geometry);
    if (!(h > 0.0)) throw UsageError("h: mesh width must be positive");
    check_reduction_spec(reduction);
    check_reduction_for(geometry, reduction);
    check_solve(solve);
}

void cmd_probe(const ProbeSpec &spec, std::ostream &os) {
    spec.validate();
    if (spec.deterministic) set_deterministic(true);
    const cplx kappa = parse_kappa(spec.kappa_text);
    IncidentWave wave;
    wave.kappa = kappa;
    wave.direction = default_direction(spec.geometry);
    const MultiScreen screen = make_geometry(spec.geometry, spec.h);
    ProbeSet probes = default_probes(screen);
    if (!spec.points.empty()) probes.points = spec.points;
    validate_probes(screen, probes);
    const Reduction red = parse_reduction(spec.reduction, screen);
    const ProblemSetup setup = prepare_problem(screen, spec.problem, wave, red, spec.precondition, spec.solve);
    const SolveReport rep = solve_prepared(setup, spec.precondition, spec.solve);
    const Eigen::VectorXcd f = scattered_field(rep, *setup.primal, spec.problem, kappa, probes);

    os << csv_magic << "\n";
    os << "# command = probe\n";
    os << "# problem = " << to_string(spec.problem) << "\n";
    os << "# kappa = " << format_kappa(kappa) << "\n";
    os << "# geometry = " << spec.geometry << "\n";
    os << "# h = " << format_number(spec.h) << "\n";
    os << "# reduction = " << red.name() << "\n";
    os << "# precond = " << (spec.precondition ? "on" : "off") << "\n";
    os << "# ndof = " << setup.primal->dim() << "\n";
    os << "# outer_iters = " << rep.iterations << "\n";
    write_solve_config(os, spec.solve, spec.deterministic);
    os << "probe,x,y,z,re,im\n";
    for (std::size_t i = 0; i < probes.points.size(); ++i) {
        const Eigen::Vector3d &x = probes.points[i];
        os << i + 1 << "," << format_number(x[0]) << "," << format_number(x[1]) << "," << format_number(x[2]) << ","
           << format_number(f[static_cast<Eigen::Index>(i)].real()) << ","
           << format_number(f[static_cast<Eigen::Index>(i)].imag()) << "\n";
    }
}

// ---------------------------------------------------------------------------

namespace {

Eigen::Vector3d parse_point(const std::string &text) {
    std::stringstream ss(text);
    std::string part;
    std::vector<double> v;
    while (std::getline(ss, part, ',')) {
        double d = 0.0;
        if (!parse_double(part, d)) throw UsageError("point: cannot parse '" + text + "'");
        v.push_back(d);
    }
    if (v.size() != 3) throw UsageError("point: expected x,y,z, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

void add_solver_flags(CLI::App *cmd, SolveConfig &cfg, bool &deterministic) {
    cmd->add_option("--tol", cfg.outer_tol, "outer GMRES relative tolerance")->capture_default_str();
    cmd->add_option("--inner-tol", cfg.inner_tol, "inner Gram-solve tolerance")->capture_default_str();
    cmd->add_option("--max-outer", cfg.max_outer, "outer GMRES iteration cap")->capture_default_str();
    cmd->add_option("--max-inner", cfg.max_inner, "inner GMRES iteration cap")->capture_default_str();
    cmd->add_option("--quad-order", cfg.quadrature.order, "Gauss points per regular dimension, touching and near pairs")
        ->capture_default_str();
    cmd->add_option("--quad-singular-order", cfg.quadrature.singular_order,
                    "Gauss points per angular dimension of touching pairs")
        ->capture_default_str();
    cmd->add_flag("--deterministic", deterministic, "sequential, bit-stable mode");
}

}  // namespace

int run_cli(int argc, char **argv) {
    CLI::App app{"Boundary element solver for acoustic scattering by multi-screens"};
    // "--h" is the mesh width, so help is long-form only; subcommands inherit this.
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.footer("Worker threads are capped by the MSBEM_THREADS environment variable.");

    SweepSpec sweep;
    std::string sweep_problem = "neumann", sweep_precond = "both";
    auto *sw = app.add_subcommand("sweep", "iteration counts over a list of mesh widths");
    sw->add_option("--problem", sweep_problem, "dirichlet | neumann")->capture_default_str();
    sw->add_option("--kappa", sweep.kappa_text, "lf | mf | re[+imi]")->capture_default_str();
    sw->add_option("--geometry", sweep.geometry, "trijunction | mjunction:m | typeb")->capture_default_str();
    sw->add_option("--h", sweep.h_list, "mesh widths, strictly decreasing")->delimiter(',')->capture_default_str();
    sw->add_option("--reductions", sweep.reductions, "full,partial,single-strip,fixed-overlap[:delta]")
        ->delimiter(',')
        ->capture_default_str();
    sw->add_option("--precond", sweep_precond, "on | off | both")->capture_default_str();
    sw->add_flag("--cond", sweep.estimate_cond, "also estimate effective condition numbers (dense SVD)");
    sw->add_option("-o,--output", sweep.output, "CSV path, - for stdout")->capture_default_str();
    add_solver_flags(sw, sweep.solve, sweep.deterministic);

    std::string mesh_geometry = "trijunction", mesh_dir;
    double mesh_h = 0.5;
    auto *me = app.add_subcommand("mesh", "write sheet meshes and the covering manifest");
    me->add_option("--geometry", mesh_geometry, "trijunction | mjunction:m | typeb")->capture_default_str();
    me->add_option("--h", mesh_h, "mesh width")->capture_default_str();
    me->add_option("-o,--output", mesh_dir, "output directory")->required();

    CondSpec cond;
    std::string cond_problem = "neumann";
    auto *co = app.add_subcommand("cond", "effective condition numbers with and without preconditioning");
    co->add_option("--problem", cond_problem, "dirichlet | neumann")->capture_default_str();
    co->add_option("--kappa", cond.kappa_text, "lf | mf | re[+imi]")->capture_default_str();
    co->add_option("--geometry", cond.geometry, "trijunction | mjunction:m | typeb")->capture_default_str();
    co->add_option("--h", cond.h_list, "mesh widths, strictly decreasing")->delimiter(',')->capture_default_str();
    co->add_option("--reduction", cond.reduction, "full | partial | single-strip | fixed-overlap[:delta]")
        ->capture_default_str();
    co->add_flag("--self-test", cond.self_test, "use the identity system");
    co->add_option("-o,--output", cond.output, "CSV path, - for stdout")->capture_default_str();
    add_solver_flags(co, cond.solve, cond.deterministic);

    ProbeSpec probe;
    std::string probe_problem = "dirichlet", probe_precond = "on";
    std::vector<std::string> probe_points;
    auto *pr = app.add_subcommand("probe", "scattered field at probe points");
    pr->add_option("--problem", probe_problem, "dirichlet | neumann")->capture_default_str();
    pr->add_option("--kappa", probe.kappa_text, "lf | mf | re[+imi]")->capture_default_str();
    pr->add_option("--geometry", probe.geometry, "trijunction | mjunction:m | typeb")->capture_default_str();
    pr->add_option("--h", probe.h, "mesh width")->capture_default_str();
    pr->add_option("--reduction", probe.reduction, "full | partial | single-strip | fixed-overlap[:delta]")
        ->capture_default_str();
    pr->add_option("--precond", probe_precond, "on | off")->capture_default_str();
    pr->add_option("--point", probe_points, "probe point x,y,z (repeatable)");
    pr->add_option("-o,--output", probe.output, "CSV path, - for stdout")->capture_default_str();
    add_solver_flags(pr, probe.solve, probe.deterministic);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sw->parsed()) {
            sweep.problem = parse_problem(sweep_problem);
            sweep.precond = parse_precond(sweep_precond);
            sweep.validate();
            Output out(sweep.output);
            cmd_sweep(sweep, out.stream());
        } else if (me->parsed()) {
            cmd_mesh(mesh_geometry, mesh_h, mesh_dir);
        } else if (co->parsed()) {
            cond.problem = parse_problem(cond_problem);
            cond.validate();
            Output out(cond.output);
            cmd_cond(cond, out.stream());
        } else if (pr->parsed()) {
            probe.problem = parse_problem(probe_problem);
            const PrecondMode m = parse_precond(probe_precond);
            if (m == PrecondMode::both) throw UsageError("precond: probe takes on or off");
            probe.precondition = m == PrecondMode::on;
            for (const std::string &p : probe_points) probe.points.push_back(parse_point(p));
            probe.validate();
            Output out(probe.output);
            cmd_probe(probe, out.stream());
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace msbem
