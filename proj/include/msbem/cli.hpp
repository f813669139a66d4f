/**
 * \file cli.hpp
 * \brief Command-line front end: geometry export, h-sweeps, condition-number
 * studies and probe evaluation, all emitting versioned CSV.
 */
#ifndef MSBEM_CLI_HPP
#define MSBEM_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "msbem/excitation.hpp"
#include "msbem/solver.hpp"

namespace msbem {

/// Bad command-line input; the message names the offending field.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char *csv_magic = "# msbem-csv v1";

/// "lf" (1), "mf" (10), or "re", "re+imi", "re-imi", "imi".
cplx parse_kappa(const std::string &text);
std::string format_kappa(cplx kappa);

Problem parse_problem(const std::string &text);

/// trijunction | mjunction:m | typeb, meshed with width h.
MultiScreen make_geometry(const std::string &spec, double h);
void check_geometry_spec(const std::string &spec);

/// Incident direction used with a geometry: +z, except -z for typeb.
Eigen::Vector3d default_direction(const std::string &geometry);

/// full | partial | single-strip | fixed-overlap[:delta]; the default delta
/// depends on the screen.
Reduction parse_reduction(const std::string &text, const MultiScreen &screen);
void check_reduction_spec(const std::string &text);

enum class PrecondMode { off, on, both };
PrecondMode parse_precond(const std::string &text);
std::string to_string(PrecondMode m);

/// Shortest round-trip decimal form, "." separator, "nan"/"inf" spelled out.
std::string format_number(double v);

struct SweepSpec {
    Problem problem = Problem::neumann;
    std::string kappa_text = "lf";
    std::string geometry = "trijunction";
    std::vector<double> h_list{0.4, 0.2};
    std::vector<std::string> reductions{"full"};
    PrecondMode precond = PrecondMode::both;
    SolveConfig solve;
    bool estimate_cond = false;
    bool deterministic = false;
    std::string output = "-";

    /// Throws UsageError naming the first bad field.
    void validate() const;
};

/// One CSV row per (h, reduction, preconditioner) in spec order.
void cmd_sweep(const SweepSpec &spec, std::ostream &os);

/// Writes sheet OFF files plus the manifest into `dir`.
void cmd_mesh(const std::string &geometry, double h, const std::filesystem::path &dir);

struct CondSpec {
    Problem problem = Problem::neumann;
    std::string kappa_text = "lf";
    std::string geometry = "trijunction";
    std::vector<double> h_list{0.4, 0.2, 0.1};
    std::string reduction = "full";
    SolveConfig solve;
    bool self_test = false;
    bool deterministic = false;
    std::string output = "-";

    void validate() const;
};

/// ((1 + |log h|) / (1 + |log 2h|))^2.
double predicted_growth_factor(double h);

/// Per h: ndof, cond_NP, cond_CP, nullity and the predicted growth factor.
/// With self_test the system is the identity of the same dimension.
void cmd_cond(const CondSpec &spec, std::ostream &os);

struct ProbeSpec {
    Problem problem = Problem::dirichlet;
    std::string kappa_text = "lf";
    std::string geometry = "trijunction";
    double h = 0.2;
    std::string reduction = "full";
    bool precondition = true;
    std::vector<Eigen::Vector3d> points;  // empty: default probes
    SolveConfig solve;
    bool deterministic = false;
    std::string output = "-";

    void validate() const;
};

/// Scattered field at the probe points, one row per point.
void cmd_probe(const ProbeSpec &spec, std::ostream &os);

/// Entry point of the msbem executable; returns the process exit code.
int run_cli(int argc, char **argv);

}  // namespace msbem

#endif  // MSBEM_CLI_HPP
