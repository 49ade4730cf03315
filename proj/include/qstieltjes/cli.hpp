#pragma once

// Command-line front end. run() parses arguments, dispatches to the float or
// exact backend, writes a report and maps the outcome to an exit status:
//   0 all checks pass, 1 a check failed, 2 usage / parse / precondition error,
//   3 numerical failure (divergence, pole, truncation).

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "report.hpp"

namespace qstieltjes::cli {

enum ExitCode : int { ok = 0, check_failed = 1, usage = 2, numerical = 3 };

struct Options {
    std::string command;
    std::string family;
    std::string mode = "float";
    int precision = default_digits10;
    std::string tol;
    long points = 20;
    std::string k_range = "0..8";
    std::string t;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string out;
    unsigned jobs = 1;
    long rep = 20;
    long n_terms = 12;
    long n_max = 6;
    bool keep_going = false;
    bool timing = false;
    std::string perturb;
};

/// "a..b" or a single "k".
inline std::pair<long, long> parse_range(const std::string& text)
{
    auto to_long = [&](const std::string& s) {
        const Rational v = parse_rational(s);
        if (denominator(v) != 1) throw Error(ErrorKind::parse, "range bound is not an integer: '" + s + "'");
        return static_cast<long>(numerator(v));
    };
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const long k = to_long(text);
        return {k, k};
    }
    return {to_long(text.substr(0, dots)), to_long(text.substr(dots + 2))};
}

/// A rational literal, or 1e-N as shorthand for 10^{-N}.
inline Rational parse_tolerance(const std::string& text)
{
    if (text.rfind("1e-", 0) == 0) {
        const Rational e = parse_rational(text.substr(3));
        if (denominator(e) != 1 || e <= 0) throw Error(ErrorKind::parse, "bad tolerance '" + text + "'");
        return Rational(BigInt(1), boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(numerator(e))));
    }
    const Rational v = parse_rational(text);
    if (v <= 0) throw Error(ErrorKind::parse, "tolerance must be positive");
    return v;
}

inline std::vector<Rational> parse_t_list(const std::string& text)
{
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    if (out.empty()) throw Error(ErrorKind::parse, "empty --t list");
    return out;
}

inline Perturbation parse_perturb(const std::string& text)
{
    Perturbation p;
    const Rational one_percent(101, 100);
    if (text.empty()) return p;
    if (text == "tau") p.tau_factor = one_percent;
    else if (text == "c") p.c_factor = one_percent;
    else if (text == "moment") p.moment_factor = one_percent;
    else if (text == "tau-printed") p.tau_as_printed = true;
    else throw Error(ErrorKind::parse, "unknown --perturb '" + text + "' (tau, c, moment, tau-printed)");
    return p;
}

/// "kind:key=value,..." parses directly; a bare kind draws parameters from --seed.
inline FamilySpec resolve_family(const Options& o)
{
    if (o.family.empty()) throw Error(ErrorKind::parse, "--family is required for " + o.command);
    if (o.family.find(':') != std::string::npos) return FamilySpec::parse(o.family);
    for (FamilyKind kind : all_families)
        if (to_string(kind) == o.family) {
            std::mt19937_64 rng(o.seed);
            return draw_spec(kind, rng, o.mode == "exact");
        }
    throw Error(ErrorKind::parse, "unknown family '" + o.family + "'");
}

template <Scalar T>
class Runner {
public:
    Runner(const Options& o, VerificationReport& rep) : o_(o), rep_(rep)
    {
        tol_ = o.tol.empty() ? std::nullopt : std::optional<Rational>(parse_tolerance(o.tol));
        rep_.tol = format(QContext<T>(Rational(1, 2), o.precision, tol_).tol(), 6);
        std::tie(k_first_, k_last_) = parse_range(o.k_range);
        if (o.points < 1) throw Error(ErrorKind::parse, "--points must be positive");
        if (o.rep < 1) throw Error(ErrorKind::parse, "--rep must be positive");
        if (o.n_terms < 1) throw Error(ErrorKind::parse, "--n-terms must be positive");
        if (o.n_max < 1) throw Error(ErrorKind::parse, "--n must be positive");
        if (o.jobs < 1) throw Error(ErrorKind::parse, "--jobs must be positive");
    }

    void run()
    {
        const std::string& c = o_.command;
        if (c == "verify-identities") return identities();
        make_family();
        if (c == "moments") return moments();
        if (c == "stieltjes") return stieltjes();
        if (c == "verify-theorem") {
            (void)theorem();
            return;
        }
        if (c == "polys") return polys();
        if (c == "pade") return pade();
        if (c == "verify-all") return verify_all();
        throw Error(ErrorKind::parse, "unknown command " + c);
    }

private:
    void make_family()
    {
        const FamilySpec spec = resolve_family(o_);
        ctx_.emplace(spec.q, o_.precision, tol_);
        fam_.emplace(spec, *ctx_, parse_perturb(o_.perturb));
        rep_.family = spec.str();
        SweepOptions sw;
        sw.points = o_.points;
        sw.k_first = k_first_;
        sw.k_last = k_last_;
        if (!o_.t.empty()) sw.t_values = parse_t_list(o_.t);
        sw.n_max = o_.n_max;
        sw.jobs = o_.jobs;
        checks_.emplace(*fam_, sw);
        rep_.sweep["k_range"] = std::to_string(k_first_) + ".." + std::to_string(k_last_);
        auto grid = nlohmann::ordered_json::array();
        for (const auto& t : checks_->t_grid()) grid.push_back(to_string(t));
        rep_.sweep["t_grid"] = std::move(grid);
        rep_.sweep["seed"] = o_.seed;
        if (!o_.perturb.empty()) rep_.sweep["perturb"] = o_.perturb;
    }

    [[nodiscard]] DrawOptions draws() const
    {
        DrawOptions d;
        d.reps = o_.rep;
        d.seed = o_.seed;
        d.digits10 = o_.precision;
        d.tol = tol_;
        d.jobs = o_.jobs;
        return d;
    }

    static std::string str(const T& v) { return format(v, 30); }

    /// Appends a check; returns false when the run should stop (fail-fast).
    bool add(CheckRecord rec)
    {
        const bool pass = rec.pass;
        rep_.checks.push_back(std::move(rec));
        return pass || o_.keep_going;
    }

    bool add_all(std::vector<CheckRecord> recs)
    {
        for (auto& r : recs)
            if (!add(std::move(r))) return false;
        return true;
    }

    void identities()
    {
        rep_.sweep["rep"] = o_.rep;
        rep_.sweep["seed"] = o_.seed;
        if (!add_all(qcore_identity_checks<T>(draws()))) return;
        add_all(qhyper_identity_checks<T>(draws()));
    }

    void moments()
    {
        add(checks_->moments());
        const auto closed = closed_moments(*fam_, k_last_);
        const auto brute = bruteforce_qmoments(checks_->measure(), k_last_, *ctx_);
        auto rows = nlohmann::ordered_json::array();
        for (long k = k_first_; k <= k_last_; ++k) {
            nlohmann::ordered_json row;
            row["k"] = k;
            row["closed"] = str(closed[k]);
            row["brute"] = str(brute[k]);
            rows.push_back(std::move(row));
        }
        rep_.data["moments"] = std::move(rows);
        rep_.data["truncation_last"] = checks_->measure().last();
    }

    void stieltjes()
    {
        add(checks_->representations());
        auto rows = nlohmann::ordered_json::array();
        for (const auto& t : checks_->t_grid()) {
            const EvalPoint<T> at(ctx_->num(t));
            const auto r = compare_representations(*fam_, checks_->measure(), at);
            const auto series = stieltjes_series(*fam_, at, o_.n_terms);
            nlohmann::ordered_json row;
            row["t"] = to_string(t);
            row["lattice"] = str(r.lattice);
            row["closed"] = str(r.closed);
            row["pretransform"] = str(r.pretransform);
            row["series"] = str(series.value);
            row["series_last_term"] = format(series.tail_bound, 6);
            rows.push_back(std::move(row));
        }
        rep_.data["n_terms"] = o_.n_terms;
        rep_.data["values"] = std::move(rows);
    }

    bool theorem()
    {
        const auto rows = checks_->theorem_rows();
        rep_.data["c_q"] = str(fam_->c_constant());
        auto lhs = nlohmann::ordered_json::array();
        for (const auto& r : rows) lhs.push_back(str(r.lhs));
        rep_.data["fitted_constant"] = std::move(lhs);
        if (!add(checks_->theorem(rows))) return false;
        return add(checks_->non_homogeneity(rows));
    }

    void polys()
    {
        const auto b = checks_->basis();
        auto arr = nlohmann::ordered_json::array();
        for (long n = 0; n <= b.n_max(); ++n) {
            nlohmann::ordered_json row;
            row["n"] = n;
            auto coeffs = nlohmann::ordered_json::array();
            for (const auto& c : b[n].coeffs()) coeffs.push_back(str(c));
            row["coeffs"] = std::move(coeffs);
            row["norm"] = str(b.norms[n]);
            row["beta"] = str(b.beta[n]);
            row["gamma"] = str(b.gamma[n]);
            arr.push_back(std::move(row));
        }
        rep_.data["polys"] = std::move(arr);
        if (!add(checks_->orthogonality(b))) return;
        if (!add(checks_->diff_orthogonality(b))) return;
        if (!add(checks_->ttrr(b))) return;
        if (!add(checks_->eigen(b))) return;
        add(checks_->rodrigues(b));
    }

    void pade()
    {
        const auto b = checks_->basis();
        const long top = std::min(5L, b.n_max());
        const auto pm = power_moments(checks_->measure(), 2 * top, *ctx_);
        auto arr = nlohmann::ordered_json::array();
        for (long n = 1; n <= top; ++n) {
            const auto r = pade_check(b[n], pm);
            nlohmann::ordered_json row;
            row["n"] = n;
            auto coeffs = nlohmann::ordered_json::array();
            for (const auto& c : r.numerator.coeffs()) coeffs.push_back(str(c));
            row["numerator"] = std::move(coeffs);
            arr.push_back(std::move(row));
        }
        rep_.data["pade"] = std::move(arr);
        add(checks_->pade(b));
    }

    void verify_all()
    {
        rep_.sweep["rep"] = o_.rep;
        const auto d = draws();
        if (!add_all(qcore_identity_checks<T>(d))) return;
        if (!add_all(qhyper_identity_checks<T>(d))) return;
        if (!add(checks_->pearson())) return;
        if (!add(checks_->boundary())) return;
        if (!add(checks_->summation_by_parts())) return;
        if (!add(checks_->moments())) return;
        if (!add(checks_->recurrence())) return;
        if (!add(checks_->representations())) return;
        if (!theorem()) return;
        add_all(checks_->orthopoly_suite());
    }

    const Options& o_;
    VerificationReport& rep_;
    std::optional<Rational> tol_;
    long k_first_ = 0;
    long k_last_ = 8;
    std::optional<QContext<T>> ctx_;
    std::optional<Family<T>> fam_;
    std::optional<FamilyChecks<T>> checks_;
};

inline void add_common(CLI::App& sub, Options& o)
{
    sub.add_option("--family", o.family, "family:key=value,... or a bare family name drawn from --seed");
    sub.add_option("--mode", o.mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    sub.add_option("--precision", o.precision, "float precision in decimal digits")->check(CLI::Range(30, 100000));
    sub.add_option("--tol", o.tol, "float tolerance, rational or 1e-N (default 10^-(P-15))");
    sub.add_option("--points", o.points, "number of sampled t points");
    sub.add_option("--k", o.k_range, "moment orders, a..b");
    sub.add_option("--t", o.t, "comma-separated rational t = q^-z values (overrides --points)");
    sub.add_option("--seed", o.seed, "seed for random parameter draws");
    sub.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub.add_option("--out", o.out, "write the report to FILE instead of stdout");
    sub.add_option("--jobs", o.jobs, "worker threads over t points and draws");
    sub.add_option("--rep", o.rep, "random draws per identity");
    sub.add_option("--n-terms", o.n_terms, "terms of the moment series for S");
    sub.add_option("--n", o.n_max, "largest polynomial degree");
    sub.add_flag("--keep-going", o.keep_going, "run every check after a failure");
    sub.add_flag("--timing", o.timing, "report elapsed_ms");
    sub.add_option("--perturb", o.perturb, "negative control: tau, c, moment or tau-printed");
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    const auto start = std::chrono::steady_clock::now();
    Options o;
    CLI::App app{"Verification harness for q-Stieltjes functions of classical q-families"};
    app.name("qstieltjes");
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"moments", "closed-form vs brute-force q-moments"},
        {"stieltjes", "S(z) by lattice sum, closed forms and moment series"},
        {"verify-theorem", "residual of the difference equation for S and its constant"},
        {"verify-identities", "q-calculus and basic hypergeometric identities on random draws"},
        {"polys", "monic orthogonal polynomials and their classical properties"},
        {"pade", "Pade conditions at infinity"},
        {"verify-all", "every check in dependency order"},
    };
    for (const auto& [name, help] : commands) add_common(*app.add_subcommand(name, help), o);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "qstieltjes: usage error: " << e.what() << '\n';
        return usage;
    }
    o.command = app.get_subcommands().front()->get_name();

    VerificationReport rep;
    rep.command = o.command;
    rep.mode = o.mode;
    rep.precision = o.precision;
    try {
        if (o.mode == "exact") {
            Runner<QuadRational>(o, rep).run();
        } else {
            Runner<Float>(o, rep).run();
        }
    } catch (const Error& e) {
        err << "qstieltjes: " << e.what() << '\n';
        return e.is_numerical() ? numerical : usage;
    } catch (const std::exception& e) {
        err << "qstieltjes: numerical failure: " << e.what() << '\n';
        return numerical;
    }
    if (o.timing)
        rep.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) {
            err << "qstieltjes: cannot open " << o.out << " for writing\n";
            return usage;
        }
    }
    std::ostream& sink = o.out.empty() ? out : file;
    if (o.format == "csv") {
        write_csv(rep, sink);
    } else {
        write_json(rep, sink);
    }
    if (const CheckRecord* f = rep.first_failure()) {
        long failed = 0;
        for (const auto& c : rep.checks) failed += c.pass ? 0 : 1;
        err << "qstieltjes: " << failed << " of " << rep.checks.size() << " checks failed, first " << f->anchor
            << " (residual " << f->residual << ", tol " << f->tol << ")\n";
        return check_failed;
    }
    return ok;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace qstieltjes::cli
