#ifndef CONVEXCERT_CLI_HPP
#define CONVEXCERT_CLI_HPP

// Batch front end: `convexcert <certify|conjugate|duality|zoo> [flags]`.
//
// Exit status: 0 when every requested check holds, 1 when any is violated,
// 2 on configuration or evaluation errors.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "convexcert/certify.hpp"
#include "convexcert/conjugate.hpp"
#include "convexcert/core.hpp"
#include "convexcert/duality.hpp"
#include "convexcert/expr.hpp"
#include "convexcert/report.hpp"
#include "convexcert/zoo.hpp"
#include "json.hpp"

namespace convexcert::cli {

inline constexpr const char* kToolName = "convexcert";
inline constexpr const char* kVersion = "0.1.0";

enum ExitStatus { kHolds = 0, kViolated = 1, kError = 2 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// --help or --version; what() holds the text to print.
class InfoRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;  // certify | conjugate | duality | zoo
    std::string zoo_action;

    std::optional<std::string> func;
    std::optional<std::size_t> dim;  // --func defaults to 1, zoo entries to their own size
    std::optional<std::string> zoo;
    std::vector<double> diag{1.0, 4.0};
    double delta = 1.0;

    std::vector<double> box;  // flat LO HI pairs, one per axis (or one for all)
    std::optional<double> mu;
    std::optional<double> L;
    std::optional<double> fmin;

    std::size_t n_pairs = 1000;
    std::size_t n_alphas = 1;
    std::uint64_t seed = 1;
    double fd_step = 1e-5;
    std::vector<std::string> checks;

    std::size_t grid_n = 2001;
    std::vector<double> slopes{-3.0, 3.0, 0.01};  // LO HI STEP

    std::optional<std::string> out;
    std::optional<std::string> csv;
};

inline nlohmann::json echo(const RunConfig& c) {
    nlohmann::json j{{"command", c.command},         {"diag", c.diag},       {"delta", c.delta},
                     {"box", c.box},           {"n", c.n_pairs},       {"alphas", c.n_alphas}, {"seed", c.seed},
                     {"fd_step", c.fd_step},   {"check", c.checks},    {"grid", c.grid_n},     {"slopes", c.slopes}};
    auto opt = [&](const char* key, const auto& v) { j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    opt("func", c.func);
    opt("dim", c.dim);
    opt("zoo", c.zoo);
    opt("mu", c.mu);
    opt("L", c.L);
    opt("fmin", c.fmin);
    opt("out", c.out);
    opt("csv", c.csv);
    return j;
}

// ---------------------------------------------------------------------------
// Argument and config-file parsing
// ---------------------------------------------------------------------------

namespace detail {

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{"func", "dim", "zoo",   "diag",  "delta", "box",   "mu",
                                            "L",    "fmin", "n",    "alphas", "seed",  "fd-step", "check",
                                            "out",  "csv",  "grid", "slopes"};
    return keys;
}

/// Flat `key = value` file (or `key value`), `#` comments, repeated keys
/// accumulate. Returned as flag tokens grouped by key.
inline std::vector<std::pair<std::string, std::vector<std::string>>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string key, rest;
        if (auto eq = line.find('='); eq != std::string::npos) {
            key = line.substr(0, eq);
            rest = line.substr(eq + 1);
        } else {
            std::istringstream ls(line);
            ls >> key;
            std::getline(ls, rest);
        }
        key.erase(0, key.find_first_not_of(" \t\r"));
        key.erase(key.find_last_not_of(" \t\r") + 1);
        if (key.empty()) continue;
        if (!config_keys().count(key))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        std::vector<std::string> tokens{"--" + key};
        if (key == "func") {
            rest.erase(0, rest.find_first_not_of(" \t"));
            rest.erase(rest.find_last_not_of(" \t\r") + 1);
            if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') rest = rest.substr(1, rest.size() - 2);
            tokens.push_back(rest);
        } else {
            std::istringstream vs(rest);
            for (std::string v; vs >> v;) tokens.push_back(v);
        }
        if (tokens.size() == 1)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": key '" + key + "' has no value");
        out.emplace_back(key, std::move(tokens));
    }
    return out;
}

inline bool mentions_flag(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

/// Splices config-file flags (for keys not given on the command line) right
/// after the subcommand so that explicit flags override the file.
inline std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return args;

    std::vector<std::string> injected;
    for (auto& [key, tokens] : read_config_file(*path))
        if (!mentions_flag(args, key)) injected.insert(injected.end(), tokens.begin(), tokens.end());
    const auto at = args.empty() ? args.end() : args.begin() + 1;
    args.insert(at, injected.begin(), injected.end());
    return args;
}

inline void add_common_options(CLI::App& sub, RunConfig& c) {
    sub.add_option("--func", c.func, "function expression in x1..xn");
    sub.add_option("--dim", c.dim, "dimension of --func (and of the logsumexp zoo entry)");
    sub.add_option("--zoo", c.zoo, "zoo entry name");
    sub.add_option("--diag", c.diag, "quadratic zoo entry diagonal, comma-separated")->delimiter(',');
    sub.add_option("--delta", c.delta, "Huber zoo entry threshold");
    sub.add_option("--box", c.box, "LO HI for one axis (repeat per axis, or once for all axes)")
        ->type_size(2)
        ->allow_extra_args(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub.add_option("--mu", c.mu, "claimed strong convexity parameter");
    sub.add_option("--L", c.L, "claimed gradient Lipschitz constant");
    sub.add_option("--fmin", c.fmin, "known minimum value for SCI_PL");
    sub.add_option("--n", c.n_pairs, "number of sampled pairs");
    sub.add_option("--alphas", c.n_alphas, "interpolation coefficients per pair");
    sub.add_option("--seed", c.seed, "sampling seed")->envname("CONVEXCERT_SEED");
    sub.add_option("--fd-step", c.fd_step, "finite-difference step");
    sub.add_option("--check", c.checks, "condition id (repeatable)")
        ->allow_extra_args(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub.add_option("--grid", c.grid_n, "grid points for the discrete conjugate");
    sub.add_option("--slopes", c.slopes, "LO HI STEP slope range for the conjugate CSV")->expected(3);
    sub.add_option("--out", c.out, "JSON report path ('-' for stdout)");
    sub.add_option("--csv", c.csv, "conjugate CSV path");
    sub.add_option("--config", "flat key = value file; flags override it");
}

}  // namespace detail

/// Parses arguments (without the program name). Throws CLI::ParseError,
/// ConfigError, or InfoRequested for --help / --version.
inline RunConfig parse_arguments(std::vector<std::string> args) {
    args = detail::merge_config_file(std::move(args));
    RunConfig c;
    CLI::App app{"Numerical convex-analysis certification", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto* certify = app.add_subcommand("certify", "sampled convexity / strong convexity / smoothness checks");
    auto* conjugate = app.add_subcommand("conjugate", "discrete conjugate of a 1-D function as CSV");
    auto* duality = app.add_subcommand("duality", "verify the strong convexity / smoothness duality");
    auto* zoo = app.add_subcommand("zoo", "benchmark catalog");
    for (auto* sub : {certify, conjugate, duality}) detail::add_common_options(*sub, c);
    zoo->add_option("action", c.zoo_action, "list")->required()->check(CLI::IsMember({"list"}));

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::Success& e) {  // help and version
        std::ostringstream text, ignored;
        app.exit(e, text, ignored);
        throw InfoRequested(text.str());
    }
    for (auto* sub : {certify, conjugate, duality, zoo})
        if (sub->parsed()) c.command = sub->get_name();
    return c;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

namespace detail {

inline zoo::ZooEntry make_subject(const RunConfig& c) {
    if (c.func.has_value() == c.zoo.has_value()) throw ConfigError("exactly one of --func or --zoo is required");
    zoo::ZooEntry e = [&] {
        if (c.zoo) {
            zoo::ZooParams p{c.diag, c.delta};
            if (c.dim) p.n = *c.dim;
            return zoo::make_entry(*c.zoo, p);
        }
        const std::size_t dim = c.dim.value_or(1);
        const auto ex = expr::parse_expression(*c.func, dim);
        return zoo::ZooEntry{"expr",       expr::make_oracle(ex), {}, std::nullopt, std::nullopt, {},
                             expr::is_recognized_convex(ex), Box::cube(dim, -5.0, 5.0)};
    }();
    if (c.mu) e.constants.known_mu = *c.mu;
    if (c.L) e.constants.known_L = *c.L;
    if (c.fmin) e.constants.known_min_value = *c.fmin;
    return e;
}

inline Box make_box(const RunConfig& c, const zoo::ZooEntry& e) {
    if (c.box.empty()) return e.default_box;
    if (c.box.size() % 2 != 0) throw ConfigError("--box takes LO HI pairs");
    const std::size_t n = e.oracle.dimension();
    const std::size_t axes = c.box.size() / 2;
    if (axes != 1 && axes != n)
        throw ConfigError("--box given for " + std::to_string(axes) + " axes, function has dimension " + std::to_string(n));
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = axes == 1 ? 0 : i;
        lo[i] = c.box[2 * k];
        hi[i] = c.box[2 * k + 1];
    }
    return Box(Point(lo), Point(hi));
}

inline std::vector<certify::ConditionId> requested_checks(const RunConfig& c, const zoo::ZooEntry& e) {
    using certify::ConditionId;
    std::vector<ConditionId> ids;
    for (const auto& name : c.checks) {
        auto id = certify::parse_condition(name);
        if (!id) throw ConfigError("unknown condition id '" + name + "'");
        ids.push_back(*id);
    }
    if (!ids.empty()) return ids;

    const bool claimed = c.mu || c.L;
    const bool have_mu = e.constants.known_mu && *e.constants.known_mu > 0;
    const bool have_L = e.constants.known_L && *e.constants.known_L > 0 && e.oracle.smooth();
    if (!claimed) ids.assign(certify::kConvexityConditions.begin(), certify::kConvexityConditions.end());
    if (have_mu && (c.mu || !claimed))
        ids.insert(ids.end(), certify::kStrongConvexityConditions.begin(), certify::kStrongConvexityConditions.end());
    if (have_L && (c.L || !claimed))
        ids.insert(ids.end(), certify::kSmoothnessConditions.begin(), certify::kSmoothnessConditions.end());
    return ids;
}

inline certify::CertVerdict run_check(certify::ConditionId id, const zoo::ZooEntry& e, const SamplingPlan& plan) {
    using namespace certify;
    auto need = [&](const std::optional<double>& v, const char* flag) {
        if (!v || !(*v > 0)) throw ConfigError("check " + to_string(id) + " requires " + flag);
        return *v;
    };
    if (is_one_of(id, kConvexityConditions)) return check_convexity(e.oracle, plan, id);
    if (is_one_of(id, kStrongConvexityConditions))
        return check_strong_convexity(e.oracle, need(e.constants.known_mu, "--mu"), plan, id);
    if (is_one_of(id, kImplicationConditions))
        return check_sc_implication(e.oracle, need(e.constants.known_mu, "--mu"), e.constants.known_min_value, plan, id);
    if (is_one_of(id, kSmoothnessConditions))
        return check_smoothness(e.oracle, need(e.constants.known_L, "--L"), plan, id);
    if (!e.conjugate) throw ConfigError("check " + to_string(id) + " requires a zoo entry with a known conjugate");
    return check_conjugate_relations(e, plan, id);
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline std::vector<double> slope_range(const std::vector<double>& spec) {
    if (spec.size() != 3) throw ConfigError("--slopes takes LO HI STEP");
    const double lo = spec[0], hi = spec[1], step = spec[2];
    if (!(step > 0)) throw ConfigError("--slopes STEP must be positive");
    std::vector<double> out;
    if (hi < lo) return out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

}  // namespace detail

struct RunResult {
    int exit_code = kHolds;
    nlohmann::json report;
    std::string summary;  // human-readable lines
};

/// Runs one configured job and assembles the report document.
/// Configuration and evaluation errors produce exit code 2 and an "error" field.
inline RunResult run(const RunConfig& c) {
    using nlohmann::json;
    using clock = std::chrono::steady_clock;
    RunResult r;
    r.report = json{{"tool", kToolName}, {"version", kVersion}, {"config", echo(c)}};
    r.report["verdicts"] = json::array();
    r.report["duality"] = json::array();
    r.report["timing"] = json::object();
    std::ostringstream text;
    bool all_hold = true;

    try {
        if (c.command == "zoo") {
            for (const auto& e : zoo::catalog()) text << zoo::list_line(e) << '\n';
            r.summary = text.str();
            return r;
        }

        const zoo::ZooEntry entry = detail::make_subject(c);
        const Box box = detail::make_box(c, entry);
        const SamplingPlan plan{box, c.n_pairs, c.n_alphas, c.seed, c.fd_step};
        plan.validate();
        r.report["subject"] = json{{"name", entry.name}, {"dimension", entry.oracle.dimension()},
                                   {"convex", entry.convex}, {"smooth", entry.oracle.smooth()},
                                   {"box", report::to_json(box)}};
        const auto started = clock::now();

        if (c.command == "certify") {
            const auto ids = detail::requested_checks(c, entry);
            if (ids.empty()) throw ConfigError("no checks requested or applicable");
            for (auto id : ids) {
                const auto v = detail::run_check(id, entry, plan);
                all_hold = all_hold && v.holds;
                r.report["verdicts"].push_back(report::to_json(v));
                text << std::left << std::setw(16) << certify::to_string(id) << (v.holds ? "holds   " : "VIOLATED")
                     << "  margin=" << (v.n_evaluated ? detail::format_double(v.worst_margin) : "n/a")
                     << "  n=" << v.n_evaluated;
                if (!v.holds && v.witness)
                    text << "  witness x=" << to_string(v.witness->x) << " y=" << to_string(v.witness->y)
                         << " alpha=" << v.witness->alpha;
                text << '\n';
            }
        } else if (c.command == "duality") {
            std::vector<duality::DualityReport> reports;
            if (entry.convex) {
                const bool strongly = entry.constants.known_mu ? *entry.constants.known_mu > 0
                                                               : certify::estimate_mu(entry.oracle, plan) > 0;
                if (strongly) reports.push_back(duality::verify_part_i(entry, plan));
                if (entry.oracle.smooth()) reports.push_back(duality::verify_part_ii(entry, plan));
            }
            if (reports.empty())
                throw ConfigError("duality needs a convex function that is strongly convex or smooth");
            for (const auto& d : reports) {
                all_hold = all_hold && d.bound_satisfied;
                r.report["duality"].push_back(report::to_json(d));
                text << std::left << std::setw(14) << duality::to_string(d.direction)
                     << (d.bound_satisfied ? "holds   " : "VIOLATED") << "  slack=" << detail::format_double(d.slack)
                     << "  mu_f=" << detail::format_double(d.mu_f) << "  L_f=" << detail::format_double(d.L_f)
                     << "  mu_conj=" << detail::format_double(d.mu_conj)
                     << "  L_conj=" << detail::format_double(d.L_conj) << '\n';
            }
        } else if (c.command == "conjugate") {
            if (entry.oracle.dimension() != 1) throw ConfigError("conjugate requires a 1-D function");
            if (c.grid_n < 2) throw ConfigError("--grid must be >= 2");
            const auto grid = conjugate::sample_grid(entry.oracle, box.lo()[0], box.hi()[0], c.grid_n);
            const auto slopes = detail::slope_range(c.slopes);
            const auto result = conjugate::llt_1d(grid, slopes);

            json summary{{"n_slopes", slopes.size()}, {"grid", c.grid_n}, {"box", report::to_json(box)}};
            if (entry.conjugate) {
                double diff = 0.0;
                std::size_t compared = 0;
                for (std::size_t k = 0; k < slopes.size(); ++k) {
                    const Point s{slopes[k]};
                    if (!entry.in_conjugate_domain(s)) continue;
                    diff = std::max(diff, std::fabs(result.values[k] - entry.conjugate->value(s)));
                    ++compared;
                }
                summary["closed_form_max_abs_diff"] = compared ? report::number(diff) : json(nullptr);
                summary["closed_form_compared"] = compared;
            }
            if (c.csv) {
                std::ofstream csv(*c.csv);
                if (!csv) throw ConfigError("cannot write CSV to '" + *c.csv + "'");
                conjugate::write_csv(csv, result.slopes, result.values, "s", "fstar");
                if (!csv) throw ConfigError("failed writing CSV to '" + *c.csv + "'");
                std::ofstream meta(*c.csv + ".meta.json");
                if (!meta) throw ConfigError("cannot write sidecar '" + *c.csv + ".meta.json'");
                meta << json{{"box", report::to_json(box)}, {"grid", c.grid_n}, {"slopes", c.slopes}}.dump(2) << '\n';
                summary["csv"] = *c.csv;
            }
            r.report["conjugate"] = summary;
            text << "conjugate: " << slopes.size() << " slopes on a " << c.grid_n << "-point grid";
            if (c.csv) text << " -> " << *c.csv;
            text << '\n';
        } else {
            throw ConfigError("unknown command '" + c.command + "'");
        }

        r.report["timing"][c.command + "_ms"] =
            std::chrono::duration<double, std::milli>(clock::now() - started).count();
        r.exit_code = all_hold ? kHolds : kViolated;
        r.report["status"] = all_hold ? "holds" : "violated";
    } catch (const std::exception& ex) {
        // ConfigError, ContractError, EvaluationError, ParseError, NumericFailure
        r.exit_code = kError;
        r.report["status"] = "error";
        r.report["error"] = ex.what();
    }
    r.summary = text.str();
    return r;
}

/// Full command-line entry point; returns the process exit status.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        c = parse_arguments(args);
    } catch (const InfoRequested& e) {
        out << e.what();
        return kHolds;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }

    RunResult r = run(c);
    out << r.summary;
    if (r.exit_code == kError) err << "error: " << r.report.value("error", std::string("unknown")) << '\n';
    if (c.out) {
        const std::string doc = r.report.dump(2) + "\n";
        if (*c.out == "-") {
            out << doc;
        } else {
            std::ofstream f(*c.out);
            if (!f || !(f << doc)) {
                err << "error: cannot write report to '" << *c.out << "'\n";
                return kError;
            }
        }
    }
    return r.exit_code;
}

}  // namespace convexcert::cli

#endif  // CONVEXCERT_CLI_HPP
