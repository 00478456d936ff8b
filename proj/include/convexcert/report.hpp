#ifndef CONVEXCERT_REPORT_HPP
#define CONVEXCERT_REPORT_HPP

// JSON records for verdicts and duality reports. nlohmann::json objects keep
// keys sorted, which gives the stable ordering golden files rely on.

#include <cmath>

#include "convexcert/certify.hpp"
#include "convexcert/core.hpp"
#include "convexcert/duality.hpp"
#include "json.hpp"

namespace convexcert::report {

using nlohmann::json;

inline json to_json(const Point& p) { return json(p.coords()); }

inline json to_json(const Box& b) { return json{{"lo", to_json(b.lo())}, {"hi", to_json(b.hi())}}; }

/// Non-finite numbers become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const certify::CertVerdict& v) {
    json j{{"condition", certify::to_string(v.condition)},
           {"holds", v.holds},
           {"worst_margin", v.n_evaluated ? number(v.worst_margin) : json(nullptr)},
           {"scale", number(v.scale)},
           {"n_evaluated", v.n_evaluated},
           {"n_degenerate", v.n_degenerate},
           {"n_skipped", v.n_skipped},
           {"witness_reverified", v.witness_reverified},
           {"selection_rule", v.selection_rule},
           {"notes", v.notes}};
    j["parameter"] = v.parameter ? number(*v.parameter) : json(nullptr);
    if (v.witness)
        j["witness"] = json{{"x", to_json(v.witness->x)}, {"y", to_json(v.witness->y)}, {"alpha", v.witness->alpha}};
    else
        j["witness"] = nullptr;
    return j;
}

inline json to_json(const duality::DualityReport& r) {
    json j{{"entry", r.entry},
           {"direction", duality::to_string(r.direction)},
           {"mu_f", number(r.mu_f)},
           {"L_f", number(r.L_f)},
           {"mu_conj", number(r.mu_conj)},
           {"L_conj", number(r.L_conj)},
           {"bound_satisfied", r.bound_satisfied},
           {"slack", number(r.slack)},
           {"conjugate_source", r.conjugate_source},
           {"n_pairs", r.n_pairs},
           {"notes", r.notes}};
    j["primal_box"] = r.primal_box ? to_json(*r.primal_box) : json(nullptr);
    j["conjugate_box"] = r.conjugate_box ? to_json(*r.conjugate_box) : json(nullptr);
    j["numerical_estimate"] = r.numerical_estimate ? number(*r.numerical_estimate) : json(nullptr);
    j["discrepancy"] = r.discrepancy ? number(*r.discrepancy) : json(nullptr);
    return j;
}

}  // namespace convexcert::report

#endif  // CONVEXCERT_REPORT_HPP
