// osci: finite-length confidence intervals for location and scale from a
// single observation, with Monte Carlo verification of every claimed bound.
//
// Exit codes: 0 success, 1 usage error, 2 domain/numerical error.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "osci/densities.hpp"
#include "osci/location_ci.hpp"
#include "osci/mc_verify.hpp"
#include "osci/scale_ci.hpp"
#include "osci/scenario.hpp"
#include "osci/version.hpp"

using ojson = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// JSON numbers cannot hold infinities; unbounded endpoints are the string "inf".
ojson jnum(double v) {
    if (std::isinf(v)) return v > 0 ? ojson("inf") : ojson("-inf");
    if (std::isnan(v)) return ojson("nan");
    return ojson(v);
}

double parse_real_or_inf(const std::string& s, const char* what) {
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "INF") {
        return std::numeric_limits<double>::infinity();
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (...) {
    }
    throw std::domain_error(std::string(what) + ": expected a number or \"inf\", got '" + s + "'");
}

// SOURCE_DATE_EPOCH makes the envelope reproducible byte for byte.
std::string iso_timestamp() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void flatten_csv(const ojson& node, const std::string& prefix, std::string& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            flatten_csv(value, prefix.empty() ? key : prefix + "." + key, out);
        }
        return;
    }
    if (node.is_array()) {
        if (!node.empty() && node.front().is_object()) {  // table section
            out += "table," + prefix + "\n";
            std::string header;
            for (const auto& [key, value] : node.front().items()) {
                (void)value;
                header += (header.empty() ? "" : ",") + key;
            }
            out += header + "\n";
            for (const auto& row : node) {
                std::string line;
                bool first = true;
                for (const auto& [key, value] : row.items()) {
                    (void)key;
                    if (!first) line += ",";
                    first = false;
                    if (value.is_number_float()) {
                        line += fmt17(value.get<double>());
                    } else {
                        line += value.is_string() ? value.get<std::string>() : value.dump();
                    }
                }
                out += line + "\n";
            }
        } else {
            for (std::size_t i = 0; i < node.size(); ++i) {
                flatten_csv(node[i], prefix + "." + std::to_string(i), out);
            }
        }
        return;
    }
    std::string value;
    if (node.is_number_float()) {
        value = fmt17(node.get<double>());
    } else if (node.is_string()) {
        value = node.get<std::string>();
    } else {
        value = node.dump();
    }
    out += prefix + "," + value + "\n";
}

void flatten_text(const ojson& node, const std::string& prefix, std::string& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            flatten_text(value, prefix.empty() ? key : prefix + "." + key, out);
        }
        return;
    }
    if (node.is_array() && !node.empty() && node.front().is_object()) {
        out += prefix + ": " + std::to_string(node.size()) + " rows\n";
        for (const auto& row : node) {
            std::string line = "  ";
            for (const auto& [key, value] : row.items()) {
                line += key + "=";
                line += value.is_number_float() ? fmt17(value.get<double>())
                        : value.is_string()    ? value.get<std::string>()
                                               : value.dump();
                line += " ";
            }
            out += line + "\n";
        }
        return;
    }
    std::string value;
    if (node.is_number_float()) {
        value = fmt17(node.get<double>());
    } else if (node.is_string()) {
        value = node.get<std::string>();
    } else {
        value = node.dump();
    }
    out += prefix + " = " + value + "\n";
}

void emit(const ojson& payload, const std::string& mode, const std::string& command) {
    ojson envelope;
    envelope["tool"] = "osci";
    envelope["version"] = OSCI_VERSION;
    envelope["command"] = command;
    envelope["timestamp"] = iso_timestamp();
    envelope["payload"] = payload;
    if (mode == "json") {
        std::cout << envelope.dump(2) << "\n";
    } else if (mode == "csv") {
        std::string out;
        out += "# osci " OSCI_VERSION " | " + command + " | " + envelope["timestamp"].get<std::string>() + "\n";
        flatten_csv(payload, "", out);
        std::cout << out;
    } else {
        std::string out;
        flatten_text(payload, "", out);
        std::cout << out;
    }
}

// ---------------------------------------------------------------------------
// payload builders
// ---------------------------------------------------------------------------

ojson interval_to_json(const osci::LocationInterval& iv) {
    ojson j;
    j["type"] = "location_interval";
    j["x"] = jnum(iv.center_x);
    j["center"] = jnum(iv.guess_a);
    j["t"] = jnum(iv.t);
    j["lo"] = jnum(iv.lo);
    j["hi"] = jnum(iv.hi);
    j["length"] = jnum(iv.length);
    j["confidence_bound"] = jnum(iv.confidence_bound);
    j["method"] =
        iv.method == osci::LocationMethod::parametric ? "parametric" : "nonparametric";
    if (!iv.density_name.empty()) j["density"] = iv.density_name;
    return j;
}

ojson interval_to_json(const osci::ScaleInterval& iv) {
    ojson j;
    j["type"] = "scale_interval";
    j["x"] = jnum(iv.x);
    j["center"] = jnum(iv.a);
    j["t1"] = jnum(iv.t1);
    j["t2"] = jnum(iv.t2);
    j["lo"] = jnum(iv.lo);
    j["hi"] = jnum(iv.hi);
    j["log_length"] = jnum(iv.log_length);
    j["confidence_bound"] = jnum(iv.confidence_bound);
    j["validity"] = ojson{{"m", jnum(iv.prior_m)}, {"m_star", jnum(iv.m_star)}};
    j["density"] = iv.density_name;
    return j;
}

ojson report_to_json(const osci::CoverageReport& rep) {
    const auto& c = rep.config;
    ojson j;
    j["type"] = "coverage_report";
    j["kind"] = osci::to_string(c.kind);
    j["density"] = c.density;
    j["mu"] = jnum(c.mu);
    j["sigma"] = jnum(c.sigma);
    j["center"] = jnum(c.a);
    if (c.kind == osci::SimKind::scale) {
        j["t1"] = jnum(c.t1);
        j["t2"] = jnum(c.t2);
        j["m"] = jnum(c.M);
    } else {
        j["t"] = jnum(c.t);
    }
    j["reps"] = rep.reps;
    j["seed"] = rep.seed;
    j["hits"] = rep.hits;
    j["empirical_coverage"] = jnum(rep.empirical_coverage);
    j["theoretical_bound"] = jnum(rep.theoretical_bound);
    j["mc_stderr"] = jnum(rep.mc_stderr);
    j["slack"] = jnum(rep.slack);
    j["hypothesis_violated"] = rep.hypothesis_violated;
    return j;
}

ojson design_to_json(const osci::ScaleDesign& d) {
    return ojson{{"t1", jnum(d.t1)},
                 {"t2", jnum(d.t2)},
                 {"confidence", jnum(d.confidence)},
                 {"m_star", jnum(d.m_star)}};
}

struct ExampleRow {
    const char* interval;
    double nominal;
    double t1;
    double t2;        // inf for the one-sided rows
    double validity;  // inf for "valid always"
    double precision; // displayed precision of the validity constant
};

ojson paper_examples_payload() {
    const auto normal = osci::make_builtin(osci::Family::normal);
    const double inf = osci::kInf;
    const std::vector<ExampleRow> rows = {
        {"(0, 8|x|)", 0.90, 1.0 / 8.0, inf, inf, 1.0},
        {"(|x|/4, 8|x|)", 0.90, 1.0 / 8.0, 4.0, 2.7, 0.1},
        {"(|x|/8, 8|x|)", 0.90, 1.0 / 8.0, 8.0, 6.7, 0.1},
        {"(|x|/5, 17|x|)", 0.95, 1.0 / 17.0, 5.0, 3.3, 0.1},
        {"(|x|/50, 17|x|)", 0.95, 1.0 / 17.0, 50.0, 48.0, 1.0},
        {"(0, 17|x|)", 0.95, 1.0 / 17.0, inf, inf, 1.0},
        {"(|x|/5, 70|x|)", 0.99, 1.0 / 70.0, 5.0, 2.7, 0.1},
        {"(|x|/1000, 70|x|)", 0.99, 1.0 / 70.0, 1000.0, 997.0, 1.0},
        {"(0, 70|x|)", 0.99, 1.0 / 70.0, inf, inf, 1.0},
    };
    ojson out;
    out["type"] = "paper_examples";
    ojson jrows = ojson::array();
    bool all_ok = true;
    for (const auto& row : rows) {
        const double conf = osci::coverage_G(0.0, row.t1, row.t2, normal);
        const double conf_rounded = std::round(conf * 100.0) / 100.0;
        const bool conf_ok = conf_rounded >= row.nominal - 1e-12;
        ojson r;
        r["paper_interval"] = row.interval;
        r["nominal_confidence"] = jnum(row.nominal);
        r["t1"] = jnum(row.t1);
        r["t2"] = jnum(row.t2);
        r["paper_validity"] = jnum(row.validity);
        r["recomputed_confidence"] = jnum(conf);
        r["recomputed_confidence_rounded"] = jnum(conf_rounded);
        r["confidence_ok"] = conf_ok;
        bool validity_ok = true;
        if (std::isinf(row.validity)) {
            r["recomputed_m_star"] = jnum(osci::kInf);
            r["recomputed_m_star_approx"] = jnum(osci::kInf);
            r["m_star_at_paper_precision"] = jnum(osci::kInf);
        } else {
            const double exact = osci::m_star(row.t1, row.t2, normal);
            const double approx = osci::m_star_gaussian_approx(row.t1, row.t2, normal);
            const double floored =
                std::floor(exact / row.precision + 1e-9) * row.precision;
            validity_ok = std::abs(floored - row.validity) <= 0.05 &&
                          exact >= row.validity - 0.05;
            r["recomputed_m_star"] = jnum(exact);
            r["recomputed_m_star_approx"] = jnum(approx);
            r["m_star_at_paper_precision"] = jnum(floored);
        }
        r["validity_ok"] = validity_ok;
        r["note"] = conf < row.nominal
                        ? "recomputed confidence is below the nominal label before rounding"
                        : "";
        all_ok = all_ok && conf_ok && validity_ok;
        jrows.push_back(std::move(r));
    }
    out["rows"] = std::move(jrows);
    out["all_confirmed"] = all_ok;
    return out;
}

osci::AdversaryStrategy load_strategy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("game: cannot open strategy file '" + path + "'");
    ojson j;
    in >> j;
    osci::AdversaryStrategy s;
    const std::string mode = j.value("mode", "fixed");
    if (mode == "fixed") {
        s.mode = osci::AdversaryStrategy::Mode::fixed;
    } else if (mode == "cycle") {
        s.mode = osci::AdversaryStrategy::Mode::cycle;
    } else if (mode == "seeded_random") {
        s.mode = osci::AdversaryStrategy::Mode::seeded_random;
    } else {
        throw std::domain_error("game: unknown strategy mode '" + mode + "'");
    }
    if (!j.contains("densities") || !j["densities"].is_array() || j["densities"].empty()) {
        throw std::domain_error("game: strategy needs a non-empty \"densities\" array");
    }
    for (const auto& name : j["densities"]) {
        s.densities.push_back(osci::make_builtin(name.get<std::string>()));
    }
    const ojson rule = j.value("mu_rule", ojson{{"kind", "constant"}, {"value", 0.0}});
    const std::string kind = rule.value("kind", "constant");
    if (kind == "constant") {
        s.mu_rule.kind = osci::MuRule::Kind::constant;
        s.mu_rule.value = rule.value("value", 0.0);
    } else if (kind == "sequence") {
        s.mu_rule.kind = osci::MuRule::Kind::sequence;
        for (const auto& v : rule.at("values")) s.mu_rule.sequence.push_back(v.get<double>());
        if (s.mu_rule.sequence.empty()) throw std::domain_error("game: empty mu sequence");
    } else if (kind == "gaussian") {
        s.mu_rule.kind = osci::MuRule::Kind::gaussian;
        s.mu_rule.mean = rule.value("mean", 0.0);
        s.mu_rule.sd = rule.value("sd", 1.0);
    } else {
        throw std::domain_error("game: unknown mu_rule kind '" + kind + "'");
    }
    s.seed = j.value("seed", 0ULL);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-length confidence intervals from a single observation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config");

    std::string out_mode = "text";
    app.add_option("--out", out_mode, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    app.add_option("--abs-tol", abs_tol, "quadrature absolute tolerance")->capture_default_str();
    app.add_option("--rel-tol", rel_tol, "quadrature relative tolerance")->capture_default_str();

    std::optional<ojson> payload;
    auto quad_spec = [&]() { return osci::QuadratureSpec{abs_tol, rel_tol, 60}; };

    std::string command_echo = "osci";
    for (int i = 1; i < argc; ++i) command_echo += std::string(" ") + argv[i];

    // ---- interval ----------------------------------------------------------
    auto* interval = app.add_subcommand("interval", "construct a confidence interval");
    interval->require_subcommand(1);
    {
        auto* loc = interval->add_subcommand("location", "location interval x +- t|x-a|");
        auto x = std::make_shared<double>(0.0);
        auto center = std::make_shared<double>(0.0);
        auto t = std::make_shared<double>(0.0);
        auto method = std::make_shared<std::string>("parametric");
        auto dist = std::make_shared<std::string>("normal");
        loc->add_option("--x", *x, "observation")->required();
        loc->add_option("--center", *center, "anchor a")->capture_default_str();
        loc->add_option("--t", *t, "half-width multiplier (> 1)")->required();
        loc->add_option("--method", *method, "parametric|nonparametric")
            ->check(CLI::IsMember({"parametric", "nonparametric"}));
        loc->add_option("--dist", *dist, "density name")->capture_default_str();
        loc->callback([&, x, center, t, method, dist]() {
            const bool parametric = *method == "parametric";
            osci::LocationInterval iv;
            if (parametric) {
                const auto d = osci::make_builtin(*dist);
                iv = osci::location_interval(*x, *center, *t, osci::LocationMethod::parametric,
                                             &d);
            } else {
                iv = osci::location_interval(*x, *center, *t,
                                             osci::LocationMethod::nonparametric);
            }
            if (*x == *center) {
                std::cerr << "warning: x == center gives a degenerate zero-length interval\n";
            }
            payload = interval_to_json(iv);
        });

        auto* sc = interval->add_subcommand("scale", "scale interval (|x-a|/t2, |x-a|/t1)");
        auto sx = std::make_shared<double>(0.0);
        auto sc_center = std::make_shared<double>(0.0);
        auto t1 = std::make_shared<double>(0.0);
        auto t2s = std::make_shared<std::string>("inf");
        auto ms = std::make_shared<std::string>("inf");
        auto sdist = std::make_shared<std::string>("normal");
        sc->add_option("--x", *sx, "observation")->required();
        sc->add_option("--center", *sc_center, "anchor a")->capture_default_str();
        sc->add_option("--t1", *t1, "lower divisor (0 < t1 < t2)")->required();
        sc->add_option("--t2", *t2s, "upper divisor or \"inf\"")->capture_default_str();
        sc->add_option("--m", *ms, "prior ratio |mu-a| <= sigma*M, or \"inf\"")
            ->capture_default_str();
        sc->add_option("--dist", *sdist, "density name")->capture_default_str();
        sc->callback([&, sx, sc_center, t1, t2s, ms, sdist]() {
            const auto d = osci::make_builtin(*sdist);
            const double t2 = parse_real_or_inf(*t2s, "--t2");
            const double M = parse_real_or_inf(*ms, "--m");
            payload = interval_to_json(osci::scale_interval(*sx, *sc_center, *t1, t2, M, d));
        });
    }

    // ---- compute -----------------------------------------------------------
    auto* compute = app.add_subcommand("compute", "evaluate one quantity");
    compute->require_subcommand(1);
    {
        auto* b = compute->add_subcommand("beta", "miscoverage beta(alpha, t)");
        auto alpha = std::make_shared<double>(0.0);
        auto t = std::make_shared<double>(0.0);
        auto dist = std::make_shared<std::string>("normal");
        b->add_option("--alpha", *alpha, "standardized offset")->required();
        b->add_option("--t", *t, "half-width multiplier")->required();
        b->add_option("--dist", *dist)->capture_default_str();
        b->callback([&, alpha, t, dist]() {
            const auto d = osci::make_builtin(*dist);
            payload = ojson{{"type", "beta"},
                            {"alpha", jnum(*alpha)},
                            {"t", jnum(*t)},
                            {"density", d.name},
                            {"beta", jnum(osci::beta(*alpha, *t, d))}};
        });

        auto* as = compute->add_subcommand("alpha-star", "normal worst offset (closed form)");
        auto ast = std::make_shared<double>(0.0);
        as->add_option("--t", *ast)->required();
        as->callback([&, ast]() {
            payload = ojson{{"type", "alpha_star_normal"},
                            {"t", jnum(*ast)},
                            {"alpha_star", jnum(osci::alpha_star_normal(*ast))}};
        });

        auto* bs = compute->add_subcommand("beta-star", "worst-case miscoverage beta*(t)");
        auto bst = std::make_shared<double>(0.0);
        auto bsd = std::make_shared<std::string>("normal");
        bs->add_option("--t", *bst)->required();
        bs->add_option("--dist", *bsd)->capture_default_str();
        bs->callback([&, bst, bsd]() {
            const auto d = osci::make_builtin(*bsd);
            const auto r = osci::beta_star(*bst, d);
            payload = ojson{{"type", "beta_star"},
                            {"t", jnum(*bst)},
                            {"density", d.name},
                            {"beta_star", jnum(r.beta_star)},
                            {"alpha_star", jnum(r.alpha_star)}};
        });

        auto* rb = compute->add_subcommand("robbins", "nonparametric bound 1/(1+t)");
        auto rbt = std::make_shared<double>(0.0);
        rb->add_option("--t", *rbt)->required();
        rb->callback([&, rbt]() {
            payload = ojson{{"type", "robbins_bound"},
                            {"t", jnum(*rbt)},
                            {"bound", jnum(osci::robbins_bound(*rbt))}};
        });

        auto* mv = compute->add_subcommand("mean-value-l", "mean of the pdf over (x, b)");
        auto mvx = std::make_shared<double>(0.0);
        auto mvb = std::make_shared<double>(0.0);
        auto mvd = std::make_shared<std::string>("normal");
        mv->add_option("--x", *mvx)->required();
        mv->add_option("--b", *mvb)->required();
        mv->add_option("--dist", *mvd)->capture_default_str();
        mv->callback([&, mvx, mvb, mvd]() {
            const auto d = osci::make_builtin(*mvd);
            payload = ojson{{"type", "mean_value_l"},
                            {"x", jnum(*mvx)},
                            {"b", jnum(*mvb)},
                            {"density", d.name},
                            {"value", jnum(osci::mean_value_l(*mvx, *mvb, d))}};
        });

        auto* el = compute->add_subcommand("expected-length", "E(L) = 2t E|X-a|");
        auto elt = std::make_shared<double>(0.0);
        auto ela = std::make_shared<double>(0.0);
        auto elmu = std::make_shared<double>(0.0);
        auto elsig = std::make_shared<double>(1.0);
        auto eld = std::make_shared<std::string>("normal");
        el->add_option("--t", *elt)->required();
        el->add_option("--center", *ela)->capture_default_str();
        el->add_option("--mu", *elmu)->capture_default_str();
        el->add_option("--sigma", *elsig)->capture_default_str();
        el->add_option("--dist", *eld)->capture_default_str();
        el->callback([&, elt, ela, elmu, elsig, eld]() {
            const osci::LocationScaleModel m(osci::make_builtin(*eld), *elmu, *elsig);
            const auto v = osci::expected_length(*elt, *ela, m, quad_spec());
            ojson j{{"type", "expected_length"}, {"t", jnum(*elt)},     {"center", jnum(*ela)},
                    {"mu", jnum(*elmu)},         {"sigma", jnum(*elsig)}, {"density", m.density.name}};
            j["diverges"] = !v.has_value();
            j["value"] = v ? jnum(*v) : jnum(osci::kInf);
            payload = j;
        });

        auto* g = compute->add_subcommand("g", "scale coverage G(alpha, t1, t2)");
        auto ga = std::make_shared<double>(0.0);
        auto gt1 = std::make_shared<double>(0.0);
        auto gt2 = std::make_shared<std::string>("inf");
        auto gd = std::make_shared<std::string>("normal");
        g->add_option("--alpha", *ga)->required();
        g->add_option("--t1", *gt1)->required();
        g->add_option("--t2", *gt2)->capture_default_str();
        g->add_option("--dist", *gd)->capture_default_str();
        g->callback([&, ga, gt1, gt2, gd]() {
            const auto d = osci::make_builtin(*gd);
            const double t2 = parse_real_or_inf(*gt2, "--t2");
            payload = ojson{{"type", "coverage_G"},
                            {"alpha", jnum(*ga)},
                            {"t1", jnum(*gt1)},
                            {"t2", jnum(t2)},
                            {"density", d.name},
                            {"value", jnum(osci::coverage_G(*ga, *gt1, t2, d))}};
        });

        auto* cv = compute->add_subcommand("curvature", "derivatives of G at alpha = 0");
        auto ct1 = std::make_shared<double>(0.0);
        auto ct2 = std::make_shared<std::string>("inf");
        auto cd = std::make_shared<std::string>("normal");
        cv->add_option("--t1", *ct1)->required();
        cv->add_option("--t2", *ct2)->capture_default_str();
        cv->add_option("--dist", *cd)->capture_default_str();
        cv->callback([&, ct1, ct2, cd]() {
            const auto d = osci::make_builtin(*cd);
            const double t2 = parse_real_or_inf(*ct2, "--t2");
            const auto c = osci::g_curvature_at_zero(*ct1, t2, d);
            payload = ojson{{"type", "g_curvature_at_zero"},
                            {"t1", jnum(*ct1)},
                            {"t2", jnum(t2)},
                            {"density", d.name},
                            {"first_deriv", jnum(c.first_deriv)},
                            {"second_deriv", jnum(c.second_deriv)},
                            {"literal_condition_f1_gt_f2", c.literal_condition_f1_gt_f2},
                            {"local_min_verified", c.local_min_verified}};
        });

        auto* mst = compute->add_subcommand("m-star", "prior-knowledge threshold M*");
        auto mt1 = std::make_shared<double>(0.0);
        auto mt2 = std::make_shared<std::string>("inf");
        auto md = std::make_shared<std::string>("normal");
        auto approx = std::make_shared<bool>(false);
        mst->add_option("--t1", *mt1)->required();
        mst->add_option("--t2", *mt2)->capture_default_str();
        mst->add_option("--dist", *md)->capture_default_str();
        mst->add_flag("--approx", *approx, "use the closed-form tail approximation");
        mst->callback([&, mt1, mt2, md, approx]() {
            const auto d = osci::make_builtin(*md);
            const double t2 = parse_real_or_inf(*mt2, "--t2");
            const double v = *approx ? osci::m_star_gaussian_approx(*mt1, t2, d)
                                     : osci::m_star(*mt1, t2, d);
            payload = ojson{{"type", "m_star"},
                            {"t1", jnum(*mt1)},
                            {"t2", jnum(t2)},
                            {"density", d.name},
                            {"method", *approx ? "approx" : "exact"},
                            {"m_star", jnum(v)}};
        });

        auto* sb = compute->add_subcommand("scale-bound", "coverage bound under |mu-a| <= sigma*M");
        auto st1 = std::make_shared<double>(0.0);
        auto st2 = std::make_shared<std::string>("inf");
        auto sm = std::make_shared<std::string>("inf");
        auto sd = std::make_shared<std::string>("normal");
        sb->add_option("--t1", *st1)->required();
        sb->add_option("--t2", *st2)->capture_default_str();
        sb->add_option("--m", *sm)->capture_default_str();
        sb->add_option("--dist", *sd)->capture_default_str();
        sb->callback([&, st1, st2, sm, sd]() {
            const auto d = osci::make_builtin(*sd);
            const double t2 = parse_real_or_inf(*st2, "--t2");
            const double M = parse_real_or_inf(*sm, "--m");
            payload = ojson{{"type", "scale_coverage_bound"},
                            {"t1", jnum(*st1)},
                            {"t2", jnum(t2)},
                            {"m", jnum(M)},
                            {"density", d.name},
                            {"bound", jnum(osci::scale_coverage_bound(*st1, t2, M, d))}};
        });

        auto* fk = compute->add_subcommand("fisher-k", "scale information integral k");
        auto fkd = std::make_shared<std::string>("normal");
        fk->add_option("--dist", *fkd)->required();
        fk->callback([&, fkd]() {
            const auto d = osci::make_builtin(*fkd);
            const double k = osci::fisher_k(d, quad_spec());
            payload = ojson{{"type", "fisher_k"},
                            {"density", d.name},
                            {"k", jnum(k)},
                            {"g_sigma_sigma_at_1", jnum(k - 1.0)}};
        });

        auto* vc = compute->add_subcommand("verify-class", "audit unimodal-symmetric membership");
        auto vcd = std::make_shared<std::string>("normal");
        auto vgrid = std::make_shared<int>(1000);
        vc->add_option("--dist", *vcd)->required();
        vc->add_option("--grid", *vgrid, "grid points (>= 100)")->capture_default_str();
        vc->callback([&, vcd, vgrid]() {
            const auto d = osci::make_builtin(*vcd);
            const auto rep = osci::verify_class_membership(d, *vgrid);
            payload = ojson{{"type", "class_membership"},
                            {"density", d.name},
                            {"grid", *vgrid},
                            {"max_symmetry_violation", jnum(rep.max_symmetry_violation)},
                            {"max_unimodality_increase", jnum(rep.max_unimodality_increase)},
                            {"normalization_mass", jnum(rep.normalization_mass)},
                            {"symmetric", rep.symmetric},
                            {"unimodal", rep.unimodal},
                            {"normalized", rep.normalized},
                            {"in_class", rep.in_class}};
        });

        auto* st = compute->add_subcommand("standardize", "y = (x-mu)/sigma, alpha = (a-mu)/sigma");
        auto stx = std::make_shared<double>(0.0);
        auto sta = std::make_shared<double>(0.0);
        auto stmu = std::make_shared<double>(0.0);
        auto stsig = std::make_shared<double>(1.0);
        auto std_d = std::make_shared<std::string>("normal");
        st->add_option("--x", *stx)->required();
        st->add_option("--center", *sta)->capture_default_str();
        st->add_option("--mu", *stmu)->capture_default_str();
        st->add_option("--sigma", *stsig)->capture_default_str();
        st->add_option("--dist", *std_d)->capture_default_str();
        st->callback([&, stx, sta, stmu, stsig, std_d]() {
            const osci::LocationScaleModel m(osci::make_builtin(*std_d), *stmu, *stsig);
            const auto [y, alpha] = osci::standardize(m, *stx, *sta);
            payload = ojson{{"type", "standardize"}, {"x", jnum(*stx)},
                            {"center", jnum(*sta)},  {"mu", jnum(*stmu)},
                            {"sigma", jnum(*stsig)}, {"y", jnum(y)},
                            {"alpha", jnum(alpha)}};
        });
    }

    // ---- solve -------------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "invert a bound for its parameter");
    solve->require_subcommand(1);
    {
        auto* lt = solve->add_subcommand("location-t", "smallest t for a target confidence");
        auto conf = std::make_shared<double>(0.0);
        auto nonpar = std::make_shared<bool>(false);
        auto dist = std::make_shared<std::string>("normal");
        lt->add_option("--confidence", *conf)->required();
        lt->add_flag("--nonparametric", *nonpar, "use the distribution-free bound");
        lt->add_option("--dist", *dist)->capture_default_str();
        lt->callback([&, conf, nonpar, dist]() {
            ojson j{{"type", "location_t"}, {"confidence", jnum(*conf)}};
            if (*nonpar) {
                j["method"] = "nonparametric";
                j["t"] = jnum(osci::solve_t_nonparametric(*conf));
            } else {
                const auto d = osci::make_builtin(*dist);
                j["method"] = "parametric";
                j["density"] = d.name;
                j["t"] = jnum(osci::solve_t_parametric(*conf, d));
            }
            payload = j;
        });

        auto* sd = solve->add_subcommand("scale-design", "pick (t1, t2) for a confidence and prior");
        auto sconf = std::make_shared<double>(0.0);
        auto sm = std::make_shared<std::string>("inf");
        auto sdd = std::make_shared<std::string>("normal");
        sd->add_option("--confidence", *sconf)->required();
        sd->add_option("--m", *sm, "prior ratio or \"inf\"")->capture_default_str();
        sd->add_option("--dist", *sdd)->capture_default_str();
        sd->callback([&, sconf, sm, sdd]() {
            const auto d = osci::make_builtin(*sdd);
            const double M = parse_real_or_inf(*sm, "--m");
            const auto design = osci::design_scale_interval(*sconf, M, d);
            ojson j{{"type", "scale_design"},
                    {"confidence", jnum(*sconf)},
                    {"m", jnum(M)},
                    {"density", d.name}};
            j["design"] = design_to_json(design);
            payload = j;
        });
    }

    // ---- simulate ----------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo verification");
    simulate->require_subcommand(1);
    {
        auto* cov = simulate->add_subcommand("coverage", "empirical coverage vs the bound");
        auto kind = std::make_shared<std::string>();
        auto dist = std::make_shared<std::string>("normal");
        auto mu = std::make_shared<double>(0.0);
        auto sigma = std::make_shared<double>(1.0);
        auto center = std::make_shared<double>(0.0);
        auto t = std::make_shared<double>(0.0);
        auto t1 = std::make_shared<double>(0.0);
        auto t2 = std::make_shared<std::string>("inf");
        auto m = std::make_shared<std::string>("inf");
        auto reps = std::make_shared<std::uint64_t>(100000);
        auto seed = std::make_shared<std::uint64_t>(0);
        cov->add_option("--kind", *kind, "location_parametric|location_nonparametric|scale")
            ->required()
            ->check(CLI::IsMember({"location_parametric", "location_nonparametric", "scale"}));
        cov->add_option("--dist", *dist)->capture_default_str();
        cov->add_option("--mu", *mu)->capture_default_str();
        cov->add_option("--sigma", *sigma)->capture_default_str();
        cov->add_option("--center", *center)->capture_default_str();
        cov->add_option("--t", *t, "location half-width multiplier");
        cov->add_option("--t1", *t1, "scale lower divisor");
        cov->add_option("--t2", *t2, "scale upper divisor or \"inf\"")->capture_default_str();
        cov->add_option("--m", *m, "scale prior ratio or \"inf\"")->capture_default_str();
        cov->add_option("--reps", *reps)->capture_default_str();
        cov->add_option("--seed", *seed)->capture_default_str();
        cov->callback([&, kind, dist, mu, sigma, center, t, t1, t2, m, reps, seed]() {
            osci::SimConfig cfg;
            cfg.kind = *kind == "scale" ? osci::SimKind::scale
                       : *kind == "location_parametric" ? osci::SimKind::location_parametric
                                                        : osci::SimKind::location_nonparametric;
            cfg.density = *dist;
            cfg.mu = *mu;
            cfg.sigma = *sigma;
            cfg.a = *center;
            cfg.t = *t;
            cfg.t1 = *t1;
            cfg.t2 = parse_real_or_inf(*t2, "--t2");
            cfg.M = parse_real_or_inf(*m, "--m");
            cfg.reps = *reps;
            cfg.seed = *seed;
            payload = report_to_json(osci::simulate_coverage(cfg));
        });

        auto* wa = simulate->add_subcommand("worst-alpha", "empirical worst-offset curve");
        auto wkind = std::make_shared<std::string>("location_parametric");
        auto wdist = std::make_shared<std::string>("normal");
        auto wt = std::make_shared<double>(0.0);
        auto wt1 = std::make_shared<double>(0.0);
        auto wt2 = std::make_shared<std::string>("inf");
        auto amin = std::make_shared<double>(0.0);
        auto amax = std::make_shared<double>(3.0);
        auto astep = std::make_shared<double>(0.05);
        auto wreps = std::make_shared<std::uint64_t>(100000);
        auto wseed = std::make_shared<std::uint64_t>(0);
        wa->add_option("--kind", *wkind)
            ->check(CLI::IsMember({"location_parametric", "location_nonparametric", "scale"}))
            ->capture_default_str();
        wa->add_option("--dist", *wdist)->capture_default_str();
        wa->add_option("--t", *wt, "location multiplier (location kinds)");
        wa->add_option("--t1", *wt1, "scale lower divisor");
        wa->add_option("--t2", *wt2, "scale upper divisor or \"inf\"")->capture_default_str();
        wa->add_option("--alpha-min", *amin)->capture_default_str();
        wa->add_option("--alpha-max", *amax)->capture_default_str();
        wa->add_option("--alpha-step", *astep)->capture_default_str();
        wa->add_option("--reps", *wreps, "replicates per grid cell")->capture_default_str();
        wa->add_option("--seed", *wseed)->capture_default_str();
        wa->callback([&, wkind, wdist, wt, wt1, wt2, amin, amax, astep, wreps, wseed]() {
            std::vector<double> grid;
            for (double a = *amin; a <= *amax + 1e-12; a += *astep) grid.push_back(a);
            const auto sim_kind = *wkind == "scale" ? osci::SimKind::scale
                                  : *wkind == "location_parametric"
                                      ? osci::SimKind::location_parametric
                                      : osci::SimKind::location_nonparametric;
            const double first = sim_kind == osci::SimKind::scale ? *wt1 : *wt;
            const auto res = osci::empirical_worst_case_alpha(
                sim_kind, first, parse_real_or_inf(*wt2, "--t2"), *wdist, grid, *wreps, *wseed);
            ojson rows = ojson::array();
            for (const auto& pt : res.curve) {
                rows.push_back(ojson{{"alpha", jnum(pt.alpha)},
                                     {"miscoverage", jnum(pt.miscoverage)},
                                     {"mc_stderr", jnum(pt.stderr_mc)}});
            }
            payload = ojson{{"type", "worst_alpha"},
                            {"kind", std::string(osci::to_string(sim_kind))},
                            {"density", *wdist},
                            {"reps", *wreps},
                            {"seed", *wseed},
                            {"alpha_worst", jnum(res.alpha_worst)},
                            {"miscoverage_worst", jnum(res.miscoverage_worst)},
                            {"rows", std::move(rows)}};
        });
    }

    // ---- game --------------------------------------------------------------
    {
        auto* game = app.add_subcommand("game", "adversarial location game ($1 vs $5)");
        auto t = std::make_shared<double>(9.0);
        auto rounds = std::make_shared<std::uint64_t>(200);
        auto path = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(0);
        auto full_log = std::make_shared<bool>(false);
        game->add_option("--t", *t)->capture_default_str();
        game->add_option("--rounds", *rounds)->capture_default_str();
        game->add_option("--adversary", *path, "strategy config file (JSON)")->required();
        game->add_option("--seed", *seed)->capture_default_str();
        game->add_flag("--full-log", *full_log, "include the per-round log in the payload");
        game->callback([&, t, rounds, path, seed, full_log]() {
            const auto strategy = load_strategy(*path);
            const auto rec = osci::play_game(strategy, *t, *rounds, *seed);
            ojson j{{"type", "game_record"},
                    {"t", jnum(*t)},
                    {"rounds", rec.rounds},
                    {"seed", *seed},
                    {"strategy_file", *path},
                    {"covers", rec.covers},
                    {"misses", rec.rounds - rec.covers},
                    {"coverage", jnum(static_cast<double>(rec.covers) /
                                      static_cast<double>(rec.rounds))},
                    {"player_payoff", jnum(rec.player_payoff)},
                    {"mean_payoff_per_round",
                     jnum(rec.player_payoff / static_cast<double>(rec.rounds))}};
            if (*full_log) {
                ojson rows = ojson::array();
                for (const auto& r : rec.log) {
                    rows.push_back(ojson{{"round", r.round},
                                         {"density", r.density},
                                         {"mu", jnum(r.mu)},
                                         {"x", jnum(r.x)},
                                         {"lo", jnum(r.lo)},
                                         {"hi", jnum(r.hi)},
                                         {"covered", r.covered}});
                }
                j["rows"] = std::move(rows);
            }
            payload = j;
        });
    }

    // ---- table -------------------------------------------------------------
    auto* table = app.add_subcommand("table", "reference tables and profiles");
    table->require_subcommand(1);
    {
        auto* pe = table->add_subcommand("paper-examples",
                                         "classic 90/95/99% scale intervals, recomputed");
        pe->callback([&]() { payload = paper_examples_payload(); });

        auto* gp = table->add_subcommand("g-profile", "G(alpha) profile for plotting");
        auto t1 = std::make_shared<double>(0.0);
        auto t2 = std::make_shared<std::string>("inf");
        auto dist = std::make_shared<std::string>("normal");
        auto amax = std::make_shared<double>(6.0);
        auto steps = std::make_shared<int>(121);
        gp->add_option("--t1", *t1)->required();
        gp->add_option("--t2", *t2)->capture_default_str();
        gp->add_option("--dist", *dist)->capture_default_str();
        gp->add_option("--alpha-max", *amax)->capture_default_str();
        gp->add_option("--steps", *steps)->capture_default_str();
        gp->callback([&, t1, t2, dist, amax, steps]() {
            const auto d = osci::make_builtin(*dist);
            const double tt2 = parse_real_or_inf(*t2, "--t2");
            ojson rows = ojson::array();
            for (int i = 0; i < *steps; ++i) {
                const double a = *amax * static_cast<double>(i) / (*steps - 1);
                rows.push_back(
                    ojson{{"alpha", jnum(a)}, {"g", jnum(osci::coverage_G(a, *t1, tt2, d))}});
            }
            payload = ojson{{"type", "g_profile"},
                            {"t1", jnum(*t1)},
                            {"t2", jnum(tt2)},
                            {"density", d.name},
                            {"rows", std::move(rows)}};
        });
    }

    // ---- scenario ----------------------------------------------------------
    {
        auto* sc = app.add_subcommand("scenario", "applied measurement scenarios");
        sc->require_subcommand(1);
        auto* desk = sc->add_subcommand(
            "desk", "prior window + reading resolution -> scale interval design");
        auto pc = std::make_shared<double>(0.0);
        auto phw = std::make_shared<double>(0.0);
        auto res = std::make_shared<double>(0.0);
        auto conf = std::make_shared<double>(0.0);
        auto x = std::make_shared<double>(std::numeric_limits<double>::quiet_NaN());
        auto rule = std::make_shared<double>(3.0);
        auto dist = std::make_shared<std::string>("normal");
        desk->add_option("--prior-center", *pc, "a-priori central value")->required();
        desk->add_option("--prior-halfwidth", *phw, "certain bound on |mu - center|")->required();
        desk->add_option("--resolution", *res, "reading granularity")->required();
        desk->add_option("--confidence", *conf)->required();
        desk->add_option("--x", *x, "observed measurement (optional)");
        desk->add_option("--sigma-rule", *rule, "sigma_min = resolution / this factor")
            ->capture_default_str();
        desk->add_option("--dist", *dist)->capture_default_str();
        desk->callback([&, pc, phw, res, conf, x, rule, dist]() {
            const auto d = osci::make_builtin(*dist);
            osci::DeskScenario sc_in;
            sc_in.prior_center = *pc;
            sc_in.prior_halfwidth = *phw;
            sc_in.resolution = *res;
            sc_in.confidence = *conf;
            sc_in.sigma_rule = *rule;
            std::optional<double> obs;
            if (!std::isnan(*x)) obs = *x;
            const auto rep = osci::run_desk_scenario(sc_in, obs, d);
            ojson j{{"type", "desk_scenario"},
                    {"prior_center", jnum(*pc)},
                    {"prior_halfwidth", jnum(*phw)},
                    {"resolution", jnum(*res)},
                    {"sigma_rule", jnum(*rule)},
                    {"confidence", jnum(*conf)},
                    {"sigma_min", jnum(rep.sigma_min)},
                    {"m", jnum(rep.prior_ratio_m)}};
            j["design"] = design_to_json(rep.design);
            if (rep.reference) {
                const auto& r = *rep.reference;
                j["reference_design"] = ojson{{"t1", jnum(r.t1)},
                                              {"t2", jnum(r.t2)},
                                              {"confidence", jnum(r.confidence)},
                                              {"m_star", jnum(r.m_star)},
                                              {"meets_prior", r.meets_prior},
                                              {"note", r.note}};
            }
            if (rep.interval) j["interval"] = interval_to_json(*rep.interval);
            payload = j;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const osci::NonConvergence& e) {
        std::cerr << "error: " << e.what() << " (estimate " << fmt17(e.estimate())
                  << ", error bound " << fmt17(e.error_bound()) << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (payload) emit(*payload, out_mode, command_echo);
    return 0;
}
