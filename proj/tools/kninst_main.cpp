// Command-line surface for the instanton geodesics library: horizon and
// block charts, signature maps, colatitude-potential analysis, orbit
// classification, lazy-particle sign tables, trajectory tracing, parameter
// sweeps, and the verification suite runner.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
// 4 verification failures present.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kninst/corpus.hpp"
#include "kninst/dynamics.hpp"
#include "kninst/geometry.hpp"
#include "kninst/horizons.hpp"
#include "kninst/integrals.hpp"
#include "kninst/integrator.hpp"
#include "kninst/io.hpp"
#include "kninst/verify.hpp"

using nlohmann::json;
using namespace kninst;

namespace {

struct Options {
    double M = 1.0, a = 0.0, e = 0.0, Lambda = 0.0;
    double q_charge = 0.0;
    // constants for potential/classify
    double q_mass = 0.0, energy = 0.0, lz = 0.0;
    double carter_k = 0.0, carter_q = 0.0;
    bool have_carter_k = false, have_carter_q = false;
    // trace seed state
    double r0 = 4.0, theta0 = M_PI / 2.0, phi0 = 0.0, t0 = 0.0;
    double vr = 0.0, vtheta = 0.0, vphi = 0.0, vt = 0.0;
    std::string mode = "mino";
    double span = 100.0, rel_tol = 1e-10, abs_tol = 1e-12;
    long max_steps = 500000;
    // grids
    double r_min = -2.0, r_max = 6.0;
    int r_count = 64;
    double theta_min = 0.05, theta_max = M_PI - 0.05;
    int theta_count = 33;
    // io
    std::string config_path, out_dir = ".", format = "json";
    std::uint64_t seed = 20250808ull;
    // verify
    bool quick = false;
    // sweep
    std::string sub;
    std::vector<std::string> vary;
    int jobs = 4;
};

const std::vector<std::string> kConfigKeys = {
    "M",      "a",        "e",        "Lambda",    "q_charge", "q_mass",    "energy",
    "lz",     "carter_k", "carter_q", "r0",        "theta0",   "phi0",      "t0",
    "vr",     "vtheta",   "vphi",     "vt",        "mode",     "span",      "rel_tol",
    "abs_tol", "max_steps", "r_min",  "r_max",     "r_count",  "theta_min", "theta_max",
    "theta_count", "seed", "format"};

void apply_config_file(Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + o.config_path);
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, val] : cfg.items()) {
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            throw std::invalid_argument("unknown config key: " + key);
        if (key == "M") o.M = val.get<double>();
        else if (key == "a") o.a = val.get<double>();
        else if (key == "e") o.e = val.get<double>();
        else if (key == "Lambda") o.Lambda = val.get<double>();
        else if (key == "q_charge") o.q_charge = val.get<double>();
        else if (key == "q_mass") o.q_mass = val.get<double>();
        else if (key == "energy") o.energy = val.get<double>();
        else if (key == "lz") o.lz = val.get<double>();
        else if (key == "carter_k") { o.carter_k = val.get<double>(); o.have_carter_k = true; }
        else if (key == "carter_q") { o.carter_q = val.get<double>(); o.have_carter_q = true; }
        else if (key == "r0") o.r0 = val.get<double>();
        else if (key == "theta0") o.theta0 = val.get<double>();
        else if (key == "phi0") o.phi0 = val.get<double>();
        else if (key == "t0") o.t0 = val.get<double>();
        else if (key == "vr") o.vr = val.get<double>();
        else if (key == "vtheta") o.vtheta = val.get<double>();
        else if (key == "vphi") o.vphi = val.get<double>();
        else if (key == "vt") o.vt = val.get<double>();
        else if (key == "mode") o.mode = val.get<std::string>();
        else if (key == "span") o.span = val.get<double>();
        else if (key == "rel_tol") o.rel_tol = val.get<double>();
        else if (key == "abs_tol") o.abs_tol = val.get<double>();
        else if (key == "max_steps") o.max_steps = val.get<long>();
        else if (key == "r_min") o.r_min = val.get<double>();
        else if (key == "r_max") o.r_max = val.get<double>();
        else if (key == "r_count") o.r_count = val.get<int>();
        else if (key == "theta_min") o.theta_min = val.get<double>();
        else if (key == "theta_max") o.theta_max = val.get<double>();
        else if (key == "theta_count") o.theta_count = val.get<int>();
        else if (key == "seed") o.seed = val.get<std::uint64_t>();
        else if (key == "format") o.format = val.get<std::string>();
    }
}

void validate(const Options& o) {
    if (!(std::isfinite(o.M) && std::isfinite(o.a) && std::isfinite(o.e) &&
          std::isfinite(o.Lambda)))
        throw std::invalid_argument("parameters must be finite");
    if (o.a < 0.0) throw std::invalid_argument("a must be >= 0");
    if (o.r_min >= o.r_max || o.theta_min >= o.theta_max)
        throw std::invalid_argument("grid bounds must be ordered");
    if (o.format != "json" && o.format != "csv")
        throw std::invalid_argument("format must be json or csv");
}

InstantonParams params_of(const Options& o) { return InstantonParams(o.M, o.a, o.e, o.Lambda); }

MotionConstants constants_of(const Options& o) {
    const InstantonParams p = params_of(o);
    MotionConstants c;
    c.q_mass = o.q_mass;
    c.E = o.energy;
    c.Lz = o.lz;
    c.q_charge = o.q_charge;
    const double la = c.Lz - p.a * c.E;
    const double shift = p.Xi * p.Xi * la * la;
    if (o.have_carter_k) {
        c.K = o.carter_k;
        c.Q = c.K - shift;
    } else if (o.have_carter_q) {
        c.Q = o.carter_q;
        c.K = c.Q + shift;
    }
    return c;
}

json resolved_config(const Options& o, const std::string& command) {
    json cfg;
    cfg["command"] = command;
    cfg["M"] = o.M;
    cfg["a"] = o.a;
    cfg["e"] = o.e;
    cfg["Lambda"] = o.Lambda;
    cfg["q_charge"] = o.q_charge;
    cfg["seed"] = o.seed;
    cfg["format"] = o.format;
    if (command == "potential" || command == "classify") {
        cfg["q_mass"] = o.q_mass;
        cfg["energy"] = o.energy;
        cfg["lz"] = o.lz;
        if (o.have_carter_k) cfg["carter_k"] = o.carter_k;
        if (o.have_carter_q) cfg["carter_q"] = o.carter_q;
    }
    if (command == "trace") {
        cfg["r0"] = o.r0;
        cfg["theta0"] = o.theta0;
        cfg["phi0"] = o.phi0;
        cfg["t0"] = o.t0;
        cfg["vr"] = o.vr;
        cfg["vtheta"] = o.vtheta;
        cfg["vphi"] = o.vphi;
        cfg["vt"] = o.vt;
        cfg["mode"] = o.mode;
        cfg["span"] = o.span;
        cfg["rel_tol"] = o.rel_tol;
        cfg["abs_tol"] = o.abs_tol;
        cfg["max_steps"] = o.max_steps;
    }
    if (command == "signature-map") {
        cfg["r_min"] = o.r_min;
        cfg["r_max"] = o.r_max;
        cfg["r_count"] = o.r_count;
        cfg["theta_min"] = o.theta_min;
        cfg["theta_max"] = o.theta_max;
        cfg["theta_count"] = o.theta_count;
    }
    return cfg;
}

json root_structure_json(const RootStructure& rs) {
    json j;
    j["tag"] = to_string(rs.tag);
    j["roots"] = json::array();
    for (const auto& rr : rs.roots)
        j["roots"].push_back(
            {{"r", rr.r}, {"multiplicity", rr.multiplicity}, {"residual", rr.residual}});
    return j;
}

json block_chart_json(const BlockChart& bc) {
    json j;
    j["roots"] = root_structure_json(bc.roots);
    j["uncharted"] = bc.uncharted;
    if (!bc.note.empty()) j["note"] = bc.note;
    j["blocks"] = json::array();
    for (const auto& b : bc.blocks) {
        json bj;
        bj["label"] = to_string(b.label);
        bj["lo"] = std::isinf(b.lo) ? json() : json(b.lo);
        bj["hi"] = std::isinf(b.hi) ? json() : json(b.hi);
        j["blocks"].push_back(bj);
    }
    if (bc.theta.a_crit) j["a_crit"] = *bc.theta.a_crit;
    if (bc.theta.angles) {
        j["theta_minus"] = bc.theta.angles->first;
        j["theta_plus"] = bc.theta.angles->second;
    }
    return j;
}

std::string out_path(const Options& o, const std::string& prefix, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / (prefix + name)).string();
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Numeric failures in the library surface as exceptions
// and are mapped to exit code 3 in main.

int cmd_roots(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    json out = json_envelope(resolved_config(o, "roots"));
    if (p.L != 0.0) {
        const DiscriminantTriple d = discriminants(p);
        out["discriminants"] = {{"D1", d.D1},
                                {"D2", d.D2},
                                {"D3", d.D3},
                                {"predicted_real_count", d.predicted_real_count}};
    }
    const BlockChart bc = block_chart(p);
    out["structure"] = root_structure_json(bc.roots);
    json labels = json::array();
    for (const auto& b : bc.blocks) labels.push_back(to_string(b.label));
    out["block_labels"] = labels;
    write_json(out_path(o, prefix, "roots.json"), out);
    return 0;
}

int cmd_blocks(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    json out = json_envelope(resolved_config(o, "blocks"));
    out["chart"] = block_chart_json(block_chart(p));
    write_json(out_path(o, prefix, "blocks.json"), out);
    return 0;
}

int cmd_theta_horizons(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    const ThetaHorizons th = theta_horizons(p);
    json out = json_envelope(resolved_config(o, "theta-horizons"));
    out["a_crit"] = th.a_crit ? json(*th.a_crit) : json();
    out["theta_minus"] = th.angles ? json(th.angles->first) : json();
    out["theta_plus"] = th.angles ? json(th.angles->second) : json();
    write_json(out_path(o, prefix, "theta_horizons.json"), out);
    return 0;
}

int cmd_signature_map(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    const json cfg = resolved_config(o, "signature-map");
    CsvWriter csv(out_path(o, prefix, "signature_map.csv"), cfg,
                  {"r", "theta", "lambda1", "lambda2", "lambda3", "lambda4", "class",
                   "inside_omega", "inside_cone"});
    for (int i = 0; i < o.r_count; ++i) {
        const double r = o.r_min + (o.r_max - o.r_min) * i / std::max(1, o.r_count - 1);
        for (int jj = 0; jj < o.theta_count; ++jj) {
            const double th =
                o.theta_min + (o.theta_max - o.theta_min) * jj / std::max(1, o.theta_count - 1);
            try {
                const SignatureReport rep = signature_at(p, r, th);
                csv.row({format_double(r), format_double(th), format_double(rep.lambda1),
                         format_double(rep.lambda2), format_double(rep.lambda3),
                         format_double(rep.lambda4), to_string(rep.cls),
                         rep.inside_omega ? "1" : "0", rep.inside_cone ? "1" : "0"});
            } catch (const ChartFailure&) {
                csv.row({format_double(r), format_double(th), "", "", "", "", "ChartFailure", "",
                         ""});
            }
        }
    }
    return 0;
}

int cmd_potential(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    const MotionConstants c = constants_of(o);
    const json cfg = resolved_config(o, "potential");
    const PotentialProfile prof = potential_profile(p, c);
    {
        CsvWriter csv(out_path(o, prefix, "potential.csv"), cfg, {"theta", "V", "dVdtheta"});
        for (const auto& dom : prof.domains) {
            for (int i = 0; i <= 512; ++i) {
                const double th = dom.lo + (dom.hi - dom.lo) * i / 512.0;
                csv.row({format_double(th), format_double(potential_V(p, c, th)),
                         format_double(potential_derivative(p, c, th))});
            }
        }
    }
    json out = json_envelope(cfg);
    out["roots"] = prof.roots;
    out["extrema"] = json::array();
    for (const auto& ex : prof.extrema)
        out["extrema"].push_back({{"theta", ex.theta},
                                  {"V", ex.V},
                                  {"kind", ex.kind == ExtremumKind::Min ? "min" : "max"}});
    auto limit_json = [](const Limit& l) {
        json j;
        j["kind"] = to_string(l.kind);
        if (l.kind == LimitKind::Finite) j["value"] = l.value;
        return j;
    };
    out["pole_limit_north"] = limit_json(prof.pole_limit_north);
    out["pole_limit_south"] = limit_json(prof.pole_limit_south);
    if (prof.cone_limits) {
        out["cone_limits"] = {{"minus_inside", limit_json(prof.cone_limits->minus_inside)},
                              {"minus_outside", limit_json(prof.cone_limits->minus_outside)},
                              {"plus_outside", limit_json(prof.cone_limits->plus_outside)},
                              {"plus_inside", limit_json(prof.cone_limits->plus_inside)}};
    }
    write_json(out_path(o, prefix, "potential.json"), out);
    return 0;
}

int cmd_classify(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    const MotionConstants c = constants_of(o);
    const auto classes = classify_motion(p, c);
    json out = json_envelope(resolved_config(o, "classify"));
    out["classes"] = json::array();
    for (const auto& oc : classes) {
        out["classes"].push_back({{"tag", to_string(oc.tag)},
                                  {"theta_lo", oc.theta_lo},
                                  {"theta_hi", oc.theta_hi},
                                  {"witnesses",
                                   {{"Q", oc.Q},
                                    {"V_min", oc.V_min},
                                    {"V_max", oc.V_max},
                                    {"root_count", oc.root_count},
                                    {"matched_reference_case", oc.matched_reference_case}}}});
    }
    write_json(out_path(o, prefix, "classify.json"), out);
    return 0;
}

int cmd_lazy_table(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    const BlockChart bc = block_chart(p);
    json out = json_envelope(resolved_config(o, "lazy-table"));
    json rows = json::array();

    struct Cell {
        std::string name;
        double r;
        int ref_phi;  // reference-table entry for qe > 0
        int ref_t;
    };
    std::vector<Cell> cells;
    auto rep_of = [](const Block& b) {
        if (std::isinf(b.lo)) return b.hi - std::max(1.0, 0.5 * std::abs(b.hi));
        if (std::isinf(b.hi)) return b.lo + std::max(1.0, 0.5 * std::abs(b.lo));
        return 0.5 * (b.lo + b.hi);
    };
    if (!bc.uncharted && p.Lambda <= 0.0) {
        // Reference columns: AdS, Block I (r>0), Block I (r<0), Block II.
        for (const auto& b : bc.blocks) {
            if (b.label == BlockLabel::AdS) cells.push_back({"AdS", rep_of(b), +1, -1});
            if (b.label == BlockLabel::I) {
                if (b.hi > 0.0) cells.push_back({"I r>0", 0.5 * b.hi, -1, +1});
                if (b.lo < 0.0) cells.push_back({"I r<0", 0.5 * b.lo, +1, -1});
            }
            if (b.label == BlockLabel::II) cells.push_back({"II", rep_of(b), -1, +1});
        }
    } else if (!bc.uncharted) {
        // dS columns: dS+, dS-, I, II, III (r>0), III (r<0).
        for (const auto& b : bc.blocks) {
            if (b.label == BlockLabel::dSPlus) cells.push_back({"dS+", rep_of(b), +1, -1});
            if (b.label == BlockLabel::dSMinus) cells.push_back({"dS-", rep_of(b), -1, +1});
            if (b.label == BlockLabel::I) cells.push_back({"I", rep_of(b), -1, +1});
            if (b.label == BlockLabel::II) {
                const double r = b.hi > 0.5 ? 0.5 * b.hi : rep_of(b);
                cells.push_back({"II", r, +1, -1});
            }
            if (b.label == BlockLabel::III) {
                if (b.hi > 0.0) cells.push_back({"III r>0", 0.5 * b.hi, -1, +1});
                if (b.lo < 0.0)
                    cells.push_back(
                        {"III r<0", std::min(0.5 * b.lo, 0.5 * (b.lo + b.hi)), +1, -1});
            }
        }
    }

    for (const auto& cell : cells) {
        for (int qe : {+1, -1}) {
            for (bool inside_omega : {false, true}) {
                double theta = M_PI / 2.0;
                if (inside_omega) {
                    // Realizable only when |r| < a; sample near the axis.
                    if (std::abs(cell.r) >= p.a || p.a == 0.0) continue;
                    theta = 0.1;
                    const double C = std::cos(theta);
                    if (cell.r * cell.r - p.a * p.a * C * C >= 0.0) continue;
                }
                json row;
                row["block"] = cell.name;
                row["r"] = cell.r;
                row["theta"] = theta;
                row["sign_qe"] = qe;
                row["inside_omega"] = inside_omega;
                int want_phi = cell.ref_phi * qe;
                int want_t = cell.ref_t * qe;
                if (inside_omega) {
                    want_phi = -want_phi;
                    want_t = -want_t;
                }
                if (cell.r * cell.r < p.a * p.a) want_t = -want_t;
                try {
                    const LazySigns ls = lazy_signs(p, qe, cell.r, theta);
                    row["sign_t"] = ls.sign_t;
                    row["sign_phi"] = ls.sign_phi;
                    row["reference_sign_t"] = want_t;
                    row["reference_sign_phi"] = want_phi;
                    row["match"] = ls.sign_t == want_t && ls.sign_phi == want_phi;
                } catch (const ChartFailure& ex) {
                    row["error"] = ex.what();
                }
                rows.push_back(row);
            }
        }
    }
    out["rows"] = rows;
    out["uncharted"] = bc.uncharted;
    if (o.format == "csv") {
        CsvWriter csv(out_path(o, prefix, "lazy_table.csv"), out["config"],
                      {"block", "r", "theta", "sign_qe", "inside_omega", "sign_t", "sign_phi",
                       "reference_sign_t", "reference_sign_phi", "match"});
        for (const auto& row : rows) {
            if (row.contains("error")) continue;
            csv.row({row["block"].get<std::string>(), format_double(row["r"].get<double>()),
                     format_double(row["theta"].get<double>()),
                     std::to_string(row["sign_qe"].get<int>()),
                     row["inside_omega"].get<bool>() ? "1" : "0",
                     std::to_string(row["sign_t"].get<int>()),
                     std::to_string(row["sign_phi"].get<int>()),
                     std::to_string(row["reference_sign_t"].get<int>()),
                     std::to_string(row["reference_sign_phi"].get<int>()),
                     row["match"].get<bool>() ? "1" : "0"});
        }
    }
    write_json(out_path(o, prefix, "lazy_table.json"), out);
    return 0;
}

int cmd_trace(const Options& o, const std::string& prefix) {
    const InstantonParams p = params_of(o);
    IntegratorOptions opts;
    if (o.mode != "hamiltonian" && o.mode != "mino")
        throw std::invalid_argument("mode must be mino or hamiltonian");
    opts.mode = o.mode == "hamiltonian" ? IntegratorMode::CanonicalHamiltonian
                                        : IntegratorMode::MinoFirstIntegral;
    opts.rel_tol = o.rel_tol;
    opts.abs_tol = o.abs_tol;
    opts.s_span = o.span;
    opts.max_steps = o.max_steps;
    const TangentState st{o.r0, o.theta0, o.phi0, o.t0, o.vr, o.vtheta, o.vphi, o.vt};
    const TrajectoryRecord rec = integrate(p, o.q_charge, st, opts);

    const json cfg = resolved_config(o, "trace");
    {
        CsvWriter csv(out_path(o, prefix, "trace.csv"), cfg,
                      {"param", "s", "r", "theta", "phi", "t", "vr", "vtheta", "vphi", "vt",
                       "drift_q", "drift_E", "drift_Lz", "drift_K", "constraint_resid"});
        for (const auto& sm : rec.samples)
            csv.row({format_double(sm.param), format_double(sm.s), format_double(sm.r),
                     format_double(sm.theta), format_double(sm.phi), format_double(sm.t),
                     format_double(sm.vr), format_double(sm.vtheta), format_double(sm.vphi),
                     format_double(sm.vt), format_double(sm.drift[0]), format_double(sm.drift[1]),
                     format_double(sm.drift[2]), format_double(sm.drift[3]),
                     format_double(sm.constraint_resid)});
    }
    json out = json_envelope(cfg);
    out["status"] = to_string(rec.status);
    if (rec.stop_event) out["stop_event"] = to_string(*rec.stop_event);
    out["steps"] = rec.steps_taken;
    out["initial_constants"] = {{"q_mass", rec.initial_constants.q_mass},
                                {"E", rec.initial_constants.E},
                                {"Lz", rec.initial_constants.Lz},
                                {"K", rec.initial_constants.K},
                                {"Q", rec.initial_constants.Q}};
    double worst[4] = {0, 0, 0, 0};
    double cworst = 0.0;
    for (const auto& sm : rec.samples) {
        for (int i = 0; i < 4; ++i) worst[i] = std::max(worst[i], sm.drift[i]);
        cworst = std::max(cworst, sm.constraint_resid);
    }
    out["max_drift"] = {{"q_mass", worst[0]}, {"E", worst[1]}, {"Lz", worst[2]}, {"K", worst[3]}};
    out["max_constraint_resid"] = cworst;
    out["events"] = json::array();
    for (const auto& ev : rec.events)
        out["events"].push_back({{"param", ev.param},
                                 {"kind", to_string(ev.kind)},
                                 {"r", ev.r},
                                 {"theta", ev.theta}});
    write_json(out_path(o, prefix, "trace_summary.json"), out);
    return 0;
}

int cmd_verify(const Options& o, const std::string& prefix) {
    VerifyOptions vo;
    vo.seed = o.seed;
    if (o.quick) {
        vo.n_frame = 1000;
        vo.n_carter = 1000;
        vo.n_special = 1000;
        vo.n_roots = 1000;
        vo.n_theta = 200;
        vo.n_potential = 300;
        vo.n_admissibility = 300;
    }
    const VerifyReport rep = run_verification(vo);
    json out = json_envelope(resolved_config(o, "verify"));
    out["quick"] = o.quick;
    json suites = json::array();
    long total_checks = 0, total_failures = 0;
    for (const auto& s : rep.suites) {
        total_checks += s.checks;
        total_failures += s.failures;
        suites.push_back({{"name", s.name},
                          {"checks", s.checks},
                          {"failures", s.failures},
                          {"max_err", s.max_err},
                          {"diagnostics", s.diagnostics}});
        std::cout << s.name << ": " << (s.checks - s.failures) << "/" << s.checks
                  << " checks passed, max_err=" << format_double(s.max_err) << "\n";
        for (const auto& d : s.diagnostics) std::cout << "  - " << d << "\n";
    }
    out["suites"] = suites;
    out["total_checks"] = total_checks;
    out["total_failures"] = total_failures;
    write_json(out_path(o, prefix, "verify.json"), out);
    std::cout << (rep.all_passed() ? "VERIFY PASS" : "VERIFY FAIL") << " (" << total_failures
              << " failures / " << total_checks << " checks)\n";
    return rep.all_passed() ? 0 : 4;
}

int run_command(const std::string& name, const Options& o, const std::string& prefix) {
    if (name == "roots") return cmd_roots(o, prefix);
    if (name == "blocks") return cmd_blocks(o, prefix);
    if (name == "theta-horizons") return cmd_theta_horizons(o, prefix);
    if (name == "signature-map") return cmd_signature_map(o, prefix);
    if (name == "potential") return cmd_potential(o, prefix);
    if (name == "classify") return cmd_classify(o, prefix);
    if (name == "lazy-table") return cmd_lazy_table(o, prefix);
    if (name == "trace") return cmd_trace(o, prefix);
    throw std::invalid_argument("unknown subcommand for sweep: " + name);
}

struct VaryAxis {
    std::string key;
    double lo = 0.0, hi = 0.0;
    int count = 1;
};

VaryAxis parse_vary(const std::string& spec) {
    // name=lo:hi:count
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--vary needs name=lo:hi:count");
    VaryAxis ax;
    ax.key = spec.substr(0, eq);
    const std::string rest = spec.substr(eq + 1);
    const auto c1 = rest.find(':');
    const auto c2 = rest.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("--vary needs name=lo:hi:count");
    ax.lo = std::stod(rest.substr(0, c1));
    ax.hi = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    ax.count = std::stoi(rest.substr(c2 + 1));
    if (ax.count < 1) throw std::invalid_argument("--vary count must be >= 1");
    return ax;
}

void set_field(Options& o, const std::string& key, double v) {
    if (key == "M") o.M = v;
    else if (key == "a") o.a = v;
    else if (key == "e") o.e = v;
    else if (key == "Lambda") o.Lambda = v;
    else if (key == "q_charge") o.q_charge = v;
    else if (key == "q_mass") o.q_mass = v;
    else if (key == "energy") o.energy = v;
    else if (key == "lz") o.lz = v;
    else if (key == "carter_k") { o.carter_k = v; o.have_carter_k = true; }
    else if (key == "carter_q") { o.carter_q = v; o.have_carter_q = true; }
    else if (key == "r0") o.r0 = v;
    else if (key == "theta0") o.theta0 = v;
    else if (key == "vr") o.vr = v;
    else if (key == "vtheta") o.vtheta = v;
    else if (key == "vphi") o.vphi = v;
    else if (key == "vt") o.vt = v;
    else if (key == "span") o.span = v;
    else throw std::invalid_argument("--vary does not support key " + key);
}

int cmd_sweep(const Options& base) {
    if (base.sub.empty()) throw std::invalid_argument("sweep requires --sub <command>");
    if (base.vary.empty()) throw std::invalid_argument("sweep requires at least one --vary");
    std::vector<VaryAxis> axes;
    for (const auto& v : base.vary) axes.push_back(parse_vary(v));

    long total = 1;
    for (const auto& ax : axes) total *= ax.count;
    if (total > 100000) throw std::invalid_argument("sweep lattice too large");

    std::filesystem::create_directories(base.out_dir);
    std::vector<json> index_entries(static_cast<std::size_t>(total));
    std::vector<int> codes(static_cast<std::size_t>(total), 0);
    std::atomic<long> next{0};
    const int jobs = std::max(1, base.jobs);

    auto worker = [&]() {
        for (;;) {
            const long idx = next.fetch_add(1);
            if (idx >= total) return;
            Options o = base;
            long rem = idx;
            json varied;
            for (const auto& ax : axes) {
                const int step = static_cast<int>(rem % ax.count);
                rem /= ax.count;
                const double v =
                    ax.count == 1 ? ax.lo : ax.lo + (ax.hi - ax.lo) * step / (ax.count - 1);
                set_field(o, ax.key, v);
                varied[ax.key] = v;
            }
            char prefix[32];
            std::snprintf(prefix, sizeof(prefix), "point_%05ld_", idx);
            int code = 0;
            std::string error;
            try {
                code = run_command(base.sub, o, prefix);
            } catch (const std::exception& ex) {
                code = 3;
                error = ex.what();
            }
            json entry;
            entry["point"] = idx;
            entry["prefix"] = prefix;
            entry["varied"] = varied;
            entry["exit_code"] = code;
            if (!error.empty()) entry["error"] = error;
            index_entries[static_cast<std::size_t>(idx)] = std::move(entry);
            codes[static_cast<std::size_t>(idx)] = code;
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    json index = json_envelope(resolved_config(base, "sweep"));
    index["sub"] = base.sub;
    index["vary"] = base.vary;
    index["points"] = index_entries;
    write_json((std::filesystem::path(base.out_dir) / "index.json").string(), index);

    for (int c : codes)
        if (c != 0) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kerr-Newman-(anti-)de Sitter instanton geodesics toolkit"};
    app.require_subcommand(1);

    Options o;
    // The config file provides defaults; command-line flags override it, so
    // it is located and applied before the parse.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            o.config_path = argv[i + 1];
            break;
        }
    }
    try {
        apply_config_file(o);
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    }
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "JSON config file");
        cmd->add_option("--out", o.out_dir, "output directory");
        cmd->add_option("--format", o.format, "json|csv");
        cmd->add_option("--seed", o.seed, "random seed recorded in outputs");
        cmd->add_option("-M,--mass", o.M, "mass");
        cmd->add_option("-a,--spin", o.a, "angular momentum per unit mass");
        cmd->add_option("-e,--charge", o.e, "charge per unit mass");
        cmd->add_option("--Lambda", o.Lambda, "cosmological constant");
        cmd->add_option("--q-charge", o.q_charge, "test-particle charge coupling");
    };
    auto add_constants = [&](CLI::App* cmd) {
        cmd->add_option("--q-mass", o.q_mass, "rest-mass invariant 2H");
        cmd->add_option("--energy", o.energy, "energy E = -p_t");
        cmd->add_option("--lz", o.lz, "angular momentum Lz = p_phi");
        cmd->add_option("--carter-k", o.carter_k, "Carter constant K")
            ->each([&](const std::string&) { o.have_carter_k = true; });
        cmd->add_option("--carter-q", o.carter_q, "shifted Carter constant Q")
            ->each([&](const std::string&) { o.have_carter_q = true; });
    };
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--r-min", o.r_min);
        cmd->add_option("--r-max", o.r_max);
        cmd->add_option("--r-count", o.r_count);
        cmd->add_option("--theta-min", o.theta_min);
        cmd->add_option("--theta-max", o.theta_max);
        cmd->add_option("--theta-count", o.theta_count);
    };

    auto* roots = app.add_subcommand("roots", "Delta_r roots and discriminants");
    add_common(roots);
    auto* blocks = app.add_subcommand("blocks", "radial block chart");
    add_common(blocks);
    auto* thor = app.add_subcommand("theta-horizons", "theta-horizon angles and a_crit");
    add_common(thor);
    auto* sig = app.add_subcommand("signature-map", "metric eigenvalue grid");
    add_common(sig);
    add_grid(sig);
    auto* pot = app.add_subcommand("potential", "colatitude potential profile");
    add_common(pot);
    add_constants(pot);
    auto* cls = app.add_subcommand("classify", "colatitude orbit classification");
    add_common(cls);
    add_constants(cls);
    auto* lazy = app.add_subcommand("lazy-table", "lazy-particle sign grid");
    add_common(lazy);
    auto* trace = app.add_subcommand("trace", "integrate a geodesic");
    add_common(trace);
    trace->add_option("--r0", o.r0);
    trace->add_option("--theta0", o.theta0);
    trace->add_option("--phi0", o.phi0);
    trace->add_option("--t0", o.t0);
    trace->add_option("--vr", o.vr);
    trace->add_option("--vtheta", o.vtheta);
    trace->add_option("--vphi", o.vphi);
    trace->add_option("--vt", o.vt);
    trace->add_option("--mode", o.mode, "mino|hamiltonian");
    trace->add_option("--span", o.span, "affine-parameter span");
    trace->add_option("--rel-tol", o.rel_tol);
    trace->add_option("--abs-tol", o.abs_tol);
    trace->add_option("--max-steps", o.max_steps);
    auto* sweep = app.add_subcommand("sweep", "map a subcommand over a parameter lattice");
    add_common(sweep);
    add_constants(sweep);
    add_grid(sweep);
    sweep->add_option("--sub", o.sub, "subcommand to run per lattice point")->required();
    sweep->add_option("--vary", o.vary, "axis spec name=lo:hi:count (repeatable)")->required();
    sweep->add_option("--jobs", o.jobs, "worker pool size");
    sweep->add_option("--r0", o.r0);
    sweep->add_option("--theta0", o.theta0);
    sweep->add_option("--vr", o.vr);
    sweep->add_option("--vtheta", o.vtheta);
    sweep->add_option("--vphi", o.vphi);
    sweep->add_option("--vt", o.vt);
    sweep->add_option("--mode", o.mode);
    sweep->add_option("--span", o.span);
    auto* verify = app.add_subcommand("verify", "run the verification suites");
    add_common(verify);
    verify->add_flag("--quick", o.quick, "reduced draw counts");

    CLI11_PARSE(app, argc, argv);

    try {
        validate(o);
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    }

    try {
        if (roots->parsed()) return cmd_roots(o, "");
        if (blocks->parsed()) return cmd_blocks(o, "");
        if (thor->parsed()) return cmd_theta_horizons(o, "");
        if (sig->parsed()) return cmd_signature_map(o, "");
        if (pot->parsed()) return cmd_potential(o, "");
        if (cls->parsed()) return cmd_classify(o, "");
        if (lazy->parsed()) return cmd_lazy_table(o, "");
        if (trace->parsed()) return cmd_trace(o, "");
        if (sweep->parsed()) return cmd_sweep(o);
        if (verify->parsed()) return cmd_verify(o, "");
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "numeric failure: " << ex.what() << "\n";
        return 3;
    }
    return 2;
}
