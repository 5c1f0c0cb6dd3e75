// Command-line frontend for the disk-equation toolkit.
//
// Commands
//   validate            check a config and its structure without solving
//   operators-selftest  closed-form identities of the integral operators
//   solve-disk          one corrected disk map through a chosen seed
//   metric              extremal-disk upper estimates over a base list
//   completeness        doubly-logarithmic radial lengths toward a puncture
//   schwarz-scan        randomized jet-bound scan at a structure
//   gauge-scan          lifted-derivative sweep through disk or annulus gauges
//   linking             boundary linking versus interior intersection indices
//
// Every run writes records.jsonl (one JSON object per line), summary.json and
// table.csv into --out.  Outputs carry no timestamps or machine identifiers:
// a rerun with the same inputs produces byte-identical files.
//
// Exit codes: 0 success, 2 schema/usage error, 3 out-of-regime, 4 numerical.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jholo/almost_complex.hpp"
#include "jholo/beltrami_solver.hpp"
#include "jholo/hyperbolic_geometry.hpp"
#include "jholo/integral_ops.hpp"
#include "jholo/linking.hpp"
#include "jholo/schwarz_probe.hpp"
#include "jholo/version.hpp"

namespace {

using jholo::AlmostComplexStructure;
using jholo::C2;
using jholo::cplx;
using ordered = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// options and small formatting helpers
// ---------------------------------------------------------------------------

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0x5EEDULL;
    int resolution = 16;
    double epsilon = 0.0;
    bool epsilon_set = false;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
    return buf;
}

ordered complex_json(cplx z) { return ordered::array({z.real(), z.imag()}); }

ordered c2_json(const C2& p) {
    return ordered::array({complex_json(p.z1), complex_json(p.z2)});
}

// ---------------------------------------------------------------------------
// config loading
// ---------------------------------------------------------------------------

nlohmann::json load_config(const CommonOptions& opt) {
    if (opt.config_path.empty()) return nlohmann::json::object();
    std::ifstream in(opt.config_path);
    if (!in) throw jholo::SchemaError("cannot open config file '" + opt.config_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw jholo::SchemaError("config file '" + opt.config_path +
                                 "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw jholo::SchemaError("config root must be a JSON object");
    return j;
}

const nlohmann::json& section(const nlohmann::json& config, const char* name) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!config.contains(name)) return empty;
    if (!config.at(name).is_object())
        throw jholo::SchemaError(std::string("config section '") + name + "' must be an object");
    return config.at(name);
}

double num_or(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw jholo::SchemaError(std::string("config key '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int int_or(const nlohmann::json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw jholo::SchemaError(std::string("config key '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

cplx complex_or(const nlohmann::json& j, const char* key, cplx fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw jholo::SchemaError(std::string("config key '") + key +
                                 "' must be a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

AlmostComplexStructure resolve_structure(const nlohmann::json& config,
                                         const CommonOptions& opt) {
    AlmostComplexStructure s;
    if (!config.contains("structure")) {
        s = jholo::standard_structure();
    } else if (config.at("structure").is_string()) {
        const std::string name = config.at("structure").get<std::string>();
        if (name == "standard")
            s = jholo::standard_structure();
        else if (name == "perturbed")
            s = jholo::reference_perturbation().with_epsilon(0.1);
        else
            s = jholo::load_structure(name);
    } else if (config.at("structure").is_object()) {
        s = jholo::parse_structure(config.at("structure"));
    } else {
        throw jholo::SchemaError("'structure' must be a name, a file path, or an inline object");
    }
    if (config.contains("epsilon")) {
        if (!config.at("epsilon").is_number())
            throw jholo::SchemaError("config key 'epsilon' must be a number");
        s = s.with_epsilon(config.at("epsilon").get<double>());
    }
    if (opt.epsilon_set) s = s.with_epsilon(opt.epsilon);
    return s;
}

// ---------------------------------------------------------------------------
// output files
// ---------------------------------------------------------------------------

class Emitter {
  public:
    Emitter(const CommonOptions& opt, std::string csv_header)
        : dir_(opt.out_dir), csv_header_(std::move(csv_header)) {
        std::filesystem::create_directories(dir_);
    }

    void add(ordered record, std::string csv_row) {
        records_.push_back(std::move(record));
        csv_rows_.push_back(std::move(csv_row));
    }

    std::size_t count() const { return records_.size(); }

    void finish(const ordered& summary) const {
        {
            std::ofstream out(dir_ / "records.jsonl");
            for (const ordered& r : records_) out << r.dump() << "\n";
        }
        {
            std::ofstream out(dir_ / "table.csv");
            out << csv_header_ << "\n";
            for (const std::string& row : csv_rows_) out << row << "\n";
        }
        std::ofstream out(dir_ / "summary.json");
        out << summary.dump(2) << "\n";
    }

    void finish_summary_only(const ordered& summary) const {
        std::ofstream out(dir_ / "summary.json");
        out << summary.dump(2) << "\n";
    }

  private:
    std::filesystem::path dir_;
    std::string csv_header_;
    std::vector<ordered> records_;
    std::vector<std::string> csv_rows_;
};

/// Shared fields carried by every record and summary.
ordered envelope(const char* kind, const AlmostComplexStructure& s, int resolution,
                 double mu_bound) {
    ordered j;
    j["record"] = kind;
    j["tool_version"] = jholo::kToolVersion;
    j["resolution"] = resolution;
    j["epsilon"] = s.epsilon;
    j["mu_bound"] = mu_bound;
    return j;
}

ordered summary_head(const char* command, const AlmostComplexStructure& s,
                     const CommonOptions& opt, double mu_bound) {
    ordered j;
    j["command"] = command;
    j["tool_version"] = jholo::kToolVersion;
    j["structure"] = s.description;
    j["resolution"] = opt.resolution;
    j["epsilon"] = s.epsilon;
    j["mu_bound"] = mu_bound;
    return j;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int run_validate(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    Emitter emit(opt, "");
    ordered summary = summary_head("validate", s, opt, mu);
    summary["terms_a"] = s.a.terms.size();
    summary["terms_b"] = s.b.terms.size();
    summary["status"] = mu <= 0.1 ? "ok" : "coefficient bound above the solver regime";
    emit.finish_summary_only(summary);
    std::printf("validate: %s, mu_bound %s\n", s.description.c_str(), fmt(mu).c_str());
    return 0;
}

int run_operators_selftest(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const jholo::DiskGrid grid = jholo::build_grid(opt.resolution);

    struct Identity {
        const char* name;
        std::function<cplx(cplx)> input;
        std::function<cplx(cplx)> expected;
        bool smoothing;  // cauchy_green if true, else calderon_zygmund
        double tolerance;
    };
    const double machine = 1e-12;
    const double smooth = 0.25 / opt.resolution;
    const std::vector<Identity> identities = {
        {"cg_constant", [](cplx) { return cplx{1.0, 0.0}; },
         [](cplx z) { return std::conj(z); }, true, machine},
        {"cg_linear", [](cplx z) { return z; },
         [](cplx z) { return std::conj(z) * z - 1.0; }, true, smooth},
        {"cg_conjugate", [](cplx z) { return std::conj(z); },
         [](cplx z) { return 0.5 * std::conj(z) * std::conj(z); }, true, smooth},
        {"cz_constant", [](cplx) { return cplx{1.0, 0.0}; },
         [](cplx) { return cplx{0.0, 0.0}; }, false, machine},
        {"cz_linear", [](cplx z) { return z; },
         [](cplx z) { return std::conj(z); }, false, smooth},
        {"cz_square", [](cplx z) { return z * z; },
         [](cplx z) { return 2.0 * std::conj(z) * z - 1.0; }, false, smooth},
    };

    Emitter emit(opt, "name,sup_error,tolerance,pass");
    bool all_pass = true;
    double worst = 0.0;
    for (const Identity& id : identities) {
        const jholo::GridFunction in = jholo::sample(id.input, grid);
        const jholo::GridFunction got =
            id.smoothing ? jholo::cauchy_green(in) : jholo::calderon_zygmund(in);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            err = std::max(err, std::abs(got[i] - id.expected(grid.nodes[i])));
        const bool pass = err <= id.tolerance;
        all_pass = all_pass && pass;
        worst = std::max(worst, err);
        ordered rec = envelope("operator_identity", s, opt.resolution, mu);
        rec["name"] = id.name;
        rec["sup_error"] = err;
        rec["tolerance"] = id.tolerance;
        rec["pass"] = pass;
        emit.add(std::move(rec), std::string(id.name) + "," + fmt(err) + "," +
                                     fmt(id.tolerance) + "," + (pass ? "1" : "0"));
    }
    ordered summary = summary_head("operators-selftest", s, opt, mu);
    summary["identities"] = identities.size();
    summary["max_error"] = worst;
    summary["status"] = all_pass ? "ok" : "failed";
    emit.finish(summary);
    std::printf("operators-selftest: %zu identities, max error %s, %s\n", identities.size(),
                fmt(worst).c_str(), all_pass ? "pass" : "FAIL");
    if (!all_pass) throw jholo::NumericalError("operator selftest failed");
    return 0;
}

int run_solve_disk(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "solve");

    jholo::SolveConfig cfg;
    cfg.max_iterations = int_or(sec, "max_iterations", cfg.max_iterations);
    cfg.tolerance = num_or(sec, "tolerance", cfg.tolerance);

    const jholo::DiskGrid grid = jholo::build_grid(opt.resolution);
    jholo::Seed seed;
    const std::string kind = sec.contains("seed") ? sec.at("seed").get<std::string>() : "mobius";
    if (kind == "identity") {
        seed = jholo::identity_seed(grid);
    } else if (kind == "mobius") {
        const cplx base = complex_or(sec, "base", cplx{0.3, 0.0});
        cplx phase = complex_or(sec, "phase", cplx{1.0, 0.0});
        const double rho = num_or(sec, "rho", 0.5);
        if (std::abs(phase) == 0.0) throw jholo::SchemaError("'phase' must be nonzero");
        phase /= std::abs(phase);
        seed = jholo::detail::mobius_seed(base, phase, rho, grid);
    } else {
        throw jholo::SchemaError("'seed' must be \"identity\" or \"mobius\"");
    }
    const cplx parameter = complex_or(sec, "parameter", cplx{0.0, 0.0});

    const jholo::DiskMap m =
        jholo::solve_disk(seed, jholo::structure_field_a(s), parameter, cfg);

    Emitter emit(opt,
                 "converged,iterations,residual,contraction_factor,containment_margin,"
                 "origin_value_re,origin_value_im,origin_deriv_re,origin_deriv_im");
    ordered rec = envelope("disk_solve", s, opt.resolution, mu);
    rec["converged"] = m.converged;
    rec["iterations"] = m.iterations;
    rec["residual"] = m.residual;
    rec["contraction_factor"] = m.contraction_factor;
    rec["containment_margin"] = m.containment_margin;
    rec["origin_value"] = complex_json(m.origin_value());
    rec["origin_deriv"] = complex_json(m.origin_deriv());
    rec["solve_mu_bound"] = m.mu_bound;
    emit.add(std::move(rec),
             std::string(m.converged ? "1" : "0") + "," + std::to_string(m.iterations) + "," +
                 fmt(m.residual) + "," + fmt(m.contraction_factor) + "," +
                 fmt(m.containment_margin) + "," + fmt(m.origin_value().real()) + "," +
                 fmt(m.origin_value().imag()) + "," + fmt(m.origin_deriv().real()) + "," +
                 fmt(m.origin_deriv().imag()));

    ordered summary = summary_head("solve-disk", s, opt, mu);
    summary["converged"] = m.converged;
    summary["iterations"] = m.iterations;
    summary["residual"] = m.residual;
    summary["containment_margin"] = m.containment_margin;
    emit.finish(summary);
    std::printf("solve-disk: converged=%d iterations=%d residual=%s margin=%s\n",
                m.converged ? 1 : 0, m.iterations, fmt(m.residual).c_str(),
                fmt(m.containment_margin).c_str());
    return 0;
}

int run_metric(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "metric");

    jholo::RoydenOptions ropt;
    ropt.resolution = opt.resolution;
    ropt.rho_max = num_or(sec, "rho_max", ropt.rho_max);
    ropt.margin = num_or(sec, "margin", ropt.margin);
    ropt.bisections = int_or(sec, "bisections", ropt.bisections);

    std::vector<cplx> bases = {cplx{0.0, 0.0}, cplx{0.3, 0.0}, cplx{0.5, 0.0}, cplx{0.7, 0.0}};
    if (sec.contains("bases")) {
        if (!sec.at("bases").is_array()) throw jholo::SchemaError("'bases' must be an array");
        bases.clear();
        for (const auto& b : sec.at("bases")) {
            if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
                throw jholo::SchemaError("each base must be a [re, im] pair");
            bases.push_back({b[0].get<double>(), b[1].get<double>()});
        }
        if (bases.empty()) throw jholo::SchemaError("'bases' must not be empty");
    }
    C2 direction{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    if (sec.contains("direction")) {
        const auto& d = sec.at("direction");
        if (!d.is_array() || d.size() != 2)
            throw jholo::SchemaError("'direction' must hold two [re, im] pairs");
        direction.z1 = cplx{d[0].at(0).get<double>(), d[0].at(1).get<double>()};
        direction.z2 = cplx{d[1].at(0).get<double>(), d[1].at(1).get<double>()};
    }

    Emitter emit(opt, "base_re,base_im,upper,reference_standard,ratio,feasible_radius,solves");
    double worst_drift = 0.0;
    for (const cplx a : bases) {
        const C2 base{a, cplx{0.0, 0.0}};
        const jholo::MetricSample ms = jholo::royden_estimate(s, base, direction, ropt);
        const double ref = std::max(std::abs(direction.z1) / (1.0 - std::norm(base.z1)),
                                    std::abs(direction.z2) / (1.0 - std::norm(base.z2)));
        ordered rec = envelope("metric_sample", s, opt.resolution, mu);
        rec["base"] = c2_json(base);
        rec["direction"] = c2_json(direction);
        rec["feasible"] = ms.feasible;
        rec["upper"] = ms.feasible ? ordered(ms.upper) : ordered(nullptr);
        rec["feasible_radius"] = ms.feasible_radius;
        rec["solves"] = ms.solves;
        rec["reference_standard"] = ref;
        const double ratio = ms.feasible && ref > 0.0 ? ms.upper / ref : 0.0;
        rec["ratio"] = ms.feasible && ref > 0.0 ? ordered(ratio) : ordered(nullptr);
        if (ms.feasible && ref > 0.0) worst_drift = std::max(worst_drift, std::abs(ratio - 1.0));
        emit.add(std::move(rec), fmt(a.real()) + "," + fmt(a.imag()) + "," +
                                     (ms.feasible ? fmt(ms.upper) : "nan") + "," + fmt(ref) +
                                     "," + (ms.feasible && ref > 0.0 ? fmt(ratio) : "nan") + "," +
                                     fmt(ms.feasible_radius) + "," + std::to_string(ms.solves));
    }
    ordered summary = summary_head("metric", s, opt, mu);
    summary["bases"] = bases.size();
    summary["max_ratio_drift"] = worst_drift;
    emit.finish(summary);
    std::printf("metric: %zu bases, max ratio drift %s\n", bases.size(),
                fmt(worst_drift).c_str());
    return 0;
}

int run_completeness(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "completeness");

    std::vector<double> deltas = {1e-3, 1e-6, 1e-9};
    if (sec.contains("deltas")) {
        if (!sec.at("deltas").is_array()) throw jholo::SchemaError("'deltas' must be an array");
        deltas.clear();
        for (const auto& d : sec.at("deltas")) {
            if (!d.is_number()) throw jholo::SchemaError("each delta must be a number");
            deltas.push_back(d.get<double>());
        }
        if (deltas.empty()) throw jholo::SchemaError("'deltas' must not be empty");
    }

    Emitter emit(opt, "delta,length,predicted,ratio");
    double k1 = 0.0;
    ordered calibration_json;
    if (sec.contains("k1") && sec.at("k1").is_number()) {
        k1 = sec.at("k1").get<double>();
        if (!(k1 > 0.0)) throw jholo::SchemaError("'k1' must be positive");
    } else {
        jholo::RoydenOptions ropt;
        ropt.resolution = opt.resolution;
        const jholo::Calibration cal = jholo::calibrate_constants(s, ropt);
        k1 = cal.k1_punctured;
        ordered rec = envelope("calibration", s, opt.resolution, mu);
        rec["c1_bidisk"] = cal.c1_bidisk;
        rec["k1_punctured"] = cal.k1_punctured;
        rec["dataset_hash"] = hex64(cal.dataset_hash);
        rec["samples"] = cal.samples;
        calibration_json = rec;
        emit.add(std::move(rec), "calibration," + fmt(cal.k1_punctured) + "," +
                                     fmt(cal.c1_bidisk) + ",0");
    }

    bool monotone = true;
    double prev_length = 0.0;
    std::vector<double> sorted = deltas;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    for (const double d : sorted) {
        const jholo::CompletenessReport rep = jholo::completeness_probe(k1, d);
        if (rep.length <= prev_length) monotone = false;
        prev_length = rep.length;
        ordered rec = envelope("completeness", s, opt.resolution, mu);
        rec["delta"] = rep.delta;
        rec["length"] = rep.length;
        rec["predicted"] = rep.predicted;
        rec["ratio"] = rep.ratio;
        emit.add(std::move(rec), fmt(rep.delta) + "," + fmt(rep.length) + "," +
                                     fmt(rep.predicted) + "," + fmt(rep.ratio));
    }
    ordered summary = summary_head("completeness", s, opt, mu);
    summary["k1"] = k1;
    if (!calibration_json.is_null()) summary["calibration"] = calibration_json;
    summary["deltas"] = sorted.size();
    summary["monotone"] = monotone;
    emit.finish(summary);
    std::printf("completeness: k1=%s over %zu deltas, monotone=%d\n", fmt(k1).c_str(),
                sorted.size(), monotone ? 1 : 0);
    return 0;
}

int run_schwarz_scan(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "scan");

    jholo::ScanOptions sopt;
    sopt.resolution = opt.resolution;
    sopt.rho_max = num_or(sec, "rho_max", sopt.rho_max);
    const int samples = int_or(sec, "samples", 60);

    const jholo::ScanResult res = jholo::gromov_scan(s, samples, opt.seed, sopt);

    Emitter emit(opt, "index,magnitude,quantity,margin,feasible,extremal");
    for (const jholo::ScanSample& sm : res.samples) {
        ordered rec = envelope("scan_sample", s, opt.resolution, mu);
        rec["index"] = sm.index;
        rec["base"] = c2_json(sm.base);
        rec["direction"] = c2_json(sm.direction);
        rec["magnitude"] = sm.magnitude;
        rec["quantity"] = sm.quantity;
        rec["margin"] = sm.margin;
        rec["feasible"] = sm.feasible;
        rec["extremal_probe"] = sm.extremal_probe;
        emit.add(std::move(rec),
                 std::to_string(sm.index) + "," + fmt(sm.magnitude) + "," + fmt(sm.quantity) +
                     "," + fmt(sm.margin) + "," + (sm.feasible ? "1" : "0") + "," +
                     (sm.extremal_probe ? "1" : "0"));
    }
    ordered summary = summary_head("schwarz-scan", s, opt, mu);
    summary["seed"] = hex64(res.seed);
    summary["samples"] = res.samples.size();
    summary["n_feasible"] = res.n_feasible;
    summary["sup_quantity"] = res.sup_quantity;
    emit.finish(summary);
    std::printf("schwarz-scan: %zu samples, %d feasible, sup quantity %s\n", res.samples.size(),
                res.n_feasible, fmt(res.sup_quantity).c_str());
    return 0;
}

int run_gauge_scan(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "gauge");

    jholo::GaugeOptions gopt;
    gopt.resolution = opt.resolution;
    const int samples = int_or(sec, "samples", 30);
    jholo::CoverKind cover = jholo::CoverKind::identity;
    if (sec.contains("cover")) {
        const std::string name = sec.at("cover").get<std::string>();
        if (name == "identity")
            cover = jholo::CoverKind::identity;
        else if (name == "punctured")
            cover = jholo::CoverKind::punctured;
        else
            throw jholo::SchemaError("'cover' must be \"identity\" or \"punctured\"");
    }

    const jholo::GaugeScanResult res = jholo::gauge_scan(s, cover, samples, opt.seed, gopt);

    Emitter emit(opt, "index,gauge_re,gauge_im,normalized,margin,feasible");
    for (const jholo::GaugeSample& sm : res.samples) {
        ordered rec = envelope("gauge_sample", s, opt.resolution, mu);
        rec["index"] = sm.index;
        rec["gauge"] = complex_json(sm.gauge);
        rec["companion"] = complex_json(sm.companion);
        rec["du0"] = complex_json(sm.du0);
        rec["dbar_u0"] = complex_json(sm.dbar_u0);
        rec["dw0"] = complex_json(sm.dw0);
        rec["normalized"] = sm.normalized;
        rec["margin"] = sm.margin;
        rec["feasible"] = sm.feasible;
        emit.add(std::move(rec),
                 std::to_string(sm.index) + "," + fmt(sm.gauge.real()) + "," +
                     fmt(sm.gauge.imag()) + "," + fmt(sm.normalized) + "," + fmt(sm.margin) +
                     "," + (sm.feasible ? "1" : "0"));
    }
    ordered summary = summary_head("gauge-scan", s, opt, mu);
    summary["seed"] = hex64(res.seed);
    summary["cover"] = cover == jholo::CoverKind::identity ? "identity" : "punctured";
    summary["samples"] = res.samples.size();
    summary["n_feasible"] = res.n_feasible;
    summary["schwarz_constant"] = res.schwarz_constant;
    emit.finish(summary);
    std::printf("gauge-scan: cover=%s, %zu samples, %d feasible, constant %s\n",
                cover == jholo::CoverKind::identity ? "identity" : "punctured",
                res.samples.size(), res.n_feasible, fmt(res.schwarz_constant).c_str());
    return 0;
}

jholo::AnalyticDisk disk_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains("u") || !j.contains("v"))
        throw jholo::SchemaError(std::string("pair component '") + name +
                                 "' needs 'u' and 'v' coefficient lists");
    auto coeffs = [&](const char* comp) {
        std::vector<cplx> out;
        for (const auto& c : j.at(comp)) {
            if (!c.is_array() || c.size() != 2)
                throw jholo::SchemaError("polynomial coefficients must be [re, im] pairs");
            out.push_back({c[0].get<double>(), c[1].get<double>()});
        }
        return out;
    };
    return jholo::polynomial_disk(coeffs("u"), coeffs("v"));
}

int run_linking(const nlohmann::json& config, const CommonOptions& opt) {
    const AlmostComplexStructure s = resolve_structure(config, opt);
    const double mu = jholo::coefficient_bound(s);
    const nlohmann::json& sec = section(config, "linking");

    const double radius = num_or(sec, "radius", 0.25);
    const cplx zero{0.0, 0.0}, one{1.0, 0.0};
    jholo::AnalyticDisk f = jholo::polynomial_disk({zero, one}, {zero});
    jholo::AnalyticDisk g = jholo::polynomial_disk({zero}, {zero, one});
    std::string pair_name = "hopf";
    if (sec.contains("pair")) {
        if (sec.at("pair").is_string()) {
            pair_name = sec.at("pair").get<std::string>();
            if (pair_name == "hopf") {
                // defaults above
            } else if (pair_name == "tangent-2") {
                g = jholo::polynomial_disk({zero, one}, {zero, zero, one});
            } else if (pair_name == "tangent-3") {
                g = jholo::polynomial_disk({zero, one}, {zero, zero, zero, one});
            } else {
                throw jholo::SchemaError(
                    "'pair' must be \"hopf\", \"tangent-2\", \"tangent-3\", or an object");
            }
        } else if (sec.at("pair").is_object()) {
            pair_name = "custom";
            f = disk_from_json(sec.at("pair").at("f"), "f");
            g = disk_from_json(sec.at("pair").at("g"), "g");
        } else {
            throw jholo::SchemaError("'pair' must be a preset name or an object");
        }
    }

    const jholo::LinkingReport rep = jholo::linking_report(f, g, radius);

    Emitter emit(opt, "z_re,z_im,w_re,w_im,delta,mult_f,mult_g,gap");
    for (const jholo::IntersectionPoint& p : rep.intersections) {
        ordered rec = envelope("intersection", s, opt.resolution, mu);
        rec["z"] = complex_json(p.z);
        rec["w"] = complex_json(p.w);
        rec["delta"] = p.delta;
        rec["mult_f"] = p.mult_f;
        rec["mult_g"] = p.mult_g;
        rec["gap"] = p.gap;
        emit.add(std::move(rec), fmt(p.z.real()) + "," + fmt(p.z.imag()) + "," +
                                     fmt(p.w.real()) + "," + fmt(p.w.imag()) + "," +
                                     std::to_string(p.delta) + "," + std::to_string(p.mult_f) +
                                     "," + std::to_string(p.mult_g) + "," + fmt(p.gap));
    }
    ordered summary = summary_head("linking", s, opt, mu);
    summary["pair"] = pair_name;
    summary["radius"] = radius;
    summary["linking"] = rep.linking;
    summary["delta_sum"] = rep.delta_sum;
    summary["match"] = rep.match;
    summary["intersections"] = rep.intersections.size();
    summary["slice_f_points"] = rep.slice_f.parameter.size();
    summary["slice_g_points"] = rep.slice_g.parameter.size();
    summary["min_contact_angle_f"] = rep.slice_f.min_contact_angle_deg;
    summary["min_contact_angle_g"] = rep.slice_g.min_contact_angle_deg;
    emit.finish(summary);
    std::printf("linking: pair=%s radius=%s linking=%d delta_sum=%d match=%d\n",
                pair_name.c_str(), fmt(radius).c_str(), rep.linking, rep.delta_sum,
                rep.match ? 1 : 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"disk-equation toolkit: corrected holomorphic disks, metric estimates, "
                 "and intersection invariants"};
    app.require_subcommand(1);

    CommonOptions opt;
    int (*runner)(const nlohmann::json&, const CommonOptions&) = nullptr;
    const std::vector<std::pair<const char*,
                                int (*)(const nlohmann::json&, const CommonOptions&)>>
        commands = {
            {"validate", &run_validate},
            {"operators-selftest", &run_operators_selftest},
            {"solve-disk", &run_solve_disk},
            {"metric", &run_metric},
            {"completeness", &run_completeness},
            {"schwarz-scan", &run_schwarz_scan},
            {"gauge-scan", &run_gauge_scan},
            {"linking", &run_linking},
        };
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--out", opt.out_dir, "output directory (default: out)");
        sub->add_option("--seed", opt.seed, "sample-stream seed");
        sub->add_option("--resolution", opt.resolution, "radial grid resolution");
        sub->add_option("--epsilon", opt.epsilon, "override the structure's epsilon")
            ->each([&opt](const std::string&) { opt.epsilon_set = true; });
        sub->callback([fn, &runner]() { runner = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const nlohmann::json config = load_config(opt);
        return runner(config, opt);
    } catch (const jholo::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const jholo::OutOfRegimeError& e) {
        std::fprintf(stderr, "out of regime: %s\n", e.what());
        return 3;
    } catch (const jholo::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
