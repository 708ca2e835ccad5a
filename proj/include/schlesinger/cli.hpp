#pragma once

// Command-line engine behind the schlesinger tool. Three commands share one
// configuration schema: verify runs the invariant suite for the configured
// mode and exits 0 only if every check passes, step applies one
// transformation and reports both charts, orbit writes a trace. Exit codes:
// 0 pass, 1 check failure, 2 usage or config parse failure, 3 indeterminacy.
// Identical configuration and seed produce byte-identical output.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "schlesinger/a2star.hpp"
#include "schlesinger/divisor.hpp"
#include "schlesinger/dpv.hpp"
#include "schlesinger/errors.hpp"
#include "schlesinger/fuchsian.hpp"
#include "schlesinger/lattice.hpp"
#include "schlesinger/serialize.hpp"
#include "schlesinger/transform.hpp"

namespace schlesinger {

namespace cli_detail {

using Json = nlohmann::json;

enum class Command { verify, step, orbit };

struct RunConfig {
    std::string mode = "raw-system";
    int steps = 0;
    std::uint64_t seed = 17;
    double tolerance = 1e-9;
    std::string format;  // resolved per mode when empty
    std::string out_path;

    std::optional<FuchsianSystem> system;
    std::vector<TransformationIndex> schedule;

    bool has_dpv = false;
    DPVParameters dpv_params{};
    DPVState dpv_state{};

    bool has_a2 = false;
    A2Parameters a2_params{};
    A2State a2_state{};
};

inline Complex config_complex(const Json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(what + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Complex block_complex(const Json& block, const char* name,
                             const std::string& what) {
    if (!block.is_object() || !block.contains(name))
        throw ParseError(what + " needs " + name);
    return config_complex(block[name], what + " " + name);
}

inline std::string quoted_text(const std::string& text) {
    std::string out;
    detail::append_quoted(out, text);
    return out;
}

inline std::string complex_text(Complex z) {
    return "(" + format_number(z.real()) + ", " + format_number(z.imag()) + ")";
}

// ---------------------------------------------------------------------------
// Configuration loading. Every failure here is a usage error (exit 2).

inline Json load_document(const std::string& path) {
    std::ifstream stream(path);
    if (!stream) throw ParseError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config root must be a JSON object");
    return doc;
}

inline void load_common_fields(const Json& doc, RunConfig& cfg) {
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string())
            throw ParseError("config mode must be a string");
        cfg.mode = doc["mode"].get<std::string>();
    }
    if (doc.contains("steps")) {
        if (!doc["steps"].is_number_integer() || doc["steps"].get<long long>() < 0)
            throw ParseError("config steps must be a nonnegative integer");
        cfg.steps = static_cast<int>(doc["steps"].get<long long>());
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0)
            throw ParseError("config seed must be a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("tolerance")) {
        if (!doc["tolerance"].is_number() || doc["tolerance"].get<double>() <= 0.0)
            throw ParseError("config tolerance must be a positive number");
        cfg.tolerance = doc["tolerance"].get<double>();
    }
    if (doc.contains("format")) {
        if (!doc["format"].is_string())
            throw ParseError("config format must be \"csv\" or \"json\"");
        cfg.format = doc["format"].get<std::string>();
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string())
            throw ParseError("config out must be a path string");
        cfg.out_path = doc["out"].get<std::string>();
    }
}

inline void load_mode_blocks(const Json& doc, RunConfig& cfg) {
    if (cfg.mode == "raw-system") {
        if (doc.contains("system"))
            cfg.system = system_from_json(doc["system"].dump());
        if (doc.contains("schedule")) {
            if (!doc["schedule"].is_array())
                throw ParseError("schedule must be an array of index quadruples");
            for (const auto& entry : doc["schedule"]) {
                if (!entry.is_array() || entry.size() != 4 ||
                    !entry[0].is_number_integer() || !entry[1].is_number_integer() ||
                    !entry[2].is_number_integer() || !entry[3].is_number_integer())
                    throw ParseError(
                        "schedule entries are [alpha, beta, mu, nu] integer "
                        "quadruples");
                cfg.schedule.push_back(TransformationIndex{
                    entry[0].get<int>(), entry[1].get<int>(), entry[2].get<int>(),
                    entry[3].get<int>()});
            }
        }
        return;
    }
    if (cfg.mode == "dpv") {
        if (!doc.contains("params") && !doc.contains("state")) return;
        if (!doc.contains("params") || !doc.contains("state"))
            throw ParseError("dpv mode needs both params and state");
        const Json& p = doc["params"];
        DPVParameters prm{};
        prm.theta1 = block_complex(p, "theta1", "dpv params");
        prm.thetat = block_complex(p, "thetat", "dpv params");
        prm.kappa1 = block_complex(p, "kappa1", "dpv params");
        prm.kappa2 = block_complex(p, "kappa2", "dpv params");
        prm.t = block_complex(p, "t", "dpv params");
        prm.theta0 = p.contains("theta0")
                         ? config_complex(p["theta0"], "dpv params theta0")
                         : -(prm.theta1 + prm.thetat + prm.kappa1 + prm.kappa2);
        detail::check_dpv_parameters(prm);
        const Json& s = doc["state"];
        cfg.dpv_state.p = block_complex(s, "p", "dpv state");
        cfg.dpv_state.q = block_complex(s, "q", "dpv state");
        cfg.dpv_params = prm;
        cfg.has_dpv = true;
        return;
    }
    if (cfg.mode == "a2star") {
        if (!doc.contains("params") && !doc.contains("state")) return;
        if (!doc.contains("params") || !doc.contains("state"))
            throw ParseError("a2star mode needs both params and state");
        const Json& p = doc["params"];
        A2Parameters prm{};
        prm.theta11 = block_complex(p, "theta11", "a2star params");
        prm.theta12 = block_complex(p, "theta12", "a2star params");
        prm.theta21 = block_complex(p, "theta21", "a2star params");
        prm.theta22 = block_complex(p, "theta22", "a2star params");
        prm.kappa1 = block_complex(p, "kappa1", "a2star params");
        prm.kappa2 = block_complex(p, "kappa2", "a2star params");
        prm.kappa3 = block_complex(p, "kappa3", "a2star params");
        detail::check_a2_parameters(prm);
        const Json& s = doc["state"];
        const Complex x = block_complex(s, "x", "a2star state");
        const Complex y = block_complex(s, "y", "a2star state");
        cfg.a2_state = schlesinger::a2_state(prm, x, y);
        cfg.a2_params = prm;
        cfg.has_a2 = true;
        return;
    }
    // lattice mode has no instance block
}

inline void require_runnable(Command cmd, const RunConfig& cfg) {
    const bool reduced = cfg.mode == "dpv" || cfg.mode == "a2star";
    if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json")
        throw ParseError("format must be \"csv\" or \"json\"");
    if (cfg.format == "csv" && !reduced)
        throw ParseError(cfg.mode + " orbits serialize as json");

    if (cmd == Command::step || cmd == Command::orbit) {
        if (cfg.mode == "lattice" && cmd == Command::step)
            throw ParseError("lattice mode has no step command");
        if (cfg.mode == "raw-system") {
            if (!cfg.system)
                throw ParseError("raw-system " +
                                 std::string(cmd == Command::step ? "step" : "orbit") +
                                 " needs a system block in the config");
            if (cfg.schedule.empty())
                throw ParseError("raw-system runs need a nonempty schedule");
        }
        if (cfg.mode == "dpv" && !cfg.has_dpv)
            throw ParseError("dpv runs need params and state in the config");
        if (cfg.mode == "a2star" && !cfg.has_a2)
            throw ParseError("a2star runs need params and state in the config");
    }
}

// ---------------------------------------------------------------------------
// Seeded instance generation for verify. Draws live in the unit box with
// poles separated by at least 0.3; guard violations regenerate the draw.

class VerifyRng {
public:
    explicit VerifyRng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    Complex box(double scale = 1.0) {
        const double re = uniform(-1.0, 1.0);
        const double im = uniform(-1.0, 1.0);
        return Complex(re * scale, im * scale);
    }

private:
    std::mt19937_64 engine_;
};

inline std::vector<Complex> draw_poles(VerifyRng& rng, int count,
                                       double min_sep = 0.3) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<Complex> poles;
        for (int i = 0; i < count; ++i) poles.push_back(rng.box(1.0));
        bool ok = true;
        for (std::size_t i = 0; i < poles.size() && ok; ++i)
            for (std::size_t j = i + 1; j < poles.size(); ++j)
                if (std::abs(poles[i] - poles[j]) < min_sep) {
                    ok = false;
                    break;
                }
        if (ok) return poles;
    }
    throw Error("pole draw failed to separate");
}

inline FuchsianSystem draw_raw_system(VerifyRng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        try {
            const auto poles = draw_poles(rng, 3);
            std::vector<Matrix> residues;
            for (int i = 0; i < 3; ++i) {
                Vector f(2);
                RowVector g(2);
                f << rng.box(), rng.box();
                g << rng.box(), rng.box();
                if (std::abs((g * f)(0, 0)) < 0.25) {
                    --i;
                    continue;
                }
                residues.push_back(f * g);
            }
            const FuchsianSystem system = build_system(poles, residues);
            const DecompositionPoint point = decompose(system);
            validate_index(point, TransformationIndex{0, 1, 0, 0});
            validate_index(point, TransformationIndex{1, 0, 0, 0});
            return system;
        } catch (const Error&) {
        }
    }
    throw Error("system draw failed to satisfy the guards");
}

inline Complex draw_sample_point(VerifyRng& rng, const std::vector<Complex>& poles,
                                 double clearance = 0.25) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const Complex x = rng.box(1.5);
        bool ok = true;
        for (const Complex& u : poles)
            if (std::abs(x - u) < clearance) {
                ok = false;
                break;
            }
        if (ok) return x;
    }
    throw Error("sample point draw failed to clear the poles");
}

// ---------------------------------------------------------------------------
// Verify harness.

struct CheckLine {
    std::string name;
    double residual = 0.0;
    double bound = 0.0;
    bool errored = false;
    std::string message;

    bool pass() const { return !errored && residual <= bound; }
};

class CheckSet {
public:
    explicit CheckSet(double scale) : scale_(scale) {}

    // Bound given at the 1e-9 base tolerance; the configured tolerance
    // rescales it. Exact checks pass bound 0, which never rescales.
    void record(const std::string& name, double residual, double base_bound) {
        CheckLine& line = slot(name);
        line.residual = std::max(line.residual, residual);
        line.bound = base_bound == 0.0 ? 0.0 : base_bound * scale_;
    }

    void record_error(const std::string& name, const std::string& message) {
        CheckLine& line = slot(name);
        line.errored = true;
        line.message = message;
    }

    // Folds a completed trial's lines in. Trials accumulate into their own
    // set first so a draw abandoned mid-run leaves no partial residuals.
    void merge(const CheckSet& trial) {
        for (const CheckLine& incoming : trial.lines_) {
            if (incoming.errored) {
                record_error(incoming.name, incoming.message);
                continue;
            }
            CheckLine& line = slot(incoming.name);
            line.residual = std::max(line.residual, incoming.residual);
            line.bound = incoming.bound;
        }
    }

    int report(std::ostream& out) const {
        int failures = 0;
        for (const CheckLine& line : lines_) {
            if (line.errored) {
                out << "check " << line.name << ": error " << line.message
                    << " FAIL\n";
                ++failures;
                continue;
            }
            out << "check " << line.name << ": residual "
                << format_number(line.residual) << " (bound "
                << format_number(line.bound) << ") "
                << (line.pass() ? "ok" : "FAIL") << "\n";
            if (!line.pass()) ++failures;
        }
        const int total = static_cast<int>(lines_.size());
        out << "result: " << (failures == 0 ? "PASS" : "FAIL") << " ("
            << (total - failures) << "/" << total << " checks)\n";
        return failures;
    }

private:
    CheckLine& slot(const std::string& name) {
        for (CheckLine& line : lines_)
            if (line.name == name) return line;
        lines_.push_back(CheckLine{name, 0.0, 0.0, false, ""});
        return lines_.back();
    }

    double scale_;
    std::vector<CheckLine> lines_;
};

inline void run_raw_trial(const FuchsianSystem& system,
                          const TransformationIndex& idx, VerifyRng& rng,
                          CheckSet& checks) {
    const SystemStep step = transform_system(system, idx);
    const ElementaryDivisor& multiplier = step.multiplier;
    const int m = system.matrix_size();

    std::vector<Complex> avoid = system.poles();
    avoid.push_back(multiplier.pole());
    for (int s = 0; s < 3; ++s) {
        const Complex x = draw_sample_point(rng, avoid);
        const Complex ratio =
            (x - multiplier.zero()) / (x - multiplier.pole());
        checks.record("divisor determinant identity",
                      std::abs(multiplier.eval(x).determinant() - ratio), 1e-10);
        checks.record(
            "divisor inverse identity",
            max_abs(multiplier.eval(x) * multiplier.eval_inverse(x) -
                    Matrix::Identity(m, m)),
            1e-10);
        Vector v(m);
        RowVector w(m);
        for (int i = 0; i < m; ++i) {
            v(i) = rng.box();
            w(i) = rng.box();
        }
        checks.record("vanishing rule", check_vanishing_rule(multiplier, v, w, x),
                      1e-10);
        checks.record("exchange rule", check_exchange_rule(multiplier, v, w, x),
                      1e-10);

        const Matrix lhs = step.system.eval_coefficient(x) * multiplier.eval(x);
        const Matrix rhs = multiplier.eval(x) * system.eval_coefficient(x) +
                           multiplier.derivative(x);
        checks.record("transformation equation",
                      max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs)), 1e-9);
    }

    const double trace_alpha =
        std::abs(step.system.residue(idx.alpha).trace() -
                 system.residue(idx.alpha).trace() + Complex(1));
    const double trace_beta =
        std::abs(step.system.residue(idx.beta).trace() -
                 system.residue(idx.beta).trace() - Complex(1));
    checks.record("trace shifts at the acting poles",
                  std::max(trace_alpha, trace_beta), 1e-10);
    checks.record(
        "infinity invariance",
        max_abs(step.system.residue_at_infinity() - system.residue_at_infinity()),
        1e-10);

    const TransformationIndex inverse{idx.beta, idx.alpha, idx.nu, idx.mu};
    const FuchsianSystem back = transform_system(step.system, inverse).system;
    double round_trip = 0.0;
    for (int i = 0; i < system.pole_count(); ++i)
        round_trip = std::max(round_trip, max_abs(back.residue(i) - system.residue(i)));
    checks.record("scheme round trip", round_trip, 1e-9);

    const DecompositionPoint point = decompose(system);
    const DecompositionPoint barred = transform_decomposition(point, idx);
    const GeneratingReport report = verify_generating(point, barred, idx, 1e-7, false);
    checks.record("generating dual gradients", report.max_dual_residual, 1e-8);
    checks.record("generating basis gradients", report.max_basis_residual, 1e-8);
    checks.record("generating finite differences", report.max_fd_residual, 1e-6);
}

inline void run_raw_config_checks(const RunConfig& cfg, CheckSet& checks,
                                  VerifyRng& rng) {
    const FuchsianSystem& system = *cfg.system;
    try {
        const RiemannScheme scheme = riemann_scheme(system);
        double full_rank = 0.0;
        for (int i = 0; i < system.pole_count(); ++i)
            if (scheme.points[static_cast<std::size_t>(i)].nonzero_rank >=
                system.matrix_size())
                full_rank = 1.0;
        checks.record("configured rank deficiency", full_rank, 0.0);
    } catch (const Error& e) {
        checks.record_error("configured rank deficiency", e.what());
    }

    try {
        const FuchsianSystem again = recompose(decompose(system));
        double gap = 0.0;
        for (int i = 0; i < system.pole_count(); ++i)
            gap = std::max(gap, max_abs(again.residue(i) - system.residue(i)));
        checks.record("configured round trip", gap, 1e-9);
    } catch (const Error& e) {
        checks.record_error("configured round trip", e.what());
    }

    try {
        const TransformationIndex idx = cfg.schedule.empty()
                                            ? TransformationIndex{0, 1, 0, 0}
                                            : cfg.schedule.front();
        run_raw_trial(system, idx, rng, checks);
    } catch (const Error& e) {
        checks.record_error("configured transformation equation", e.what());
    }
}

inline int verify_raw_system(const RunConfig& cfg, std::ostream& out) {
    VerifyRng rng(cfg.seed);
    const double scale = cfg.tolerance / 1e-9;
    CheckSet checks(scale);
    for (int trial = 0; trial < 4; ++trial) {
        const TransformationIndex idx =
            trial % 2 == 0 ? TransformationIndex{0, 1, 0, 0}
                           : TransformationIndex{2, 0, 0, 0};
        bool done = false;
        for (int attempt = 0; attempt < 20 && !done; ++attempt) {
            const FuchsianSystem system = draw_raw_system(rng);
            try {
                CheckSet local(scale);
                run_raw_trial(system, idx, rng, local);
                checks.merge(local);
                done = true;
            } catch (const Error&) {
                // degenerate draw along the trial; redraw
            }
        }
        if (!done)
            checks.record_error("transformation equation",
                                "random draws kept degenerating");
    }
    if (cfg.system) run_raw_config_checks(cfg, checks, rng);
    return checks.report(out);
}

inline std::pair<DPVParameters, DPVState> draw_dpv_instance(VerifyRng& rng) {
    DPVParameters prm{};
    prm.theta1 = rng.box(0.45);
    prm.thetat = rng.box(0.45);
    prm.kappa1 = rng.box(0.45);
    prm.kappa2 = rng.box(0.45);
    prm.theta0 = -(prm.theta1 + prm.thetat + prm.kappa1 + prm.kappa2);
    do {
        prm.t = rng.box(1.0);
    } while (std::abs(prm.t) < 0.3 || std::abs(prm.t - Complex(1)) < 0.3);
    DPVState state{};
    do {
        state.p = rng.box(0.9);
    } while (std::abs(state.p) < 0.3);
    state.q = rng.box(0.9) + Complex(1.2);
    return {prm, state};
}

inline void run_dpv_trial(DPVParameters prm, DPVState state, int steps,
                          CheckSet& checks, bool guard_conditioning) {
    for (int k = 0; k < steps; ++k) {
        const auto [next_prm, next_state] = dpv_step(prm, state);

        const DecompositionPoint point = build_dpv_point(prm, state);
        if (guard_conditioning)
            // Residue entries past 1e5 push the double-precision oracle above
            // the 1e-9 bound; the drawn orbit left the comparable region.
            for (int i = 0; i < 3; ++i)
                if (max_abs(point.pole(i).residue()) > 1e5)
                    throw Error("oracle conditioning guard");
        const DecompositionPoint barred =
            transform_decomposition(point, TransformationIndex{2, 1, 0, 0});
        const DPVState oracle = pq_coordinates(barred, next_prm);
        checks.record("closed form against the decomposition oracle",
                      std::max(std::abs(next_state.p - oracle.p),
                               std::abs(next_state.q - oracle.q)),
                      1e-9);

        const auto [std_prm, std_state] = to_standard(prm, state);
        const auto [std_next_prm, std_next_state] =
            dpv_standard_step(std_prm, std_state);
        const auto [lift_prm, lift_state] = to_standard(next_prm, next_state);
        double gap = std::max(std::abs(std_next_state.f - lift_state.f),
                              std::abs(std_next_state.g - lift_state.g));
        gap = std::max(gap, std::abs(std_next_prm.a0 - lift_prm.a0));
        gap = std::max(gap, std::abs(std_next_prm.a2 - lift_prm.a2));
        checks.record("standard recursion conjugacy", gap, 1e-7);

        const double shift =
            std::max(std::abs(next_prm.theta1 - prm.theta1 + Complex(1)),
                     std::abs(next_prm.thetat - prm.thetat - Complex(1)));
        checks.record("parameter table shift", shift, 1e-12);

        prm = next_prm;
        state = next_state;
    }
}

inline int verify_dpv(const RunConfig& cfg, std::ostream& out) {
    VerifyRng rng(cfg.seed);
    const double scale = cfg.tolerance / 1e-9;
    CheckSet checks(scale);
    if (cfg.has_dpv) {
        try {
            run_dpv_trial(cfg.dpv_params, cfg.dpv_state, 5, checks, false);
        } catch (const Error& e) {
            checks.record_error("closed form against the decomposition oracle",
                                e.what());
        }
    }
    int completed = 0;
    for (int attempt = 0; attempt < 40 && completed < 2; ++attempt) {
        const auto [prm, state] = draw_dpv_instance(rng);
        try {
            CheckSet local(scale);
            run_dpv_trial(prm, state, 5, local, true);
            checks.merge(local);
            ++completed;
        } catch (const Error&) {
            // guard violation along the orbit; regenerate
        }
    }
    if (completed < 2)
        checks.record_error("closed form against the decomposition oracle",
                            "random draws kept hitting indeterminacies");
    return checks.report(out);
}

inline std::pair<A2Parameters, A2State> draw_a2_instance(VerifyRng& rng) {
    A2Parameters prm{};
    do {
        prm.theta11 = rng.box(0.4);
        prm.theta12 = rng.box(0.4);
        prm.theta21 = rng.box(0.4);
        prm.theta22 = rng.box(0.4);
    } while (std::abs(prm.theta11 - prm.theta12) < 0.1 ||
             std::abs(prm.theta21 - prm.theta22) < 0.1);
    prm.kappa1 = rng.box(0.4);
    prm.kappa2 = rng.box(0.4);
    prm.kappa3 = -(prm.theta11 + prm.theta12 + prm.theta21 + prm.theta22 +
                   prm.kappa1 + prm.kappa2);
    const Complex x = rng.box(0.9) + Complex(1.5);
    const Complex y = rng.box(0.9) + Complex(-1.5);
    return {prm, a2_state(prm, x, y)};
}

inline void run_a2_trial(A2Parameters prm, A2State state, int steps,
                         CheckSet& checks) {
    for (int k = 0; k < steps; ++k) {
        const auto [next_prm, next_state] = composite_step(prm, state);

        const auto [std_prm, std_state] = to_standard(prm, state);
        const auto [std_next_prm, std_next_state] =
            a2_standard_step(std_prm, std_state);
        const auto [lift_prm, lift_state] = to_standard(next_prm, next_state);
        double gap = std::max(std::abs(std_next_state.f - lift_state.f),
                              std::abs(std_next_state.g - lift_state.g));
        gap = std::max(gap, std::abs(std_next_prm.b5 - lift_prm.b5));
        gap = std::max(gap, std::abs(std_next_prm.b7 - lift_prm.b7));
        checks.record("standard recursion conjugacy", gap, 1e-8);

        try {
            validate_state(next_prm, next_state);
            checks.record("matching equations at the stepped state", 0.0, 0.0);
        } catch (const Error& e) {
            checks.record_error("matching equations at the stepped state",
                                e.what());
        }

        prm = next_prm;
        state = next_state;
    }
}

inline int verify_a2star(const RunConfig& cfg, std::ostream& out) {
    VerifyRng rng(cfg.seed);
    CheckSet checks(cfg.tolerance / 1e-9);
    if (cfg.has_a2) {
        try {
            run_a2_trial(cfg.a2_params, cfg.a2_state, 2, checks);
        } catch (const Error& e) {
            checks.record_error("standard recursion conjugacy", e.what());
        }
    }
    int completed = 0;
    for (int attempt = 0; attempt < 30 && completed < 1; ++attempt) {
        try {
            const auto [prm, state] = draw_a2_instance(rng);
            CheckSet local(cfg.tolerance / 1e-9);
            run_a2_trial(prm, state, 2, local);
            checks.merge(local);
            ++completed;
        } catch (const Error&) {
            // guard violation; regenerate
        }
    }
    if (completed < 1)
        checks.record_error("standard recursion conjugacy",
                            "random draws kept hitting indeterminacies");
    return checks.report(out);
}

inline int verify_lattice(const RunConfig& cfg, std::ostream& out) {
    CheckSet checks(cfg.tolerance / 1e-9);
    const SurfaceData dpv = dpv_standard_surface();
    const SurfaceData a2 = a2star_standard_surface();
    const SurfaceData plane = a2star_schlesinger_surface();
    const SurfaceData resolved = dpv_schlesinger_surface();

    try {
        double bad = 0.0;
        for (const SurfaceData* surface : {&dpv, &a2, &plane}) {
            std::vector<std::pair<LatticeClass, long long>> weighted;
            for (std::size_t i = 0; i < surface->components.size(); ++i)
                weighted.emplace_back(surface->components[i],
                                      surface->multiplicities[i]);
            if (!verify_anticanonical_decomposition(surface->minus_k, weighted))
                bad = 1.0;
        }
        checks.record("anticanonical decompositions", bad, 0.0);
    } catch (const Error& e) {
        checks.record_error("anticanonical decompositions", e.what());
    }

    try {
        double bad = 0.0;
        const BlowdownTable quadric = dpv_blowdown_table();
        if (!verify_blowdown_structure(resolved.minus_k, quadric.hf, quadric.hg,
                                       quadric.exceptional))
            bad = 1.0;
        const BlowdownTable planar = a2star_blowdown_table();
        if (!verify_blowdown_structure(plane.minus_k, planar.hf, planar.hg,
                                       planar.exceptional))
            bad = 1.0;
        checks.record("blow-down structures", bad, 0.0);
    } catch (const Error& e) {
        checks.record_error("blow-down structures", e.what());
    }

    try {
        double bad = 0.0;
        const LatticeAction actions[] = {dpv_standard_step_action(),
                                         a2star_standard_step_action(),
                                         a2star_schlesinger_step_action()};
        const LatticeClass* deltas[] = {&dpv.minus_k, &a2.minus_k, &a2.minus_k};
        for (int i = 0; i < 3; ++i)
            if (!(actions[i].apply(*deltas[i]) == *deltas[i])) bad = 1.0;
        checks.record("gram isometries fixing the anticanonical class", bad, 0.0);
    } catch (const Error& e) {
        checks.record_error("gram isometries fixing the anticanonical class",
                            e.what());
    }

    try {
        double bad = 0.0;
        const auto matches = [](const IntVector& got,
                                std::initializer_list<long long> want) {
            if (got.size() != static_cast<Eigen::Index>(want.size())) return false;
            Eigen::Index i = 0;
            for (long long w : want)
                if (got(i++) != w) return false;
            return true;
        };
        if (!matches(translation_vector(dpv_standard_step_action(), dpv.roots,
                                        dpv.minus_k),
                     {0, 0, 1, -1, -1}))
            bad = 1.0;
        if (!matches(translation_vector(a2star_standard_step_action(), a2.roots,
                                        a2.minus_k),
                     {0, 0, 0, 1, 0, -1, 0}))
            bad = 1.0;
        if (!matches(translation_vector(a2star_schlesinger_step_action(), a2.roots,
                                        a2.minus_k),
                     {0, 0, 0, -1, 1, 1, -1}))
            bad = 1.0;
        checks.record("translation vectors", bad, 0.0);
    } catch (const Error& e) {
        checks.record_error("translation vectors", e.what());
    }

    try {
        double bad = 0.0;
        const std::vector<long long> dpv_marks{1, 1, 2, 1, 1};
        const std::vector<long long> a2_marks{1, 2, 3, 2, 1, 2, 1};
        const SurfaceData* surfaces[] = {&dpv, &a2};
        const std::vector<long long>* marks[] = {&dpv_marks, &a2_marks};
        for (int s = 0; s < 2; ++s) {
            const IntMatrix cartan = cartan_matrix(surfaces[s]->roots);
            for (Eigen::Index i = 0; i < cartan.rows(); ++i) {
                if (cartan(i, i) != 2) bad = 1.0;
                long long null = 0;
                for (Eigen::Index j = 0; j < cartan.cols(); ++j)
                    null += cartan(i, j) * (*marks[s])[static_cast<std::size_t>(j)];
                if (null != 0) bad = 1.0;
            }
            LatticeClass sum = (*marks[s])[0] * surfaces[s]->roots[0];
            for (std::size_t i = 1; i < surfaces[s]->roots.size(); ++i)
                sum = sum + (*marks[s])[i] * surfaces[s]->roots[i];
            if (!(sum == surfaces[s]->minus_k)) bad = 1.0;
        }
        checks.record("cartan marks and types", bad, 0.0);
    } catch (const Error& e) {
        checks.record_error("cartan marks and types", e.what());
    }

    return checks.report(out);
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    out << "verify mode=" << cfg.mode << " seed=" << cfg.seed << " tolerance="
        << format_number(cfg.tolerance) << "\n";
    int failures = 0;
    if (cfg.mode == "raw-system") failures = verify_raw_system(cfg, out);
    else if (cfg.mode == "dpv") failures = verify_dpv(cfg, out);
    else if (cfg.mode == "a2star") failures = verify_a2star(cfg, out);
    else failures = verify_lattice(cfg, out);
    return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Step reports.

inline void print_scheme(std::ostream& out, const RiemannScheme& scheme) {
    out << "  scheme:\n";
    for (const PointSpectrum& point : scheme.points) {
        out << "    " <<
            (point.at_infinity ? std::string("infinity")
                               : "pole " + complex_text(point.location))
            << ":";
        for (const ExponentGroup& group : point.groups) {
            out << " " << complex_text(group.value);
            if (group.multiplicity > 1) out << " (x" << group.multiplicity << ")";
        }
        out << "\n";
    }
}

inline void print_system_block(std::ostream& out, const std::string& label,
                               const FuchsianSystem& system) {
    out << label << ":\n";
    print_scheme(out, riemann_scheme(system));
    for (int i = 0; i < system.pole_count(); ++i) {
        out << "  residue " << i << " at " << complex_text(system.pole(i)) << ":\n";
        const Matrix& a = system.residue(i);
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            out << "   ";
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                out << " " << complex_text(a(r, c));
            out << "\n";
        }
    }
}

inline void print_dpv_block(std::ostream& out, const std::string& label,
                            const DPVParameters& prm, const DPVState& state) {
    out << label << ":\n";
    print_scheme(out, riemann_scheme(recompose(build_dpv_point(prm, state))));
    const auto [std_prm, std_state] = to_standard(prm, state);
    out << "  p = " << complex_text(state.p) << "\n";
    out << "  q = " << complex_text(state.q) << "\n";
    out << "  f = " << complex_text(std_state.f) << "\n";
    out << "  g = " << complex_text(std_state.g) << "\n";
}

inline void print_a2_block(std::ostream& out, const std::string& label,
                           const A2Parameters& prm, const A2State& state) {
    out << label << ":\n";
    print_scheme(out, riemann_scheme(recompose(build_a2_point(prm, state))));
    const auto [std_prm, std_state] = to_standard(prm, state);
    out << "  x = " << complex_text(state.x) << "\n";
    out << "  y = " << complex_text(state.y) << "\n";
    out << "  f = " << complex_text(std_state.f) << "\n";
    out << "  g = " << complex_text(std_state.g) << "\n";
}

inline int cmd_step(const RunConfig& cfg, std::ostream& out) {
    out << "step mode=" << cfg.mode << "\n";
    if (cfg.mode == "raw-system") {
        const TransformationIndex idx = cfg.schedule.front();
        out << "index alpha=" << idx.alpha << " beta=" << idx.beta
            << " mu=" << idx.mu << " nu=" << idx.nu << "\n";
        print_system_block(out, "before", *cfg.system);
        print_system_block(out, "after", transform_system(*cfg.system, idx).system);
        return 0;
    }
    if (cfg.mode == "dpv") {
        print_dpv_block(out, "before", cfg.dpv_params, cfg.dpv_state);
        const auto [next_prm, next_state] = dpv_step(cfg.dpv_params, cfg.dpv_state);
        print_dpv_block(out, "after", next_prm, next_state);
        return 0;
    }
    print_a2_block(out, "before", cfg.a2_params, cfg.a2_state);
    std::vector<RiemannScheme> stages;
    const auto [next_prm, next_state] =
        composite_step(cfg.a2_params, cfg.a2_state, &stages);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        out << "stage " << (i + 1) << ":\n";
        print_scheme(out, stages[i]);
    }
    print_a2_block(out, "after", next_prm, next_state);
    return 0;
}

// ---------------------------------------------------------------------------
// Orbit traces.

inline bool indeterminate_kind(const Error& e) {
    return dynamic_cast<const Indeterminacy*>(&e) != nullptr ||
           dynamic_cast<const ZeroP*>(&e) != nullptr ||
           dynamic_cast<const SingularParameterization*>(&e) != nullptr;
}

inline std::string json_halt_spliced(std::string array_text, int step,
                                     const std::string& message) {
    array_text.pop_back();  // trailing ']'
    if (array_text.size() > 1) array_text += ',';
    array_text += "{\"step\":" + std::to_string(step) +
                  ",\"halt\":" + quoted_text(message) + "}]";
    return array_text;
}

inline std::string int_vector_json(const IntVector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v(i));
    }
    out += ']';
    return out;
}

struct OrbitOutcome {
    std::string text;
    bool halted = false;
};

inline OrbitOutcome orbit_raw_system(const RunConfig& cfg) {
    std::vector<OrbitRecord> trace;
    trace.push_back({0, *cfg.system, riemann_scheme(*cfg.system)});
    FuchsianSystem current = *cfg.system;
    OrbitOutcome outcome;
    int halt_step = 0;
    std::string halt_message;
    for (int k = 1; k <= cfg.steps; ++k) {
        try {
            current = transform_system(
                          current,
                          cfg.schedule[static_cast<std::size_t>(k - 1) %
                                       cfg.schedule.size()])
                          .system;
        } catch (const Error& e) {
            outcome.halted = true;
            halt_step = k;
            halt_message = e.what();
            break;
        }
        trace.push_back({k, current, riemann_scheme(current)});
    }
    outcome.text = orbit_to_json(trace);
    if (outcome.halted)
        outcome.text = json_halt_spliced(outcome.text, halt_step, halt_message);
    outcome.text += "\n";
    return outcome;
}

inline std::string dpv_json_record(int step, const DPVState& state,
                                   const StandardDPVState& standard,
                                   const DPVParameters& prm) {
    std::string r = "{\"step\":" + std::to_string(step) + ",\"p\":";
    detail::append_complex(r, state.p);
    r += ",\"q\":";
    detail::append_complex(r, state.q);
    r += ",\"f\":";
    detail::append_complex(r, standard.f);
    r += ",\"g\":";
    detail::append_complex(r, standard.g);
    r += ",\"theta1\":";
    detail::append_complex(r, prm.theta1);
    r += ",\"thetat\":";
    detail::append_complex(r, prm.thetat);
    r += '}';
    return r;
}

inline std::string a2_json_record(int step, const A2State& state,
                                  const StandardA2State& standard,
                                  const A2Parameters& prm) {
    std::string r = "{\"step\":" + std::to_string(step) + ",\"x\":";
    detail::append_complex(r, state.x);
    r += ",\"y\":";
    detail::append_complex(r, state.y);
    r += ",\"f\":";
    detail::append_complex(r, standard.f);
    r += ",\"g\":";
    detail::append_complex(r, standard.g);
    const std::pair<const char*, Complex> params[] = {
        {"theta11", prm.theta11}, {"theta12", prm.theta12},
        {"theta21", prm.theta21}, {"theta22", prm.theta22},
        {"kappa1", prm.kappa1},   {"kappa2", prm.kappa2},
        {"kappa3", prm.kappa3}};
    for (const auto& [name, value] : params) {
        r += ",\"";
        r += name;
        r += "\":";
        detail::append_complex(r, value);
    }
    r += '}';
    return r;
}

template <typename Params, typename State, typename StepFn, typename RowFn,
          typename RecordFn>
OrbitOutcome orbit_reduced(const RunConfig& cfg, Params prm, State state,
                           const std::string& header, StepFn step_fn, RowFn row_fn,
                           RecordFn record_fn) {
    const bool csv = cfg.format != "json";
    OrbitOutcome outcome;
    std::vector<std::string> records;
    int halt_step = 0;
    std::string halt_message;
    for (int k = 1; k <= cfg.steps; ++k) {
        try {
            std::tie(prm, state) = step_fn(prm, state);
            if (csv) records.push_back(row_fn(k, prm, state));
            else records.push_back(record_fn(k, prm, state));
        } catch (const Error& e) {
            if (!indeterminate_kind(e)) throw;
            outcome.halted = true;
            halt_step = k;
            halt_message = e.what();
            break;
        }
    }
    if (csv) {
        outcome.text = header + "\n";
        for (const std::string& row : records) outcome.text += row + "\n";
        if (outcome.halted)
            outcome.text += "# halt at step " + std::to_string(halt_step) + ": " +
                            halt_message + "\n";
    } else {
        outcome.text = "[";
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (i) outcome.text += ',';
            outcome.text += records[i];
        }
        outcome.text += ']';
        if (outcome.halted)
            outcome.text = json_halt_spliced(outcome.text, halt_step, halt_message);
        outcome.text += "\n";
    }
    return outcome;
}

inline std::string orbit_lattice_text() {
    const SurfaceData dpv = dpv_standard_surface();
    const SurfaceData a2 = a2star_standard_surface();
    std::string text = "{\"dpv_standard\":";
    text += int_vector_json(
        translation_vector(dpv_standard_step_action(), dpv.roots, dpv.minus_k));
    text += ",\"a2star_standard\":";
    text += int_vector_json(
        translation_vector(a2star_standard_step_action(), a2.roots, a2.minus_k));
    text += ",\"a2star_schlesinger\":";
    text += int_vector_json(translation_vector(a2star_schlesinger_step_action(),
                                               a2.roots, a2.minus_k));
    text += "}\n";
    return text;
}

inline int cmd_orbit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    OrbitOutcome outcome;
    if (cfg.mode == "lattice") {
        outcome.text = orbit_lattice_text();
    } else if (cfg.mode == "raw-system") {
        outcome = orbit_raw_system(cfg);
    } else if (cfg.mode == "dpv") {
        outcome = orbit_reduced(
            cfg, cfg.dpv_params, cfg.dpv_state, dpv_csv_header(),
            [](const DPVParameters& p, const DPVState& s) { return dpv_step(p, s); },
            [](int k, const DPVParameters& p, const DPVState& s) {
                return dpv_csv_row(k, s, to_standard(p, s).second, p);
            },
            [](int k, const DPVParameters& p, const DPVState& s) {
                return dpv_json_record(k, s, to_standard(p, s).second, p);
            });
    } else {
        outcome = orbit_reduced(
            cfg, cfg.a2_params, cfg.a2_state, a2star_csv_header(),
            [](const A2Parameters& p, const A2State& s) {
                return composite_step(p, s);
            },
            [](int k, const A2Parameters& p, const A2State& s) {
                return a2star_csv_row(k, s, to_standard(p, s).second, p);
            },
            [](int k, const A2Parameters& p, const A2State& s) {
                return a2_json_record(k, s, to_standard(p, s).second, p);
            });
    }

    if (cfg.out_path.empty()) {
        out << outcome.text;
    } else {
        std::ofstream stream(cfg.out_path);
        if (!stream) throw Error("cannot open output file: " + cfg.out_path);
        stream << outcome.text;
    }
    if (outcome.halted) {
        err << "indeterminacy: orbit halted, see the trace record\n";
        return 3;
    }
    return 0;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    using cli_detail::Command;

    CLI::App app{"Schlesinger transformation toolkit"};
    app.require_subcommand(1);

    std::string mode, config_path, format, out_path;
    int steps = 0;
    std::uint64_t seed = 17;
    double tolerance = 1e-9;

    std::vector<CLI::Option*> mode_opts, steps_opts, seed_opts, tol_opts,
        format_opts, out_opts, config_opts;
    const auto add_common = [&](CLI::App* cmd) {
        config_opts.push_back(
            cmd->add_option("--config", config_path, "JSON run configuration"));
        mode_opts.push_back(cmd->add_option(
            "--mode", mode, "raw-system | dpv | a2star | lattice"));
        steps_opts.push_back(cmd->add_option("--steps", steps, "orbit length")
                                 ->check(CLI::NonNegativeNumber));
        seed_opts.push_back(cmd->add_option("--seed", seed, "verify PRNG seed"));
        tol_opts.push_back(cmd->add_option("--tol", tolerance, "base tolerance")
                               ->check(CLI::PositiveNumber));
        format_opts.push_back(cmd->add_option("--format", format, "csv | json")
                                  ->check(CLI::IsMember({"csv", "json"})));
        out_opts.push_back(cmd->add_option("--out", out_path, "output path"));
    };
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
    CLI::App* step_cmd = app.add_subcommand("step", "apply one transformation");
    CLI::App* orbit_cmd = app.add_subcommand("orbit", "iterate and write a trace");
    add_common(verify_cmd);
    add_common(step_cmd);
    add_common(orbit_cmd);

    std::vector<const char*> argv;
    argv.push_back("schlesinger");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Command cmd = app.got_subcommand(verify_cmd) ? Command::verify
                        : app.got_subcommand(step_cmd) ? Command::step
                                                       : Command::orbit;
    const auto used = [](const std::vector<CLI::Option*>& opts) {
        for (const CLI::Option* opt : opts)
            if (opt->count() > 0) return true;
        return false;
    };

    cli_detail::RunConfig cfg;
    try {
        if (used(config_opts))
            cli_detail::load_common_fields(cli_detail::load_document(config_path),
                                           cfg);
        if (used(mode_opts)) cfg.mode = mode;
        if (used(steps_opts)) cfg.steps = steps;
        if (used(seed_opts)) cfg.seed = seed;
        if (used(tol_opts)) cfg.tolerance = tolerance;
        if (used(format_opts)) cfg.format = format;
        if (used(out_opts)) cfg.out_path = out_path;
        if (cfg.mode != "raw-system" && cfg.mode != "dpv" && cfg.mode != "a2star" &&
            cfg.mode != "lattice")
            throw ParseError("unknown mode: " + cfg.mode);
        if (used(config_opts))
            cli_detail::load_mode_blocks(cli_detail::load_document(config_path),
                                         cfg);
        cli_detail::require_runnable(cmd, cfg);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        switch (cmd) {
            case Command::verify:
                return cli_detail::cmd_verify(cfg, out);
            case Command::step:
                return cli_detail::cmd_step(cfg, out);
            case Command::orbit:
                return cli_detail::cmd_orbit(cfg, out, err);
        }
    } catch (const Error& e) {
        if (cli_detail::indeterminate_kind(e)) {
            err << "indeterminacy: " << e.what() << "\n";
            return 3;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace schlesinger
