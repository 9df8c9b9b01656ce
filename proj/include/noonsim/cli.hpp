#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "noonsim/experiments.hpp"
#include "noonsim/io.hpp"

namespace noonsim::cli {

using io::ConfigError;
using io::json;

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kRuntimeError = 3 };

/// A run that was configured correctly but could not produce its result,
/// e.g. a herald that never fires.
class RunError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char *kOutDirEnv = "NOONSIM_OUT_DIR";

/// Shortest round-trip decimal text, independent of locale.
inline std::string format_number(double x) {
    if (x == 0.0) {
        x = 0.0; // drop the sign of negative zero
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// format_number with a trailing ".0" on integral values ("0.0", "3.0").
inline std::string format_decimal(double x) {
    std::string s = format_number(x);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const {
        std::string out;
        auto line = [&out](const std::vector<std::string> &cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out += (i ? "," : "") + cells[i];
            }
            out += '\n';
        };
        line(columns);
        for (const auto &r : rows) {
            line(r);
        }
        return out;
    }

    json to_json() const {
        return {{"columns", columns}, {"rows", rows}};
    }
};

/// Everything an experiment produces: a figure anchor, a summary, and an
/// optional table.
struct Artifacts {
    std::string anchor;
    json summary;
    Table table;
};

namespace detail {

inline const json &params_of(const json &config) {
    static const json empty = json::object();
    if (!config.contains("params")) {
        return empty;
    }
    const auto &p = config.at("params");
    if (!p.is_object()) {
        throw ConfigError("'params' must be an object");
    }
    return p;
}

inline PolBasis basis_param(const json &params, const char *key, PolBasis fallback) {
    return io::basis_from_json(params, key, fallback, "params");
}

struct Grid {
    std::vector<double> values;  // in the unit of the config
    std::vector<double> radians;
};

/// {"start_<unit>", "stop_<unit>", "points", "endpoint"}, unit deg or rad.
inline Grid grid_param(const json &params, bool degrees, double start, double stop,
                       std::size_t points, bool endpoint) {
    const std::string unit = degrees ? "deg" : "rad";
    if (params.contains("grid")) {
        const auto &g = params.at("grid");
        const std::string where = "params.grid";
        start = io::detail::number_or(g, ("start_" + unit).c_str(), start, where);
        stop = io::detail::number_or(g, ("stop_" + unit).c_str(), stop, where);
        if (g.contains("points")) {
            points = io::detail::count(g, "points", where);
        }
        if (g.contains("endpoint")) {
            if (!g.at("endpoint").is_boolean()) {
                throw ConfigError(where + ": 'endpoint' must be a boolean");
            }
            endpoint = g.at("endpoint").get<bool>();
        }
    }
    if (points < 2 || !(stop > start)) {
        throw ConfigError("params.grid: need at least two points and stop > start");
    }
    Grid out;
    out.values = uniform_grid(start, stop, points, endpoint);
    for (double v : out.values) {
        out.radians.push_back(degrees ? deg_to_rad(v) : v);
    }
    return out;
}

inline TwofoldPair twofold_param(const json &params) {
    TwofoldPair t;
    if (params.contains("twofold")) {
        const auto names = io::detail::strings(params, "twofold", "params");
        if (names.size() != 2) {
            throw ConfigError("params.twofold must name two detectors");
        }
        t.first = names[0];
        t.second = names[1];
    }
    return t;
}

inline Ensemble source_param(const json &params, const json &fallback) {
    return io::source_from_json(params.contains("source") ? params.at("source") : fallback);
}

inline Table scan_table(const ScanResult &r, const std::string &abscissa_column,
                        const std::vector<double> &abscissa_values) {
    Table t;
    t.columns.push_back(abscissa_column);
    for (const auto &s : r.series) {
        t.columns.push_back(s.name);
    }
    for (std::size_t i = 0; i < abscissa_values.size(); ++i) {
        std::vector<std::string> row{format_number(abscissa_values[i])};
        for (const auto &s : r.series) {
            row.push_back(format_number(s.values[i]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline json visibilities(const ScanResult &r) {
    json v = json::object();
    for (const auto &s : r.series) {
        v[s.name] = s.visibility;
    }
    return v;
}

/// Abscissa values (in config units) of the extrema of a series.
inline std::vector<double> pick(const ScanResult &r, const Grid &g, const std::string &series,
                                bool minima, double tol) {
    const auto hits = minima ? r.minima(series, tol) : r.maxima(series, tol);
    std::vector<double> out;
    for (std::size_t i = 0, j = 0; i < g.radians.size() && j < hits.size(); ++i) {
        if (g.radians[i] == hits[j]) {
            out.push_back(g.values[i]);
            ++j;
        }
    }
    return out;
}

// ------------------------------------------------------------ experiments

inline Artifacts run_fig2(const json &params) {
    const PolBasis basis = basis_param(params, "basis_a", PolBasis::hv);
    const Ensemble src = source_param(params, {{"kind", "singlet"}, {"n", 2}});
    const Grid g = grid_param(params, true, -90.0, 90.0, 361, true);
    const ScanResult r = visibility_scan(src, basis, g.radians, twofold_param(params));
    const double tol = io::detail::number_or(params, "minimum_tolerance", 1e-12, "params");
    const auto &four = r.get("fourfold").values;
    Artifacts a;
    a.anchor = std::string("Fig. 2, mode a analyzed in ") + std::string(to_string(basis));
    a.summary = {{"basis_a", to_string(basis)},
                 {"grid_points", g.values.size()},
                 {"visibility", visibilities(r)},
                 {"fourfold_min", *std::min_element(four.begin(), four.end())},
                 {"fourfold_max", *std::max_element(four.begin(), four.end())},
                 {"minima_angles_deg", pick(r, g, "fourfold", true, tol)}};
    a.table = scan_table(r, "b_hwp_angle_deg", g.values);
    return a;
}

inline Artifacts run_fig3(const json &params) {
    const PolBasis basis = basis_param(params, "basis_a", PolBasis::pm);
    if (basis == PolBasis::hv) {
        throw ConfigError("fig3: basis_a must be pm or rl");
    }
    const Ensemble src = source_param(params, {{"kind", "pdc"}, {"tau", 0.1}, {"n_max", 4}});
    const Grid g = grid_param(params, false, 0.0, 2.0 * std::numbers::pi, 720, false);
    const ScanResult r = fringe_scan(basis, g.radians, src, twofold_param(params));
    const double tol = 1e-12 * std::max(1.0, *std::max_element(r.get("fourfold").values.begin(),
                                                               r.get("fourfold").values.end()));
    const auto maxima = pick(r, g, "fourfold", false, tol);
    const auto minima = pick(r, g, "fourfold", true, tol);
    Artifacts a;
    a.anchor = std::string("Fig. 3, ") + std::string(to_string(basis)) + " basis";
    a.summary = {{"basis_a", to_string(basis)},
                 {"grid_points", g.values.size()},
                 {"visibility", visibilities(r)},
                 {"fourfold_max_at", format_decimal(maxima.front())},
                 {"fourfold_min_at", format_decimal(minima.front())},
                 {"fourfold_maxima_rad", maxima},
                 {"fourfold_minima_rad", minima}};
    a.table = scan_table(r, "theta_b_rad", g.values);
    return a;
}

inline Artifacts run_alpha(const json &params) {
    const double v = io::detail::number_or(params, "visibility", 0.79, "params");
    std::size_t points = 51;
    if (params.contains("alpha_points")) {
        points = io::detail::count(params, "alpha_points", "params");
    }
    if (points < 2) {
        throw ConfigError("alpha: alpha_points must be at least 2");
    }
    const Grid g = grid_param(params, true, -90.0, 90.0, 361, true);
    const auto curve = alpha_visibility_curve(uniform_grid(0.0, 1.0, points), g.radians);
    Artifacts a;
    a.anchor = "Fig. 2, four-fold visibility vs indistinguishable content";
    a.table.columns = {"alpha", "fourfold_visibility"};
    for (const auto &p : curve) {
        a.table.rows.push_back({format_number(p.alpha), format_number(p.visibility)});
    }
    double alpha = 0.0;
    try {
        alpha = alpha_from_visibility(v, curve);
    } catch (const OutOfModelRange &e) {
        throw ConfigError(std::string("alpha: ") + e.what());
    }
    a.summary = {{"visibility", v},
                 {"alpha", alpha},
                 {"alpha_points", points},
                 {"grid_points", g.values.size()},
                 {"model_range", {curve.front().visibility, curve.back().visibility}}};
    return a;
}

inline Artifacts run_pair_ratio(const json &params) {
    const double tau = io::detail::number_or(params, "tau", 0.1, "params");
    unsigned n_max = 4;
    if (params.contains("n_max")) {
        n_max = io::detail::count(params, "n_max", "params");
    }
    if (!(tau > 0.0) || n_max < 3 || n_max > 12) {
        throw ConfigError("pair_ratio: need tau > 0 and 3 <= n_max <= 12");
    }
    const PairRatio r = pair_ratio_report(tau, n_max);
    Artifacts a;
    a.anchor = "three-to-two pair production ratio of the source";
    a.table.columns = {"pairs", "probability"};
    json pairs = json::object();
    for (const auto &[n, p] : r.pairs) {
        a.table.rows.push_back({std::to_string(n), format_number(p)});
        pairs[std::to_string(n)] = p;
    }
    a.summary = {{"tau", tau},
                 {"n_max", n_max},
                 {"ratio", r.ratio},
                 {"below_two_percent", r.ratio < 0.02},
                 {"pair_probabilities", pairs},
                 {"truncation_error", r.truncation_error}};
    return a;
}

struct HeraldDefaults {
    std::string anchor;
    json scheme;
    json source;
    unsigned target_n;
    double target_phase;
    PolBasis target_basis;
};

inline HeraldDefaults herald_defaults(const std::string &id, const json &params) {
    const double pi = std::numbers::pi;
    if (id == "noon2") {
        const PolBasis b = basis_param(params, "basis", PolBasis::pm);
        if (b == PolBasis::hv) {
            throw ConfigError("noon2: basis must be pm or rl");
        }
        return {std::string("Fig. 1b, ") + std::string(to_string(b)) + " basis",
                {{"scheme", "noon2"}, {"basis", to_string(b)}},
                {{"kind", "singlet"}, {"n", 2}},
                2,
                b == PolBasis::pm ? pi : 0.0,
                PolBasis::hv};
    }
    if (id == "noon4") {
        return {"Fig. 5a", {{"scheme", "noon4"}}, {{"kind", "singlet"}, {"n", 4}}, 4, pi,
                PolBasis::hv};
    }
    if (id == "noon8") {
        return {"Fig. 5b, rl basis", {{"scheme", "noon8"}}, {{"kind", "singlet"}, {"n", 8}}, 8,
                pi, PolBasis::rl};
    }
    return {"Fig. 1a, custom circuit", nullptr, {{"kind", "singlet"}, {"n", 2}}, 2, pi,
            PolBasis::hv};
}

inline Artifacts run_herald(const std::string &id, const json &params) {
    HeraldDefaults d = herald_defaults(id, params);
    json scheme_json = d.scheme;
    if (id == "herald") {
        scheme_json = io::detail::field(params, "herald", "params");
    }
    const HeraldScheme scheme = io::scheme_from_json(scheme_json);
    const Ensemble src = source_param(params, d.source);

    unsigned n = d.target_n;
    double phase = d.target_phase;
    PolBasis basis = d.target_basis;
    std::string spatial = "b";
    if (params.contains("target")) {
        const auto &t = params.at("target");
        n = io::detail::count(t, "n", "params.target");
        phase = io::detail::number_or(t, "phase_rad", phase, "params.target");
        basis = io::basis_from_json(t, "basis", basis, "params.target");
        if (t.contains("spatial")) {
            spatial = io::detail::text(t, "spatial", "params.target");
        }
    }

    HeraldOutcome h;
    try {
        h = run_scheme(scheme, src);
    } catch (const RegistryError &e) {
        throw ConfigError(std::string("herald: ") + e.what());
    }
    if (!h.fired()) {
        throw RunError("herald never fires for this source (probability " +
                       format_number(h.probability) + "); no conditional state");
    }
    const PureState target = noon_state(n, phase, basis, spatial);
    json fid = nullptr;
    if (h.conditional->registry() == target.registry()) {
        fid = fidelity(*h.conditional, target);
    }

    Artifacts a;
    a.anchor = d.anchor;
    json outcome = io::to_json(h);
    outcome["fidelity_vs_target"] = fid;
    a.summary = {{"scheme", scheme.name},
                 {"probability", h.probability},
                 {"fidelity", fid},
                 {"target", {{"n", n}, {"phase_rad", phase}, {"basis", to_string(basis)},
                             {"spatial", spatial}}},
                 {"outcome", std::move(outcome)}};
    a.table.columns = {"component", "weight"};
    for (const auto &l : h.conditional->registry().labels()) {
        a.table.columns.push_back(l.name());
    }
    a.table.columns.insert(a.table.columns.end(), {"re", "im"});
    std::size_t k = 0;
    for (const auto &c : h.conditional->components()) {
        for (const auto &[occ, amp] : c.state.terms()) {
            std::vector<std::string> row{std::to_string(k), format_number(c.weight)};
            for (unsigned o : occ) {
                row.push_back(std::to_string(o));
            }
            row.push_back(format_number(amp.real()));
            row.push_back(format_number(amp.imag()));
            a.table.rows.push_back(std::move(row));
        }
        ++k;
    }
    return a;
}

inline Artifacts run_any_basis(const json &config, const json &params) {
    std::uint64_t seed = 2005;
    if (config.contains("seed")) {
        seed = io::detail::count(config, "seed", "config");
    }
    if (params.contains("seed")) {
        seed = io::detail::count(params, "seed", "params");
    }
    std::size_t count = 12;
    if (params.contains("bases")) {
        count = io::detail::count(params, "bases", "params");
    }
    std::mt19937_64 rng(seed);
    Artifacts a;
    a.anchor = "Fig. 1b, arbitrary analyzer on mode a";
    a.table.columns = {"basis", "herald_probability", "same_basis_coincidence",
                       "complementary_coincidence_1", "complementary_coincidence_2"};
    double worst_p = 0.0, worst_c = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const AnyBasisCheck c = any_basis_herald(random_polarization_unitary(rng));
        a.table.rows.push_back({std::to_string(i), format_number(c.herald_probability),
                                format_number(c.same_basis_coincidence),
                                format_number(c.complementary_coincidence[0]),
                                format_number(c.complementary_coincidence[1])});
        worst_p = std::max(worst_p, std::abs(c.herald_probability - 1.0 / 3.0));
        worst_c = std::max({worst_c, c.complementary_coincidence[0], c.complementary_coincidence[1]});
    }
    a.summary = {{"seed", seed},
                 {"bases", count},
                 {"max_probability_deviation_from_one_third", worst_p},
                 {"max_complementary_coincidence", worst_c}};
    return a;
}

} // namespace detail

struct ExperimentInfo {
    std::string id;
    std::string anchor;
    std::string description;
};

/// Built-in experiments in listing order.
inline const std::vector<ExperimentInfo> &experiments() {
    static const std::vector<ExperimentInfo> list = {
        {"fig2", "Fig. 2", "four-fold and two-fold coincidences while rotating the b analyzer"},
        {"fig3", "Fig. 3", "coincidence fringes versus birefringent phase on mode b"},
        {"alpha", "Fig. 2", "four-fold visibility versus indistinguishable content and its inversion"},
        {"pair_ratio", "Fig. 2 source", "three-to-two pair production ratio of the down-conversion source"},
        {"noon2", "Fig. 1b", "two-photon NOON state heralded by an a_h a_v coincidence"},
        {"noon4", "Fig. 5a", "four-photon NOON state from a split and rotated mode a"},
        {"noon8", "Fig. 5b", "eight-photon NOON state in the rl basis from a beam-splitter cascade"},
        {"herald", "Fig. 1a", "user-defined circuit and detection pattern on mode a"},
        {"any_basis", "Fig. 1b", "heralding behind seeded random analyzers on mode a"},
    };
    return list;
}

/// Runs one parsed configuration. Throws ConfigError or RunError.
inline Artifacts run_experiment(const json &config) {
    if (!config.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    const std::string id = io::detail::text(config, "experiment", "config");
    const json &params = detail::params_of(config);
    try {
        if (id == "fig2") {
            return detail::run_fig2(params);
        }
        if (id == "fig3") {
            return detail::run_fig3(params);
        }
        if (id == "alpha") {
            return detail::run_alpha(params);
        }
        if (id == "pair_ratio") {
            return detail::run_pair_ratio(params);
        }
        if (id == "noon2" || id == "noon4" || id == "noon8" || id == "herald") {
            return detail::run_herald(id, params);
        }
        if (id == "any_basis") {
            return detail::run_any_basis(config, params);
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument &e) {
        // Malformed mode names, circuits or patterns surface from the library
        // as invalid_argument.
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown experiment '" + id + "'");
}

inline json load_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config not found: " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

enum class Format { csv, json };

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;  // empty: environment, then current directory
    Format format = Format::csv;
};

inline std::filesystem::path resolve_out_dir(const std::filesystem::path &requested) {
    if (!requested.empty()) {
        return requested;
    }
    if (const char *env = std::getenv(kOutDirEnv); env && *env) {
        return env;
    }
    return ".";
}

inline void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw RunError("cannot write " + path.string());
    }
}

/// The `run` subcommand. Writes <stem>.csv and <stem>.json (csv format) or a
/// single <stem>.json holding summary and table (json format).
inline int run(const RunOptions &opt, std::ostream &out, std::ostream &err) {
    try {
        const json config = load_json(opt.config);
        Artifacts a = run_experiment(config);
        std::string stem = opt.config.stem().string();
        if (config.contains("name")) {
            stem = io::detail::text(config, "name", "config");
        }
        const auto dir = resolve_out_dir(opt.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw RunError("cannot create output directory " + dir.string() + ": " + ec.message());
        }

        json doc = {{"experiment", config.at("experiment")}, {"anchor", a.anchor}};
        for (auto &[k, v] : a.summary.items()) {
            doc[k] = v;
        }
        std::vector<std::filesystem::path> written;
        if (opt.format == Format::csv) {
            if (!a.table.columns.empty()) {
                written.push_back(dir / (stem + ".csv"));
                write_file(written.back(), a.table.to_csv());
            }
        } else {
            doc["table"] = a.table.to_json();
        }
        written.push_back(dir / (stem + ".json"));
        write_file(written.back(), doc.dump(2) + "\n");

        out << a.anchor << '\n' << a.summary.dump() << '\n';
        for (const auto &p : written) {
            out << "wrote " << p.string() << '\n';
        }
        return kSuccess;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int list(std::ostream &out) {
    for (const auto &e : experiments()) {
        out << e.id << "\t[" << e.anchor << "]\t" << e.description << '\n';
    }
    return kSuccess;
}

/// The `dump-state` subcommand: prints the canonical JSON of a source.
inline int dump_state(const std::filesystem::path &source, std::ostream &out, std::ostream &err) {
    try {
        json j = load_json(source);
        Ensemble e = [&] {
            try {
                return io::source_from_json(j);
            } catch (const std::invalid_argument &ex) {
                throw ConfigError(ex.what());
            }
        }();
        out << (e.is_pure() ? io::to_json(e.components().front().state) : io::to_json(e)).dump(2)
            << '\n';
        return kSuccess;
    } catch (const ConfigError &ex) {
        err << "config error: " << ex.what() << '\n';
        return kConfigError;
    } catch (const std::exception &ex) {
        err << "runtime error: " << ex.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace noonsim::cli
