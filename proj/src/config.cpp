#include "superlambda/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "superlambda/serialize.hpp"

namespace superlambda {

std::string to_string(Mode mode)
{
    switch (mode) {
    case Mode::meanfield: return "meanfield";
    case Mode::exact: return "exact";
    case Mode::single_atom: return "single-atom";
    case Mode::sweep: return "sweep";
    case Mode::analyze: return "analyze";
    case Mode::compare: return "compare";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name)
{
    for (Mode m : {Mode::meanfield, Mode::exact, Mode::single_atom, Mode::sweep,
                   Mode::analyze, Mode::compare}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown mode '" + name +
                      "' (expected meanfield, exact, single-atom, sweep, "
                      "analyze or compare)");
}

std::string to_string(CouplingKind kind)
{
    switch (kind) {
    case CouplingKind::dicke: return "dicke";
    case CouplingKind::independent: return "independent";
    case CouplingKind::geometry: return "geometry";
    }
    return "unknown";
}

CouplingKind coupling_from_string(const std::string& name)
{
    if (name == "dicke") {
        return CouplingKind::dicke;
    }
    if (name == "independent") {
        return CouplingKind::independent;
    }
    if (name == "geometry") {
        return CouplingKind::geometry;
    }
    throw ConfigError("unknown coupling '" + name +
                      "' (expected dicke, independent or geometry)");
}

bool RunConfig::operator==(const RunConfig& o) const
{
    return mode == o.mode && params == o.params && coupling == o.coupling &&
           geometry.positions == o.geometry.positions &&
           geometry.wavenumber1 == o.geometry.wavenumber1 &&
           geometry.wavenumber2 == o.geometry.wavenumber2 &&
           initial_levels == o.initial_levels && t_end == o.t_end &&
           t_unit == o.t_unit && samples == o.samples &&
           spacing == o.spacing &&
           log_start_fraction == o.log_start_fraction && tol == o.tol &&
           method == o.method && seed == o.seed &&
           propagation == o.propagation && out_dir == o.out_dir &&
           svg == o.svg && log_time == o.log_time &&
           sweep_omega_bar == o.sweep_omega_bar && workers == o.workers &&
           run_a == o.run_a && run_b == o.run_b &&
           compare_columns == o.compare_columns &&
           compare_tolerance == o.compare_tolerance &&
           time_column == o.time_column && input == o.input;
}

namespace {

// Accepted keys; "" is the top-level section.
const std::map<std::string, std::vector<std::string>>& schema()
{
    static const std::map<std::string, std::vector<std::string>> s = {
        {"", {"mode"}},
        {"params",
         {"n_atoms", "gamma1", "gamma2", "mu1", "mu2", "rabi", "omega_bar",
          "initial_excited"}},
        {"geometry",
         {"coupling", "positions", "wavenumber1", "wavenumber2",
          "initial_levels"}},
        {"time", {"t_end", "unit", "samples", "spacing", "log_start_fraction"}},
        {"solver",
         {"rel", "abs", "max_step", "min_step", "method", "seed",
          "seed_epsilon", "propagation"}},
        {"output", {"dir", "svg", "log_time"}},
        {"sweep", {"omega_bar", "workers"}},
        {"compare", {"run_a", "run_b", "columns", "tolerance", "time_column"}},
        {"analyze", {"input"}},
    };
    return s;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    if (trim(s).empty()) {
        return out;
    }
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

struct Entry
{
    std::string value;
    std::string origin; ///< "line N" or "environment variable X"
};

class Values
{
public:
    std::map<std::string, Entry> entries;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ConfigError(entries.at(key).origin + ": " + key + ": " + what);
    }

    const std::string& raw(const std::string& key) const
    {
        return entries.at(key).value;
    }

    double number(const std::string& key) const
    {
        return parse_number(key, raw(key));
    }

    double parse_number(const std::string& key, const std::string& text) const
    {
        double v = 0.0;
        const char* first = text.data();
        const char* last = first + text.size();
        if (!text.empty() && *first == '+') {
            ++first;
        }
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (text.empty() || ec != std::errc() || ptr != last || std::isnan(v)) {
            fail(key, "expected a number, got '" + text + "'");
        }
        return v;
    }

    std::int64_t integer(const std::string& key) const
    {
        const double v = number(key);
        if (!(std::abs(v) < 9.0e15) || std::floor(v) != v) {
            fail(key, "expected an integer, got '" + raw(key) + "'");
        }
        return static_cast<std::int64_t>(v);
    }

    bool boolean(const std::string& key) const
    {
        const std::string& v = raw(key);
        if (v == "true" || v == "on" || v == "yes" || v == "1") {
            return true;
        }
        if (v == "false" || v == "off" || v == "no" || v == "0") {
            return false;
        }
        fail(key, "expected true/false, got '" + v + "'");
    }

    std::vector<double> numbers(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : split(raw(key), ',')) {
            out.push_back(parse_number(key, item));
        }
        return out;
    }

    template <typename F>
    auto enumerated(const std::string& key, F&& convert) const
    {
        try {
            return convert(raw(key));
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
    }
};

Values read_values(const std::string& text, const EnvLookup& env,
                   const Overrides& overrides)
{
    Values values;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        const std::string where = "line " + std::to_string(lineno);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(where + ": malformed section header '" + t +
                                  "'");
            }
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            if (section.empty() || !schema().count(section)) {
                throw ConfigError(where + ": unknown section [" + section +
                                  "]");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + t +
                              "'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        const auto& keys = schema().at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'" +
                              (section.empty() ? std::string(" at top level")
                                               : " in [" + section + "]"));
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (values.has(full)) {
            throw ConfigError(where + ": duplicate key '" + full + "' (first at " +
                              values.entries[full].origin + ")");
        }
        values.entries[full] = {value, where};
    }

    if (env) {
        for (const auto& [sec, keys] : schema()) {
            for (const auto& key : keys) {
                std::string name = kEnvPrefix;
                name += sec.empty() ? key : sec + "_" + key;
                std::transform(name.begin(), name.end(), name.begin(),
                               [](unsigned char c) { return std::toupper(c); });
                if (auto v = env(name)) {
                    const std::string full = sec.empty() ? key : sec + "." + key;
                    values.entries[full] = {trim(*v),
                                            "environment variable " + name};
                }
            }
        }
    }
    for (const auto& [full, value] : overrides) {
        const auto dot = full.find('.');
        const std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
        const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
        const auto it = schema().find(sec);
        if (it == schema().end() ||
            std::find(it->second.begin(), it->second.end(), key) ==
                it->second.end()) {
            throw ConfigError("command line: unknown setting '" + full + "'");
        }
        values.entries[full] = {trim(value), "command line"};
    }
    return values;
}

std::vector<std::string> required_keys(Mode mode, bool mode_given)
{
    std::vector<std::string> req;
    if (!mode_given) {
        req.push_back("mode");
    }
    const std::vector<std::string> physics = {"params.n_atoms", "params.gamma1",
                                              "params.gamma2", "params.mu1",
                                              "params.mu2"};
    switch (mode) {
    case Mode::meanfield:
    case Mode::exact:
        req.insert(req.end(), physics.begin(), physics.end());
        req.push_back("params.rabi|params.omega_bar");
        req.push_back("time.t_end");
        break;
    case Mode::sweep:
        req.insert(req.end(), physics.begin(), physics.end());
        req.push_back("time.t_end");
        req.push_back("sweep.omega_bar");
        break;
    case Mode::single_atom:
        req.push_back("params.gamma1");
        req.push_back("params.gamma2");
        req.push_back("params.rabi|params.omega_bar");
        req.push_back("time.t_end");
        break;
    case Mode::analyze: req.push_back("analyze.input"); break;
    case Mode::compare:
        req.push_back("compare.run_a");
        req.push_back("compare.run_b");
        req.push_back("compare.columns");
        break;
    }
    return req;
}

std::string format_number(double x)
{
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string join_numbers(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ", " : "") + format_number(xs[i]);
    }
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text, const EnvLookup& env,
                       const Overrides& overrides)
{
    const Values v = read_values(text, env, overrides);
    RunConfig c;

    const bool mode_given = v.has("mode");
    if (mode_given) {
        c.mode = v.enumerated("mode", mode_from_string);
    }
    std::vector<std::string> missing;
    for (const auto& key : required_keys(c.mode, mode_given)) {
        const auto bar = key.find('|');
        const bool present =
            bar == std::string::npos
                ? v.has(key)
                : v.has(key.substr(0, bar)) || v.has(key.substr(bar + 1));
        if (!present) {
            missing.push_back(key);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& k : missing) {
            list += (list.empty() ? "" : ", ") + k;
        }
        throw ConfigError("missing required keys: " + list);
    }

    // params
    auto& p = c.params;
    if (v.has("params.n_atoms")) {
        p.n_atoms = v.integer("params.n_atoms");
    }
    if (c.mode == Mode::single_atom && p.n_atoms != 1) {
        v.fail("params.n_atoms", "single-atom mode requires n_atoms = 1");
    }
    for (auto [key, field] :
         {std::pair{"params.gamma1", &p.gamma1}, std::pair{"params.gamma2", &p.gamma2},
          std::pair{"params.mu1", &p.mu1}, std::pair{"params.mu2", &p.mu2}}) {
        if (v.has(key)) {
            *field = v.number(key);
        }
    }
    p.initial_excited = v.has("params.initial_excited")
                            ? v.number("params.initial_excited")
                            : static_cast<double>(p.n_atoms);
    if (v.has("params.rabi") && v.has("params.omega_bar")) {
        v.fail("params.omega_bar", "give either rabi or omega_bar, not both");
    }
    if (v.has("params.rabi")) {
        p.rabi = v.number("params.rabi");
        if (p.rabi < 0.0) {
            v.fail("params.rabi", "must be >= 0");
        }
    }
    if (v.has("params.omega_bar")) {
        const double ob = v.number("params.omega_bar");
        if (ob < 0.0) {
            v.fail("params.omega_bar", "must be >= 0");
        }
        p.rabi = ob * p.collective_rate1();
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[params]: ") + e.what());
    }

    // geometry
    if (v.has("geometry.coupling")) {
        c.coupling = v.enumerated("geometry.coupling", coupling_from_string);
    }
    if (v.has("geometry.positions")) {
        for (const auto& item : split(v.raw("geometry.positions"), ';')) {
            std::istringstream ps(item);
            std::vector<double> xyz;
            std::string tok;
            while (ps >> tok) {
                xyz.push_back(v.parse_number("geometry.positions", tok));
            }
            if (xyz.size() != 3) {
                v.fail("geometry.positions",
                       "each position needs 3 coordinates, got '" + item + "'");
            }
            c.geometry.positions.emplace_back(xyz[0], xyz[1], xyz[2]);
        }
    }
    if (v.has("geometry.wavenumber1")) {
        c.geometry.wavenumber1 = v.number("geometry.wavenumber1");
    }
    if (v.has("geometry.wavenumber2")) {
        c.geometry.wavenumber2 = v.number("geometry.wavenumber2");
    }
    if (v.has("geometry.initial_levels")) {
        for (double x : v.numbers("geometry.initial_levels")) {
            if (x != 1.0 && x != 2.0 && x != 3.0) {
                v.fail("geometry.initial_levels", "levels must be 1, 2 or 3");
            }
            c.initial_levels.push_back(static_cast<int>(x));
        }
    }
    if (c.coupling == CouplingKind::geometry && c.geometry.positions.empty() &&
        (c.mode == Mode::exact || c.mode == Mode::single_atom)) {
        throw ConfigError("geometry.positions: required when coupling = "
                          "geometry");
    }

    // time
    if (v.has("time.t_end")) {
        c.t_end = v.number("time.t_end");
        if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) {
            v.fail("time.t_end", "must be > 0");
        }
    }
    if (v.has("time.unit")) {
        c.t_unit = v.enumerated("time.unit", [](const std::string& s) {
            return time_unit_from_string(s);
        });
    }
    if (v.has("time.samples")) {
        const auto n = v.integer("time.samples");
        if (n < 2) {
            v.fail("time.samples", "must be >= 2");
        }
        c.samples = static_cast<std::size_t>(n);
    }
    if (v.has("time.spacing")) {
        c.spacing = v.enumerated("time.spacing", [](const std::string& s) {
            if (s == "linear") {
                return GridSpacing::linear;
            }
            if (s == "log") {
                return GridSpacing::logarithmic;
            }
            throw ConfigError("expected linear or log");
        });
    }
    if (v.has("time.log_start_fraction")) {
        c.log_start_fraction = v.number("time.log_start_fraction");
        if (!(c.log_start_fraction > 0.0 && c.log_start_fraction < 1.0)) {
            v.fail("time.log_start_fraction", "must lie in (0, 1)");
        }
    }

    // solver
    for (auto [key, field] :
         {std::pair{"solver.rel", &c.tol.rel}, std::pair{"solver.abs", &c.tol.abs},
          std::pair{"solver.max_step", &c.tol.max_step},
          std::pair{"solver.min_step", &c.tol.min_step},
          std::pair{"solver.seed_epsilon", &c.seed.epsilon}}) {
        if (v.has(key)) {
            *field = v.number(key);
        }
    }
    try {
        c.tol.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[solver]: ") + e.what());
    }
    if (!(c.seed.epsilon >= 0.0)) {
        v.fail("solver.seed_epsilon", "must be >= 0");
    }
    if (v.has("solver.method")) {
        c.method = v.enumerated("solver.method", method_from_string);
    }
    if (v.has("solver.seed")) {
        c.seed.kind = v.enumerated("solver.seed", seed_kind_from_string);
    }
    if (v.has("solver.propagation")) {
        c.propagation =
            v.enumerated("solver.propagation", [](const std::string& s) {
                if (s == "adaptive") {
                    return PropagationMode::adaptive;
                }
                if (s == "propagator") {
                    return PropagationMode::propagator;
                }
                throw ConfigError("expected adaptive or propagator");
            });
    }

    // output
    if (v.has("output.dir")) {
        c.out_dir = v.raw("output.dir");
        if (c.out_dir.empty()) {
            v.fail("output.dir", "must not be empty");
        }
    }
    if (v.has("output.svg")) {
        c.svg = v.boolean("output.svg");
    }
    if (v.has("output.log_time")) {
        c.log_time = v.boolean("output.log_time");
    }

    // sweep
    if (v.has("sweep.omega_bar")) {
        c.sweep_omega_bar = v.numbers("sweep.omega_bar");
        for (double x : c.sweep_omega_bar) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                v.fail("sweep.omega_bar", "values must be >= 0");
            }
        }
        if (c.mode == Mode::sweep && c.sweep_omega_bar.empty()) {
            v.fail("sweep.omega_bar", "needs at least one value");
        }
    }
    if (v.has("sweep.workers")) {
        const auto w = v.integer("sweep.workers");
        if (w < 0) {
            v.fail("sweep.workers", "must be >= 0");
        }
        c.workers = static_cast<unsigned>(w);
    }

    // compare / analyze
    if (v.has("compare.run_a")) {
        c.run_a = v.raw("compare.run_a");
    }
    if (v.has("compare.run_b")) {
        c.run_b = v.raw("compare.run_b");
    }
    if (v.has("compare.columns")) {
        c.compare_columns = split(v.raw("compare.columns"), ',');
        if (c.mode == Mode::compare && c.compare_columns.empty()) {
            v.fail("compare.columns", "needs at least one column");
        }
    }
    if (v.has("compare.tolerance")) {
        c.compare_tolerance = v.number("compare.tolerance");
        if (!(c.compare_tolerance >= 0.0)) {
            v.fail("compare.tolerance", "must be >= 0");
        }
    }
    if (v.has("compare.time_column")) {
        c.time_column = v.raw("compare.time_column");
    }
    if (v.has("analyze.input")) {
        c.input = v.raw("analyze.input");
    }
    return c;
}

std::string emit_config(const RunConfig& c)
{
    std::ostringstream os;
    const auto& p = c.params;
    os << "mode = " << to_string(c.mode) << "\n\n";
    os << "[params]\n"
       << "n_atoms = " << p.n_atoms << "\n"
       << "gamma1 = " << format_number(p.gamma1) << "\n"
       << "gamma2 = " << format_number(p.gamma2) << "\n"
       << "mu1 = " << format_number(p.mu1) << "\n"
       << "mu2 = " << format_number(p.mu2) << "\n"
       << "rabi = " << format_number(p.rabi) << "\n"
       << "initial_excited = " << format_number(p.initial_excited) << "\n\n";

    os << "[geometry]\n"
       << "coupling = " << to_string(c.coupling) << "\n"
       << "positions = ";
    for (std::size_t i = 0; i < c.geometry.positions.size(); ++i) {
        const auto& r = c.geometry.positions[i];
        os << (i ? "; " : "") << format_number(r.x()) << " "
           << format_number(r.y()) << " " << format_number(r.z());
    }
    os << "\n"
       << "wavenumber1 = " << format_number(c.geometry.wavenumber1) << "\n"
       << "wavenumber2 = " << format_number(c.geometry.wavenumber2) << "\n"
       << "initial_levels = ";
    for (std::size_t i = 0; i < c.initial_levels.size(); ++i) {
        os << (i ? ", " : "") << c.initial_levels[i];
    }
    os << "\n\n";

    os << "[time]\n"
       << "t_end = " << format_number(c.t_end) << "\n"
       << "unit = " << to_string(c.t_unit) << "\n"
       << "samples = " << c.samples << "\n"
       << "spacing = "
       << (c.spacing == GridSpacing::linear ? "linear" : "log") << "\n"
       << "log_start_fraction = " << format_number(c.log_start_fraction)
       << "\n\n";

    os << "[solver]\n"
       << "rel = " << format_number(c.tol.rel) << "\n"
       << "abs = " << format_number(c.tol.abs) << "\n"
       << "max_step = " << format_number(c.tol.max_step) << "\n"
       << "min_step = " << format_number(c.tol.min_step) << "\n"
       << "method = " << to_string(c.method) << "\n"
       << "seed = " << to_string(c.seed.kind) << "\n"
       << "seed_epsilon = " << format_number(c.seed.epsilon) << "\n"
       << "propagation = "
       << (c.propagation == PropagationMode::adaptive ? "adaptive"
                                                      : "propagator")
       << "\n\n";

    os << "[output]\n"
       << "dir = " << c.out_dir << "\n"
       << "svg = " << (c.svg ? "true" : "false") << "\n"
       << "log_time = " << (c.log_time ? "true" : "false") << "\n\n";

    os << "[sweep]\n"
       << "omega_bar = " << join_numbers(c.sweep_omega_bar) << "\n"
       << "workers = " << c.workers << "\n\n";

    os << "[compare]\n"
       << "run_a = " << c.run_a << "\n"
       << "run_b = " << c.run_b << "\n"
       << "columns = ";
    for (std::size_t i = 0; i < c.compare_columns.size(); ++i) {
        os << (i ? ", " : "") << c.compare_columns[i];
    }
    os << "\n"
       << "tolerance = " << format_number(c.compare_tolerance) << "\n"
       << "time_column = " << c.time_column << "\n\n";

    os << "[analyze]\n"
       << "input = " << c.input << "\n";
    return os.str();
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

EnvLookup process_environment()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) {
            return std::string(v);
        }
        return std::nullopt;
    };
}

} // namespace superlambda
