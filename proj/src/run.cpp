#include "superlambda/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

#include "superlambda/io.hpp"
#include "superlambda/plot.hpp"
#include "superlambda/serialize.hpp"

#ifndef SUPERLAMBDA_VERSION
#define SUPERLAMBDA_VERSION "0.0.0"
#endif

namespace superlambda {

namespace fs = std::filesystem;

std::string engine_version() { return SUPERLAMBDA_VERSION; }

namespace {

std::string utc_now()
{
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json optional_number(const std::optional<double>& x)
{
    return x && std::isfinite(*x) ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

/// Writes bytes under dir and records the checksum.
struct ArtifactWriter
{
    explicit ArtifactWriter(fs::path d) : dir(std::move(d)) {}

    fs::path dir;
    nlohmann::json checksums = nlohmann::json::object();
    std::vector<std::string> paths;

    void write(const std::string& name, const std::string& bytes)
    {
        const fs::path p = dir / name;
        write_file(p.string(), bytes);
        checksums[name] = sha256_hex(bytes);
        paths.push_back(p.string());
    }
};

nlohmann::json base_manifest(const RunConfig& config, const std::string& started)
{
    nlohmann::json m;
    m["engine"] = "superlambda";
    m["version"] = engine_version();
    m["mode"] = to_string(config.mode);
    m["config_text"] = emit_config(config);
    m["started_utc"] = started;
    return m;
}

std::vector<double> grid_in(double t_end, const RunConfig& c)
{
    std::vector<double> grid(c.samples);
    const double last = static_cast<double>(c.samples - 1);
    if (c.spacing == GridSpacing::linear) {
        for (std::size_t i = 0; i < c.samples; ++i) {
            grid[i] = t_end * static_cast<double>(i) / last;
        }
        return grid;
    }
    const double lo = std::log(t_end * c.log_start_fraction);
    const double hi = std::log(t_end);
    grid[0] = 0.0;
    for (std::size_t i = 1; i < c.samples; ++i) {
        const double f =
            c.samples == 2 ? 1.0 : static_cast<double>(i - 1) / (last - 1.0);
        grid[i] = std::exp(lo + f * (hi - lo));
    }
    grid.back() = t_end;
    return grid;
}

/// Single trajectory run: CSV, plots, metrics, manifest.
RunResult write_single(const RunConfig& config, const fs::path& dir)
{
    const std::string started = utc_now();
    const Trajectory traj = run_trajectory(config);
    ArtifactWriter out(dir);
    out.write("trajectory.csv", trajectory_csv(traj));
    if (config.mode == Mode::single_atom) {
        const auto grid = exact_grid(config);
        const Trajectory analytic = analytic_single_atom(config.params, grid);
        std::string csv;
        const std::vector<std::string> names = {
            "t_scaled_slow", "t_scaled_fast", "p1_over_N", "p2_over_N",
            "p3_over_N"};
        for (std::size_t c = 0; c < names.size(); ++c) {
            csv += (c ? "," : "") + names[c];
        }
        csv += '\n';
        for (Eigen::Index i = 0; i < analytic.size(); ++i) {
            for (std::size_t c = 0; c < names.size(); ++c) {
                csv += (c ? "," : "") + format_g17(analytic.column(names[c])[i]);
            }
            csv += '\n';
        }
        out.write("analytic.csv", csv);
    }
    if (config.svg) {
        out.write("populations.svg", populations_svg(traj, config.log_time));
        out.write("intensities.svg", intensities_svg(traj, config.log_time));
    }
    std::ostringstream report;
    if (config.mode != Mode::single_atom) {
        const auto metrics = pulse_metrics(traj);
        const auto mj = metrics_json(metrics, traj);
        out.write("metrics.json", mj.dump(2) + "\n");
        report << "I1 peak " << mj["i1_peak"] << ", I2 peak " << mj["i2_peak"]
               << ", I1 peak count " << metrics.i1_peak_count << "\n";
    }

    nlohmann::json m = base_manifest(config, started);
    m["scaled"] = nondimensionalize(config.params);
    m["trajectory"] = traj.metadata();
    m["artifacts"] = out.checksums;
    m["finished_utc"] = utc_now();
    out.write("manifest.json", m.dump(2) + "\n");

    RunResult r;
    r.artifacts = out.paths;
    r.manifest = std::move(m);
    report << "wrote " << out.paths.size() << " files to " << dir.string()
           << "\n";
    r.report = report.str();
    return r;
}

std::string summary_value(const nlohmann::json& j)
{
    if (j.is_null()) {
        return "nan";
    }
    if (j.is_boolean()) {
        return j.get<bool>() ? "1" : "0";
    }
    return format_g17(j.get<double>());
}

RunResult run_sweep(const RunConfig& config)
{
    const std::string started = utc_now();
    const fs::path root(config.out_dir);
    const auto& values = config.sweep_omega_bar;
    std::vector<RunConfig> points;
    for (std::size_t k = 0; k < values.size(); ++k) {
        RunConfig c = config;
        c.mode = Mode::meanfield;
        c.params.rabi = values[k] * config.params.collective_rate1();
        char name[64];
        std::snprintf(name, sizeof name, "point_%02zu", k);
        c.out_dir = (root / name).string();
        points.push_back(std::move(c));
    }

    unsigned workers = config.workers ? config.workers
                                      : std::max(1u, std::thread::hardware_concurrency());
    std::vector<nlohmann::json> metrics(points.size());
    std::vector<RunResult> results(points.size());
    for (std::size_t first = 0; first < points.size(); first += workers) {
        const std::size_t last = std::min(points.size(), first + workers);
        std::vector<std::future<void>> batch;
        for (std::size_t k = first; k < last; ++k) {
            batch.push_back(std::async(std::launch::async, [&, k] {
                results[k] = write_single(points[k], points[k].out_dir);
                metrics[k] = nlohmann::json::parse(
                    read_text_file((fs::path(points[k].out_dir) / "metrics.json")
                                       .string()));
            }));
        }
        // Drain the whole batch before surfacing the first failure.
        std::exception_ptr failure;
        for (auto& f : batch) {
            try {
                f.get();
            } catch (...) {
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    const std::vector<std::string> keys = {
        "i1_peak",          "i1_peak_time",      "i2_peak",
        "i2_peak_time",     "i1_peak_count",     "p2_minus_p3_at_i2_peak",
        "p1_at_i2_peak",    "i1_at_i2_peak",     "plateau_start",
        "plateau_end",      "plateau_near_i2_peak", "i1_energy",
        "i2_energy"};
    std::string csv = "omega_bar";
    for (const auto& k : keys) {
        csv += "," + k;
    }
    csv += '\n';
    for (std::size_t k = 0; k < points.size(); ++k) {
        csv += format_g17(values[k]);
        for (const auto& key : keys) {
            csv += "," + summary_value(metrics[k][key]);
        }
        csv += '\n';
    }
    ArtifactWriter out(root);
    out.write("summary.csv", csv);

    nlohmann::json m = base_manifest(config, started);
    m["scaled"] = nondimensionalize(config.params);
    m["points"] = nlohmann::json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
        m["points"].push_back({{"omega_bar", values[k]},
                               {"dir", fs::path(points[k].out_dir).filename().string()},
                               {"artifacts", results[k].manifest["artifacts"]}});
    }
    m["artifacts"] = out.checksums;
    m["finished_utc"] = utc_now();
    out.write("manifest.json", m.dump(2) + "\n");

    RunResult r;
    for (const auto& pr : results) {
        r.artifacts.insert(r.artifacts.end(), pr.artifacts.begin(),
                           pr.artifacts.end());
    }
    r.artifacts.insert(r.artifacts.end(), out.paths.begin(), out.paths.end());
    r.manifest = std::move(m);
    r.report = "sweep of " + std::to_string(points.size()) + " points written to " +
               root.string() + "\n";
    return r;
}

Trajectory load_run(const std::string& path, const std::string& time_column)
{
    fs::path p(path);
    if (fs::is_directory(p)) {
        p /= "trajectory.csv";
    }
    Trajectory traj = read_trajectory_csv(read_text_file(p.string()), time_column);
    const fs::path manifest = p.parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
        const auto m = nlohmann::json::parse(read_text_file(manifest.string()));
        if (m.contains("trajectory")) {
            traj.metadata() = m["trajectory"];
        }
    }
    return traj;
}

RunResult run_analyze(const RunConfig& config)
{
    const std::string started = utc_now();
    const Trajectory traj = load_run(config.input, config.time_column);
    ArtifactWriter out(fs::path(config.out_dir));
    const auto metrics = pulse_metrics(traj);
    const auto mj = metrics_json(metrics, traj);
    out.write("metrics.json", mj.dump(2) + "\n");

    std::ostringstream report;
    report << "I1 peak " << mj["i1_peak"] << " at " << mj["i1_peak_time"]
           << ", I2 peak " << mj["i2_peak"] << " at " << mj["i2_peak_time"]
           << ", I1 peak count " << metrics.i1_peak_count << "\n";
    try {
        const auto diag = inversion_slope_diagnostic(traj);
        nlohmann::json dj;
        dj["max_deviation"] = diag.max_deviation;
        dj["correlation"] = optional_number(diag.correlation);
        out.write("inversion_slope.json", dj.dump(2) + "\n");
        report << "inversion slope correlation " << dj["correlation"] << "\n";
    } catch (const ConfigError& e) {
        report << "inversion slope diagnostic not applicable: " << e.what()
               << "\n";
    }
    nlohmann::json m = base_manifest(config, started);
    m["input_sha256"] = sha256_hex(read_text_file(
        fs::is_directory(config.input)
            ? (fs::path(config.input) / "trajectory.csv").string()
            : config.input));
    m["artifacts"] = out.checksums;
    m["finished_utc"] = utc_now();
    out.write("manifest.json", m.dump(2) + "\n");

    RunResult r;
    r.artifacts = out.paths;
    r.manifest = std::move(m);
    r.report = report.str();
    return r;
}

RunResult run_compare(const RunConfig& config)
{
    const std::string started = utc_now();
    const Trajectory a = load_run(config.run_a, config.time_column);
    const Trajectory b = load_run(config.run_b, config.time_column);
    const CompareReport rep =
        compare(a, b, config.compare_columns, config.compare_tolerance);
    ArtifactWriter out(fs::path(config.out_dir));
    out.write("compare.json", rep.to_json().dump(2) + "\n");
    nlohmann::json m = base_manifest(config, started);
    m["artifacts"] = out.checksums;
    m["finished_utc"] = utc_now();
    out.write("manifest.json", m.dump(2) + "\n");

    std::ostringstream report;
    for (const auto& c : rep.columns) {
        report << c.column << ": max " << format_g17(c.max_abs) << ", rms "
               << format_g17(c.rms) << (c.pass ? "  ok" : "  FAIL") << "\n";
    }
    report << (rep.pass ? "comparison passed" : "comparison failed")
           << " (tolerance " << format_g17(rep.tolerance) << ")\n";
    RunResult r;
    r.exit_code = rep.pass ? 0 : exit_code(ErrorKind::comparison);
    r.artifacts = out.paths;
    r.manifest = std::move(m);
    r.report = report.str();
    return r;
}

} // namespace

std::vector<double> exact_grid(const RunConfig& config)
{
    const ScaledParams s = nondimensionalize(config.params);
    double t_end = config.t_end;
    switch (config.t_unit) {
    case TimeUnit::physical: break;
    case TimeUnit::fast_scaled: t_end *= s.t_fast; break;
    case TimeUnit::slow_scaled:
        if (!std::isfinite(s.t_slow)) {
            throw ConfigError("slow-scaled time is undefined for gamma2 = 0");
        }
        t_end *= s.t_slow;
        break;
    }
    return grid_in(t_end, config);
}

DensityMatrix exact_initial_state(const RunConfig& config)
{
    const auto n = config.params.n_atoms;
    if (n > kMaxExactAtoms) {
        throw CapacityError("exact solver is limited to N <= " +
                            std::to_string(kMaxExactAtoms) + " (got N = " +
                            std::to_string(n) + ")");
    }
    std::vector<int> levels = config.initial_levels;
    if (levels.empty()) {
        const double k = config.params.initial_excited;
        if (std::floor(k) != k) {
            throw ConfigError("exact runs need an integer initial_excited or "
                              "explicit initial_levels");
        }
        for (std::int64_t j = 0; j < n; ++j) {
            levels.push_back(static_cast<double>(j) < k ? 3 : 1);
        }
    }
    if (static_cast<std::int64_t>(levels.size()) != n) {
        throw ConfigError("initial_levels has " + std::to_string(levels.size()) +
                          " entries but n_atoms = " + std::to_string(n));
    }
    return DensityMatrix::product_levels(levels);
}

CouplingSet make_couplings(const RunConfig& config)
{
    switch (config.coupling) {
    case CouplingKind::dicke: return CouplingSet::dicke(config.params);
    case CouplingKind::independent: return CouplingSet::independent(config.params);
    case CouplingKind::geometry:
        return CouplingSet::from_geometry(config.params, config.geometry);
    }
    throw ConfigError("unknown coupling");
}

Trajectory run_trajectory(const RunConfig& config)
{
    switch (config.mode) {
    case Mode::meanfield: {
        SimulationOptions opt;
        opt.seed = config.seed;
        opt.samples = config.samples;
        opt.spacing = config.spacing;
        opt.log_start_fraction = config.log_start_fraction;
        opt.method = config.method;
        opt.t_end_unit = config.t_unit;
        return simulate(config.params, config.t_end, config.tol, opt);
    }
    case Mode::exact:
    case Mode::single_atom: {
        if (config.params.n_atoms > kMaxExactAtoms) {
            throw CapacityError("exact solver is limited to N <= " +
                                std::to_string(kMaxExactAtoms) + " (got N = " +
                                std::to_string(config.params.n_atoms) + ")");
        }
        EvolveOptions opt;
        opt.tol = config.tol;
        opt.mode = config.propagation;
        const auto grid = exact_grid(config);
        return exact_trajectory(config.params, make_couplings(config),
                                exact_initial_state(config), grid, opt);
    }
    default:
        throw ConfigError("mode " + to_string(config.mode) +
                          " does not produce a single trajectory");
    }
}

Trajectory analytic_single_atom(const SystemParams& params,
                                std::span<const double> grid)
{
    params.validate();
    if (params.n_atoms != 1) {
        throw ConfigError("analytic_single_atom needs n_atoms = 1");
    }
    const ScaledParams s = nondimensionalize(params);
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(grid.data(), m);
    Trajectory traj(t, TimeUnit::physical);
    Eigen::VectorXd p1(m), p2(m), p3(m);
    const double g = params.gamma1 + params.gamma2;
    const double s0 = params.initial_excited;
    for (Eigen::Index i = 0; i < m; ++i) {
        p3[i] = single_atom_decay(t[i], params.gamma1, params.gamma2, s0);
        const double decayed = s0 - p3[i];
        p1[i] = (1.0 - s0) + decayed * params.gamma1 / g;
        p2[i] = decayed * params.gamma2 / g;
    }
    traj.add_column("t_scaled_slow", std::isfinite(s.t_slow)
                                         ? Eigen::VectorXd(t / s.t_slow)
                                         : Eigen::VectorXd::Zero(m));
    traj.add_column("t_scaled_fast", t / s.t_fast);
    traj.add_column("p3_over_N", p3);
    if (params.rabi == 0.0) {
        traj.add_column("p1_over_N", p1);
        traj.add_column("p2_over_N", p2);
    } else {
        // Drive mixes the lower doublet; only p3 has a closed form here.
        traj.add_column("p1_over_N",
                        Eigen::VectorXd::Constant(
                            m, std::numeric_limits<double>::quiet_NaN()));
        traj.add_column("p2_over_N",
                        Eigen::VectorXd::Constant(
                            m, std::numeric_limits<double>::quiet_NaN()));
    }
    traj.metadata()["engine"] = "analytic-single-atom";
    traj.metadata()["params"] = params;
    return traj;
}

nlohmann::json metrics_json(const PulseMetrics& m, const Trajectory& traj)
{
    nlohmann::json j;
    auto peak = [&](const std::optional<Peak>& p, const char* value,
                    const char* time) {
        j[value] = p ? nlohmann::json(p->value) : nlohmann::json(nullptr);
        j[time] = p ? nlohmann::json(p->time) : nlohmann::json(nullptr);
    };
    peak(m.i1_peak, "i1_peak", "i1_peak_time");
    peak(m.i2_peak, "i2_peak", "i2_peak_time");
    j["time_unit"] = std::string(to_string(traj.unit()));
    j["i1_peak_count"] = m.i1_peak_count;
    j["i2_peak_count"] = m.i2_peaks.size();
    j["i1_peaks"] = nlohmann::json::array();
    for (const auto& p : m.i1_peaks) {
        j["i1_peaks"].push_back(
            {{"time", p.time}, {"value", p.value}, {"prominence", p.prominence}});
    }
    const bool has_i2 = m.i2_peak.has_value();
    j["p2_minus_p3_at_i2_peak"] =
        has_i2 ? nlohmann::json(m.p2_minus_p3_at_i2_peak) : nlohmann::json(nullptr);
    j["p1_at_i2_peak"] =
        has_i2 ? nlohmann::json(m.p1_at_i2_peak) : nlohmann::json(nullptr);
    j["i1_at_i2_peak"] =
        has_i2 ? nlohmann::json(m.i1_at_i2_peak) : nlohmann::json(nullptr);
    j["plateau_start"] = m.p3_plateau ? nlohmann::json(m.p3_plateau->start)
                                      : nlohmann::json(nullptr);
    j["plateau_end"] = m.p3_plateau ? nlohmann::json(m.p3_plateau->end)
                                    : nlohmann::json(nullptr);
    j["plateau_near_i2_peak"] = m.plateau_near_i2_peak;
    j["i1_energy"] = m.i1_energy;
    j["i2_energy"] = m.i2_energy;

    if (has_i2 && traj.has_column("d_mm")) {
        const auto k = static_cast<Eigen::Index>(m.i2_peak->index);
        DressedDecomposition dd{traj.column("d_mm")[k], traj.column("d_pp")[k],
                                {traj.column("re_cross")[k],
                                 traj.column("im_cross")[k]}};
        for (int ch : {1, 2}) {
            const auto f = interference_fraction(dd, ch);
            const std::string key = "interference_channel" + std::to_string(ch) +
                                    "_at_i2_peak";
            j[key] = f ? nlohmann::json{{"fraction", f->fraction},
                                        {"constructive", f->constructive}}
                       : nlohmann::json(nullptr);
        }
    }
    const auto& meta = traj.metadata();
    if (has_i2 && meta.contains("params")) {
        // Dimensional peak mu2 gamma2 q22 in units of gamma2 N.
        const SystemParams p = meta["params"].get<SystemParams>();
        j["i2_peak_in_gamma2_N"] =
            p.mu2 * static_cast<double>(p.n_atoms) * m.i2_peak->value;
    }
    return j;
}

nlohmann::json CompareReport::to_json() const
{
    nlohmann::json j;
    j["tolerance"] = tolerance;
    j["overlap"] = {overlap_start, overlap_end};
    j["samples"] = samples;
    j["pass"] = pass;
    j["columns"] = nlohmann::json::array();
    for (const auto& c : columns) {
        j["columns"].push_back({{"column", c.column},
                                {"max_abs", c.max_abs},
                                {"rms", c.rms},
                                {"pass", c.pass}});
    }
    return j;
}

CompareReport compare(const Trajectory& a, const Trajectory& b,
                      const std::vector<std::string>& columns, double tolerance)
{
    if (a.size() == 0 || b.size() == 0) {
        throw ConfigError("compare: empty trajectory");
    }
    const auto& ta = a.times();
    const auto& tb = b.times();
    CompareReport rep;
    rep.tolerance = tolerance;
    rep.overlap_start = std::max(ta[0], tb[0]);
    rep.overlap_end = std::min(ta[ta.size() - 1], tb[tb.size() - 1]);
    if (!(rep.overlap_start <= rep.overlap_end)) {
        throw ConfigError("compare: disjoint time grids");
    }
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < ta.size(); ++i) {
        if (ta[i] >= rep.overlap_start && ta[i] <= rep.overlap_end) {
            idx.push_back(i);
        }
    }
    if (idx.empty()) {
        throw ConfigError("compare: no samples of the first run fall in the "
                          "common time range");
    }
    rep.samples = idx.size();
    for (const auto& name : columns) {
        const Eigen::VectorXd& ya = a.column(name);
        const Eigen::VectorXd& yb = b.column(name);
        ColumnDeviation d;
        d.column = name;
        double sq = 0.0;
        Eigen::Index j = 0;
        for (Eigen::Index i : idx) {
            const double t = ta[i];
            while (j + 1 < tb.size() && tb[j + 1] < t) {
                ++j;
            }
            double vb;
            if (tb[j] == t || j + 1 >= tb.size()) {
                vb = yb[j];
            } else if (tb[j + 1] == t) {
                vb = yb[j + 1];
            } else {
                const double w = (t - tb[j]) / (tb[j + 1] - tb[j]);
                vb = (1.0 - w) * yb[j] + w * yb[j + 1];
            }
            const double e = std::abs(ya[i] - vb);
            d.max_abs = std::max(d.max_abs, std::isnan(e) ? INFINITY : e);
            sq += e * e;
        }
        d.rms = std::sqrt(sq / static_cast<double>(idx.size()));
        d.pass = d.max_abs <= tolerance;
        rep.pass = rep.pass && d.pass;
        rep.columns.push_back(d);
    }
    return rep;
}

RunResult run(const RunConfig& config)
{
    switch (config.mode) {
    case Mode::meanfield:
    case Mode::exact:
    case Mode::single_atom: return write_single(config, fs::path(config.out_dir));
    case Mode::sweep: return run_sweep(config);
    case Mode::analyze: return run_analyze(config);
    case Mode::compare: return run_compare(config);
    }
    throw ConfigError("unknown mode");
}

RunConfig config_from_manifest(const nlohmann::json& manifest)
{
    if (!manifest.contains("config_text")) {
        throw ConfigError("manifest has no config_text");
    }
    return parse_config(manifest["config_text"].get<std::string>());
}

} // namespace superlambda
