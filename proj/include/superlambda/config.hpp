#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "superlambda/exact.hpp"
#include "superlambda/integrator.hpp"
#include "superlambda/meanfield.hpp"
#include "superlambda/model.hpp"
#include "superlambda/trajectory.hpp"

namespace superlambda {

enum class Mode { meanfield, exact, single_atom, sweep, analyze, compare };
enum class CouplingKind { dicke, independent, geometry };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
std::string to_string(CouplingKind kind);
CouplingKind coupling_from_string(const std::string& name);

/// Everything a run needs. Produced by parse_config, echoed by emit_config.
struct RunConfig
{
    Mode mode = Mode::meanfield;
    SystemParams params{};

    CouplingKind coupling = CouplingKind::dicke;
    Geometry geometry{};
    /// Exact runs: per-atom starting levels; empty means the first
    /// initial_excited atoms in |3> and the rest in |1>.
    std::vector<int> initial_levels;

    double t_end = 1.0;
    TimeUnit t_unit = TimeUnit::slow_scaled;
    std::size_t samples = 2001;
    GridSpacing spacing = GridSpacing::linear;
    double log_start_fraction = 1e-4;

    Tolerances tol{};
    Method method = Method::automatic;
    SeedPolicy seed{};
    PropagationMode propagation = PropagationMode::adaptive;

    std::string out_dir = "out";
    bool svg = true;
    bool log_time = false;

    std::vector<double> sweep_omega_bar;
    unsigned workers = 0; ///< 0: hardware concurrency

    std::string run_a;
    std::string run_b;
    std::vector<std::string> compare_columns;
    double compare_tolerance = 1e-8;
    std::string time_column = "t_scaled_fast";

    std::string input;

    bool operator==(const RunConfig& other) const;
};

/// Environment lookup for overrides: SUPERLAMBDA_<SECTION>_<KEY>, upper
/// case, e.g. SUPERLAMBDA_SOLVER_REL. Top-level keys use SUPERLAMBDA_<KEY>.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

constexpr const char* kEnvPrefix = "SUPERLAMBDA_";

/// Command-line values keyed "section.key" ("mode" at top level).
using Overrides = std::map<std::string, std::string>;

/// Strict INI-style parser. Unknown sections or keys, malformed values and
/// duplicate keys are errors naming the line; missing required keys are
/// all reported at once. Precedence: overrides, then environment, then
/// text. Throws ConfigError.
RunConfig parse_config(const std::string& text, const EnvLookup& env = {},
                       const Overrides& overrides = {});

/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

/// Reads a whole file, ConfigError when unreadable.
std::string read_text_file(const std::string& path);

/// Environment lookup backed by getenv.
EnvLookup process_environment();

} // namespace superlambda
