#include "superlambda/serialize.hpp"

#include <cmath>
#include <limits>

namespace superlambda {

namespace {

nlohmann::json number(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

double read_number(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (v.is_null()) {
        return std::numeric_limits<double>::infinity();
    }
    return v.get<double>();
}

} // namespace

void to_json(nlohmann::json& j, const SystemParams& p)
{
    j = {{"n_atoms", p.n_atoms}, {"gamma1", p.gamma1}, {"gamma2", p.gamma2},
         {"mu1", p.mu1},         {"mu2", p.mu2},       {"rabi", p.rabi},
         {"initial_excited", p.initial_excited}};
}

void from_json(const nlohmann::json& j, SystemParams& p)
{
    p.n_atoms = j.at("n_atoms").get<std::int64_t>();
    p.gamma1 = j.at("gamma1").get<double>();
    p.gamma2 = j.at("gamma2").get<double>();
    p.mu1 = j.at("mu1").get<double>();
    p.mu2 = j.at("mu2").get<double>();
    p.rabi = j.at("rabi").get<double>();
    p.initial_excited = j.at("initial_excited").get<double>();
}

void to_json(nlohmann::json& j, const ScaledParams& s)
{
    j = {{"r_gamma", s.r_gamma},
         {"r_mu", s.r_mu},
         {"omega_bar", s.omega_bar},
         {"t_fast", number(s.t_fast)},
         {"t_slow", number(s.t_slow)}};
}

void to_json(nlohmann::json& j, const Tolerances& t)
{
    j = {{"rel", t.rel},
         {"abs", t.abs},
         {"max_step", number(t.max_step)},
         {"min_step", t.min_step}};
}

void from_json(const nlohmann::json& j, Tolerances& t)
{
    t.rel = j.at("rel").get<double>();
    t.abs = j.at("abs").get<double>();
    t.max_step = read_number(j, "max_step");
    t.min_step = j.at("min_step").get<double>();
}

void to_json(nlohmann::json& j, const SeedPolicy& s)
{
    j = {{"kind", to_string(s.kind)}, {"epsilon", s.epsilon}};
}

void from_json(const nlohmann::json& j, SeedPolicy& s)
{
    s.kind = seed_kind_from_string(j.at("kind").get<std::string>());
    s.epsilon = j.at("epsilon").get<double>();
}

void to_json(nlohmann::json& j, const SolverStats& s)
{
    j = {{"accepted", s.accepted},
         {"rejected", s.rejected},
         {"rhs_evals", s.rhs_evals},
         {"jacobian_evals", s.jacobian_evals},
         {"factorizations", s.factorizations},
         {"stiff_engaged", s.stiff_engaged},
         {"stiff_engaged_at", number(s.stiff_engaged_at)}};
}

std::string to_string(Method method)
{
    switch (method) {
    case Method::explicit_rk: return "explicit";
    case Method::stiff: return "stiff";
    case Method::automatic: return "auto";
    }
    return "unknown";
}

Method method_from_string(const std::string& name)
{
    if (name == "explicit") {
        return Method::explicit_rk;
    }
    if (name == "stiff") {
        return Method::stiff;
    }
    if (name == "auto") {
        return Method::automatic;
    }
    throw ConfigError("unknown method '" + name +
                      "' (expected explicit, stiff or auto)");
}

} // namespace superlambda
