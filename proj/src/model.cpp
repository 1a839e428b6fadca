#include "superlambda/model.hpp"

#include <limits>
#include <sstream>
#include <string>

namespace superlambda {

namespace {

void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ConfigError(message);
    }
}

} // namespace

void SystemParams::validate() const
{
    require(n_atoms >= 1, "n_atoms must be >= 1");
    require(gamma1 > 0.0 && std::isfinite(gamma1), "gamma1 must be > 0");
    // gamma2 = 0 is admitted: it is the decoupled-channel limit.
    require(gamma2 >= 0.0 && std::isfinite(gamma2), "gamma2 must be >= 0");
    require(mu1 > 0.0 && mu1 <= 1.0, "mu1 must lie in (0, 1]");
    require(mu2 > 0.0 && mu2 <= 1.0, "mu2 must lie in (0, 1]");
    require(std::isfinite(rabi), "rabi must be finite");
    require(initial_excited >= 0.0 &&
                initial_excited <= static_cast<double>(n_atoms),
            "initial_excited must lie in [0, n_atoms]");
}

ScaledParams nondimensionalize(const SystemParams& params)
{
    params.validate();
    const double n = static_cast<double>(params.n_atoms);
    ScaledParams s;
    s.r_gamma = params.gamma2 / params.gamma1;
    s.r_mu = params.mu2 / params.mu1;
    s.omega_bar = params.rabi / (params.mu1 * params.gamma1 * n);
    s.t_fast = 1.0 / (params.mu1 * params.gamma1 * n);
    s.t_slow = params.gamma2 > 0.0
                   ? 1.0 / (params.mu2 * params.gamma2 * n)
                   : std::numeric_limits<double>::infinity();
    return s;
}

SystemParams denormalize(const ScaledParams& scaled, double gamma1,
                         std::int64_t n_atoms, double initial_excited)
{
    const double n = static_cast<double>(n_atoms);
    SystemParams p;
    p.n_atoms = n_atoms;
    p.gamma1 = gamma1;
    p.gamma2 = scaled.r_gamma * gamma1;
    p.mu1 = 1.0 / (scaled.t_fast * gamma1 * n);
    p.mu2 = scaled.r_mu * p.mu1;
    p.rabi = scaled.omega_bar * p.mu1 * gamma1 * n;
    p.initial_excited = initial_excited;
    p.validate();
    return p;
}

void Geometry::validate() const
{
    require(wavenumber1 > 0.0 && wavenumber2 > 0.0,
            "wavenumbers must be > 0");
    for (std::size_t j = 0; j < positions.size(); ++j) {
        for (std::size_t l = j + 1; l < positions.size(); ++l) {
            if ((positions[j] - positions[l]).norm() <= 0.0) {
                std::ostringstream os;
                os << "zero separation between emitters " << j << " and "
                   << l;
                throw ConfigError(os.str());
            }
        }
    }
}

double Geometry::wavenumber(int channel) const
{
    require(channel == 1 || channel == 2, "channel must be 1 or 2");
    return channel == 1 ? wavenumber1 : wavenumber2;
}

Eigen::MatrixXcd coupling_matrix(const Geometry& geom, int channel,
                                 double gamma)
{
    geom.validate();
    const double k = geom.wavenumber(channel);
    const auto n = static_cast<Eigen::Index>(geom.positions.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        m(j, j) = gamma;
        for (Eigen::Index l = j + 1; l < n; ++l) {
            const double r = (geom.positions[j] - geom.positions[l]).norm();
            const auto pc = pairwise_coupling(k * r);
            m(j, l) = gamma * std::complex<double>(pc.aleph, pc.lamb);
            m(l, j) = m(j, l);
        }
    }
    return m;
}

Eigen::MatrixXcd dicke_coupling_matrix(std::int64_t n_atoms, double gamma)
{
    require(n_atoms >= 1, "n_atoms must be >= 1");
    return Eigen::MatrixXcd::Constant(n_atoms, n_atoms, gamma);
}

CouplingSet CouplingSet::dicke(const SystemParams& params)
{
    params.validate();
    return {dicke_coupling_matrix(params.n_atoms, params.gamma1),
            dicke_coupling_matrix(params.n_atoms, params.gamma2)};
}

CouplingSet CouplingSet::from_geometry(const SystemParams& params,
                                       const Geometry& geom)
{
    params.validate();
    if (static_cast<std::int64_t>(geom.positions.size()) != params.n_atoms) {
        throw ConfigError("geometry has " +
                          std::to_string(geom.positions.size()) +
                          " positions but n_atoms = " +
                          std::to_string(params.n_atoms));
    }
    return {coupling_matrix(geom, 1, params.gamma1),
            coupling_matrix(geom, 2, params.gamma2)};
}

CouplingSet CouplingSet::independent(const SystemParams& params)
{
    params.validate();
    const auto n = static_cast<Eigen::Index>(params.n_atoms);
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(n, n);
    c1.diagonal().setConstant(params.gamma1);
    c2.diagonal().setConstant(params.gamma2);
    return {c1, c2};
}

} // namespace superlambda
