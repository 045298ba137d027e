#include "airguard/rf.hpp"

#include <cmath>
#include <random>

#include "airguard/errors.hpp"

namespace airguard {

double dbm_to_mw(double dbm)
{
    return std::pow(10.0, dbm / 10.0);
}

double mw_to_dbm(double mw)
{
    if (mw <= 0) throw DomainError("power must be positive to convert to dBm");
    return 10.0 * std::log10(mw);
}

void RfParams::validate() const
{
    if (d0_m <= 0) throw ValidationError("d0", "reference distance must be positive");
    if (alpha <= 0) throw ValidationError("alpha", "path loss exponent must be positive");
    if (!std::isfinite(gamma_sir_db)) throw ValidationError("gamma_sir_db", "must be finite");
    if (shadowing_sigma_db < 0) throw ValidationError("shadowing_sigma_db", "must be >= 0");
}

double path_loss_db(double d_m, const RfParams& params)
{
    if (d_m <= 0) throw DomainError("path loss undefined for non-positive distance");
    return params.pl_d0_db + 10.0 * params.alpha * std::log10(d_m / params.d0_m);
}

double received_power_dbm(double ptx_dbm, double d_m, const RfParams& params)
{
    return ptx_dbm - path_loss_db(d_m, params);
}

bool detects(double ptx_dbm, double d_m, double sensitivity_dbm, const RfParams& params)
{
    return received_power_dbm(ptx_dbm, d_m, params) >= sensitivity_dbm;
}

bool destroys(double pa_dbm, double d_av_m, double pg_dbm, double d_gv_m,
              const RfParams& params)
{
    double sir_db = received_power_dbm(pa_dbm, d_av_m, params) -
                    received_power_dbm(pg_dbm, d_gv_m, params);
    return sir_db < params.gamma_eff_db();
}

void SensitivityBudget::validate() const
{
    if (noise_figure_db < 0) throw ValidationError("noise_figure_db", "must be >= 0");
}

double sensitivity_dbm(const SensitivityBudget& budget)
{
    budget.validate();
    return budget.thermal_noise_dbm + budget.noise_figure_db + budget.snr_min_db;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view s)
{
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

double shadowing_db(std::uint64_t seed, std::string_view node_a, std::string_view node_b,
                    double sigma_db)
{
    if (sigma_db < 0) throw DomainError("shadowing sigma must be >= 0");
    if (sigma_db == 0) return 0.0;

    if (node_b < node_a) std::swap(node_a, node_b);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = fnv1a(h, node_a);
    h = fnv1a(h, "|");
    h = fnv1a(h, node_b);
    std::mt19937_64 rng(seed ^ h);

    // Box-Muller on explicit uniforms; std::normal_distribution is not
    // pinned across standard library implementations.
    auto uniform = [&rng] {
        return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    };
    double u1 = uniform();
    double u2 = uniform();
    return sigma_db * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace airguard
