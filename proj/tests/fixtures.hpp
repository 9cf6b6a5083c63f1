#pragma once

#include <jumplab/panel.hpp>
#include <jumplab/simulate.hpp>

#include <cstdint>
#include <vector>

namespace fixture {

/// Diffusion-only configuration on `steps` fine steps thinned by `thin`.
inline jumplab::simulate::DgpConfig diffusion(std::size_t steps = 720, std::size_t thin = 10) {
    jumplab::simulate::DgpConfig c;
    c.steps_per_day = steps;
    c.thin_factor = thin;
    return c;
}

/// Constant-variance Brownian configuration: kappa = sigma_v = 0, no drift.
inline jumplab::simulate::DgpConfig constant_variance(std::size_t steps, std::size_t thin) {
    auto c = diffusion(steps, thin);
    c.mu = 0.0;
    c.gamma = 0.0;
    c.kappa = 0.0;
    c.sigma_v = 0.0;
    return c;
}

/// Returns of `T` independent diffusion-only days (one replication per day).
inline std::vector<std::vector<double>> null_days(std::size_t T, std::size_t steps, std::size_t thin,
                                                  std::uint64_t seed) {
    const auto c = diffusion(steps, thin);
    std::vector<std::vector<double>> out;
    out.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto d = jumplab::simulate::simulate_forced_day(c, 0.0, 0.0, {seed, static_cast<std::uint32_t>(t), 0});
        const auto r = d.day.returns();
        out.emplace_back(r.begin(), r.end());
    }
    return out;
}

}  // namespace fixture
