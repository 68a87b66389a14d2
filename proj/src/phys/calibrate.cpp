#include "vin/phys/calibrate.hpp"

#include <algorithm>
#include <cmath>

#include "vin/phys/engine.hpp"

namespace vin::phys {

double mean_frame_displacement(const SimSpec& spec, int sims) {
    double total = 0.0;
    long long count = 0;
    for (int s = 0; s < sims; ++s) {
        SimSpec probe = spec;
        probe.seed = spec.seed + std::uint64_t(s) * 7919u;
        Trajectory traj = simulate(probe);
        for (int f = 1; f < traj.n_frames(); ++f)
            for (int i = 0; i < traj.n_object(); ++i) {
                total += (traj.frames[std::size_t(f)][std::size_t(i)].pos -
                          traj.frames[std::size_t(f - 1)][std::size_t(i)].pos)
                             .norm();
                ++count;
            }
    }
    return count ? total / double(count) : 0.0;
}

CalibrationReport calibrate_spec(SimSpec spec, double target, int max_iters,
                                 int probe_sims) {
    CalibrationReport report;
    report.target = target;
    report.before = mean_frame_displacement(spec, probe_sims);
    double measured = report.before;
    for (int it = 0; it < max_iters; ++it) {
        if (measured > 0.0 && std::abs(measured - target) / target < 0.05)
            break;
        const double ratio =
            std::clamp(target / std::max(measured, 1e-6), 0.25, 4.0);
        switch (spec.system) {
            case ForceLaw::kSpring:
                // Oscillation speed scales like sqrt(kappa).
                spec.kappa *= ratio * ratio;
                spec.v_init *= ratio;
                break;
            case ForceLaw::kGravity:
                spec.gravity_g *= ratio * ratio;
                spec.gravity_f_max *= ratio * ratio;
                spec.lambda_center *= ratio * ratio;
                spec.tangent_speed *= ratio;
                spec.tangent_noise *= ratio;
                break;
            case ForceLaw::kMagneticBilliards:
                spec.coulomb_k *= ratio * ratio;
                spec.v_init *= ratio;
                break;
            case ForceLaw::kBilliards:
            case ForceLaw::kDrift:
                spec.v_init *= ratio;
                break;
        }
        measured = mean_frame_displacement(spec, probe_sims);
        report.iterations = it + 1;
    }
    report.after = measured;
    report.tuned = spec;
    return report;
}

}  // namespace vin::phys
