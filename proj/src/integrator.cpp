#include "chfam/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chfam {

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("cfl must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw InvalidArgument("dt_max must be positive");
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (!(blowup_threshold > 0.0)) throw InvalidArgument("blowup_threshold must be positive");
}

RhsFunction model_rhs(const ModelParams& params, const DynamicsOptions& opts) {
  return [params, opts](const Field& u) { return rhs(u, params, opts); };
}

SolverState step_rk4(const SolverState& state, double dt, const RhsFunction& f) {
  if (!(dt > 0.0)) throw InvalidArgument("step size must be positive");
  try {
    const Field& u = state.u;
    const Field k1 = f(u);
    const Field k2 = f(u + (0.5 * dt) * k1);
    const Field k3 = f(u + (0.5 * dt) * k2);
    const Field k4 = f(u + dt * k3);

    std::vector<double> next(u.vector());
    const double w = dt / 6.0;
    for (int i = 0; i < u.size(); ++i) {
      next[static_cast<std::size_t>(i)] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    SolverState out{state.time + dt, Field(u.grid(), std::move(next)), state.params, dt, state.step_count + 1};
    return out;
  } catch (const NonFiniteError& e) {
    std::ostringstream os;
    os << "non-finite values during step from t = " << state.time << ": " << e.what();
    throw BlowUp(os.str(), state);
  }
}

SolverState step_rk4(const SolverState& state, double dt, const DynamicsOptions& opts) {
  return step_rk4(state, dt, model_rhs(state.params, opts));
}

double choose_dt(const SolverState& state, const StepControl& ctl) {
  const double speed = int_pow(state.u.max_abs(), state.params.n);
  return std::min(ctl.dt_max, ctl.cfl * state.u.grid().spacing() / std::max(kCflFloor, speed));
}

SolverState evolve(SolverState state, const StepControl& ctl, const RhsFunction& f, const Observer& observer,
                   const EvolveOptions& opts) {
  ctl.validate();
  if (ctl.t_end <= state.time) return state;
  if (opts.fixed_dt && !(*opts.fixed_dt > 0.0)) throw InvalidArgument("fixed step size must be positive");

  // Times are computed as t0 + k * interval to avoid drift from repeated sums.
  const double t0 = state.time;
  long next_output = 1;
  auto output_time = [&](long k) {
    return opts.output_interval > 0.0 ? std::min(ctl.t_end, t0 + k * opts.output_interval) : ctl.t_end;
  };

  if (observer) observer(state);
  // Relative slack under which a remaining interval counts as reached.
  const double eps = 1e-12 * std::max(1.0, std::abs(ctl.t_end));

  while (ctl.t_end - state.time > eps) {
    const double target = output_time(next_output);
    double dt = opts.fixed_dt ? *opts.fixed_dt : choose_dt(state, ctl);
    bool lands = false;
    if (state.time + dt >= target - eps) {
      dt = target - state.time;
      lands = true;
    }
    SolverState next = step_rk4(state, dt, f);
    if (lands) next.time = target;  // exact landing

    const double sup = next.u.max_abs();
    if (sup > ctl.blowup_threshold) {
      std::ostringstream os;
      os << "max|u| = " << sup << " exceeds blow-up threshold " << ctl.blowup_threshold << " at t = " << next.time;
      throw BlowUp(os.str(), state);
    }
    state = std::move(next);

    if (opts.output_interval <= 0.0) {
      if (observer) observer(state);
    } else if (lands) {
      if (observer) observer(state);
      ++next_output;
    }
  }
  return state;
}

SolverState evolve(SolverState state, const StepControl& ctl, const Observer& observer, const EvolveOptions& opts,
                   const DynamicsOptions& dyn) {
  const RhsFunction f = model_rhs(state.params, dyn);
  return evolve(std::move(state), ctl, f, observer, opts);
}

}  // namespace chfam
