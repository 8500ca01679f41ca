#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chfam/dynamics.hpp"

namespace chfam {

struct SolverState {
  double time = 0.0;
  Field u;
  ModelParams params;
  double dt = 0.0;  // last step taken
  long step_count = 0;
};

struct StepControl {
  double cfl = 0.5;
  double dt_max = 1e-2;
  double t_end = 1.0;
  double blowup_threshold = 1e6;

  /// Throws InvalidArgument when cfl is outside (0, 1] or dt_max, t_end <= 0.
  void validate() const;
};

/// Raised when a stage produces non-finite values or the max-norm exceeds
/// the blow-up threshold. Carries the last accepted state.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, SolverState last_good)
      : Error(what), last_good_(std::move(last_good)) {}

  const SolverState& last_good() const noexcept { return last_good_; }
  double time() const noexcept { return last_good_.time; }

 private:
  SolverState last_good_;
};

using RhsFunction = std::function<Field(const Field&)>;

/// The model right-hand side bound to params and options.
RhsFunction model_rhs(const ModelParams& params, const DynamicsOptions& opts = {});

/// One classical four-stage Runge-Kutta step of size dt.
SolverState step_rk4(const SolverState& state, double dt, const RhsFunction& f);
SolverState step_rk4(const SolverState& state, double dt, const DynamicsOptions& opts = {});

/// Floor on max|u|^n in the advective CFL bound.
inline constexpr double kCflFloor = 1e-12;

/// min(dt_max, cfl * dx / max(eps, max|u|^n)).
double choose_dt(const SolverState& state, const StepControl& ctl);

using Observer = std::function<void(const SolverState&)>;

struct EvolveOptions {
  /// Observer is called at the initial state and every `output_interval`
  /// (steps are shortened to land on output times). Zero means every step.
  double output_interval = 0.0;
  /// When set, every step uses this size (still clipped to output times and
  /// t_end) instead of choose_dt.
  std::optional<double> fixed_dt;
};

/// Steps until ctl.t_end, landing exactly on it.
SolverState evolve(SolverState state, const StepControl& ctl, const RhsFunction& f, const Observer& observer = {},
                   const EvolveOptions& opts = {});
SolverState evolve(SolverState state, const StepControl& ctl, const Observer& observer = {},
                   const EvolveOptions& opts = {}, const DynamicsOptions& dyn = {});

}  // namespace chfam
