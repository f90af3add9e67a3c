// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/phase.hpp"

#include "drivegen/errors.hpp"

namespace drivegen {

const std::string& to_string(Phase p) {
  static const std::string road = "road", object = "object";
  return p == Phase::kRoad ? road : object;
}

Phase phase_from_string(const std::string& s) {
  if (s == "road") return Phase::kRoad;
  if (s == "object") return Phase::kObject;
  throw ConfigError("unknown phase: '" + s + "'");
}

void validate_phase_schedule(const PhaseSchedule& schedule) {
  if (schedule.interval < 1) throw ConfigError("phase interval K must be >= 1");
  if (schedule.stage1_steps < 0 || schedule.stage2_steps < 0)
    throw ConfigError("stage lengths must be >= 0");
  if (schedule.warmup_offset < 0) throw ConfigError("warmup offset must be >= 0");
}

Phase phase_at(long step, const PhaseSchedule& schedule) {
  validate_phase_schedule(schedule);
  if (step < 0 || step >= schedule.stage1_steps)
    throw UsageError("step " + std::to_string(step) + " outside stage 1");
  long block = (step + schedule.warmup_offset) / schedule.interval;
  bool even = block % 2 == 0;
  Phase other = schedule.start_phase == Phase::kRoad ? Phase::kObject : Phase::kRoad;
  return even ? schedule.start_phase : other;
}

long phase_switches(const PhaseSchedule& schedule) {
  validate_phase_schedule(schedule);
  if (schedule.stage1_steps <= 0) return 0;
  return (schedule.stage1_steps - 1) / schedule.interval;
}

Phase terminal_phase(const PhaseSchedule& schedule) {
  return phase_at(schedule.stage1_steps - 1, schedule);
}

}  // namespace drivegen
