// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace drivegen {

enum class Phase { kRoad, kObject };

const std::string& to_string(Phase p);
Phase phase_from_string(const std::string& s);

// Stage-1 alternation: phase(i) = start_phase when floor((i + warmup)/K) is
// even, the other phase otherwise. warmup_offset shifts the parity without
// changing the interval (the terminal-phase analysis is parity-sensitive).
struct PhaseSchedule {
  long interval = 1000;  // K, steps per phase
  Phase start_phase = Phase::kRoad;
  long stage1_steps = 60000;
  long stage2_steps = 10000;
  long warmup_offset = 0;
};

void validate_phase_schedule(const PhaseSchedule& schedule);

// Pure parity rule; throws UsageError outside [0, stage1_steps).
Phase phase_at(long step, const PhaseSchedule& schedule);

// Number of phase switches across stage 1: floor((stage1_steps - 1) / K).
long phase_switches(const PhaseSchedule& schedule);

// Phase active at the last stage-1 step.
Phase terminal_phase(const PhaseSchedule& schedule);

}  // namespace drivegen
