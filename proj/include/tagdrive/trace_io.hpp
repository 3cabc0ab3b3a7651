#pragma once

// Trace export: CSV for analysis, VCD for waveform viewers. Both outputs are
// byte-deterministic functions of the trace (no wall clock in headers).

#include <string>

#include "tagdrive/drive.hpp"

namespace tagdrive {

// Header "t_ms,state,run,eject", one row per sample, LF line endings.
std::string trace_to_csv(const SignalTrace& trace);

// Two 1-bit wires `run` and `eject` plus a 3-bit `state` register holding
// the DriveState index (Idle=0 .. Ejecting=5). Timescale 1 ms.
std::string trace_to_vcd(const SignalTrace& trace);

void save_trace_csv(const SignalTrace& trace, const std::string& path);
void save_trace_vcd(const SignalTrace& trace, const std::string& path);

} // namespace tagdrive
