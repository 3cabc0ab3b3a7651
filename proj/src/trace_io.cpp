#include "tagdrive/trace_io.hpp"

#include <string>

#include "tagdrive/persist.hpp"

namespace tagdrive {

std::string trace_to_csv(const SignalTrace& trace) {
    std::string out = "t_ms,state,run,eject\n";
    for (const TraceSample& s : trace.samples()) {
        out += std::to_string(s.t_ms);
        out += ',';
        out += drive_state_name(s.state);
        out += ',';
        out += std::to_string(s.run);
        out += ',';
        out += std::to_string(s.eject);
        out += '\n';
    }
    return out;
}

namespace {

// 3-bit state register value, binary, MSB first.
std::string state_bits(DriveState s) {
    const unsigned v = static_cast<unsigned>(s);
    std::string bits(3, '0');
    if (v & 4) bits[0] = '1';
    if (v & 2) bits[1] = '1';
    if (v & 1) bits[2] = '1';
    return bits;
}

} // namespace

std::string trace_to_vcd(const SignalTrace& trace) {
    // No $date section: output must be a pure function of the trace.
    std::string out;
    out += "$version tagdrive trace writer $end\n";
    out += "$timescale 1 ms $end\n";
    out += "$scope module drive $end\n";
    out += "$var wire 1 ! run $end\n";
    out += "$var wire 1 @ eject $end\n";
    out += "$var reg 3 # state $end\n";
    out += "$upscope $end\n";
    out += "$enddefinitions $end\n";

    bool first = true;
    int prev_run = -1;
    int prev_eject = -1;
    std::string prev_state;
    for (const TraceSample& s : trace.samples()) {
        const std::string bits = state_bits(s.state);
        out += "#" + std::to_string(s.t_ms) + "\n";
        if (first) {
            out += "$dumpvars\n";
            out += std::to_string(s.run) + "!\n";
            out += std::to_string(s.eject) + "@\n";
            out += "b" + bits + " #\n";
            out += "$end\n";
            first = false;
        } else {
            if (s.run != prev_run) out += std::to_string(s.run) + "!\n";
            if (s.eject != prev_eject) out += std::to_string(s.eject) + "@\n";
            if (bits != prev_state) out += "b" + bits + " #\n";
        }
        prev_run = s.run;
        prev_eject = s.eject;
        prev_state = bits;
    }
    return out;
}

void save_trace_csv(const SignalTrace& trace, const std::string& path) {
    write_file_atomic(path, trace_to_csv(trace));
}

void save_trace_vcd(const SignalTrace& trace, const std::string& path) {
    write_file_atomic(path, trace_to_vcd(trace));
}

} // namespace tagdrive
