#pragma once

// Drive controller state machine: insert -> spin up -> read tag ->
// authenticate -> run or eject, with run/eject emitted as held signal
// levels into a timestamped trace.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tagdrive/rfid.hpp"
#include "tagdrive/types.hpp"

namespace tagdrive {

enum class DriveState {
    Idle,
    SpinningUp,
    ReadingTag,
    Authenticating,
    Running,
    Ejecting,
};

const char* drive_state_name(DriveState s);

struct OutputSignals {
    int run = 0;
    int eject = 0;
};

// Signal levels held while in a given state. Running and Ejecting are the
// only states that raise a line, and never both.
OutputSignals signals_for(DriveState s);

namespace event {
struct InsertDisc { Disc disc; };
struct TagRead { ReadResult result; };
struct AuthDecision { bool ok; };
struct RemoveDisc {};
struct Tick { int64_t ms; };
} // namespace event

using DriveEvent = std::variant<event::InsertDisc, event::TagRead,
                                event::AuthDecision, event::RemoveDisc,
                                event::Tick>;

struct StepResult {
    DriveState state;
    OutputSignals signals;
};

// Single transition. TagRead carries the final read outcome for the
// insertion (the scenario driver performs the retry loop and only delivers
// the event once it is settled). Throws IllegalTransition for events that
// are not legal in the current state -- a harness bug, not a scenario
// outcome.
StepResult step(DriveState state, const DriveEvent& ev, const DriveConfig& cfg);

// True iff the read produced a code and that code is in the database.
bool authenticate(const ReadResult& read, const CodeDatabase& db);

struct TraceSample {
    int64_t t_ms = 0;
    DriveState state = DriveState::Idle;
    int run = 0;
    int eject = 0;

    bool operator==(const TraceSample&) const = default;
};

// One sample per state change, t strictly increasing, first sample pinned at
// t=0 in Idle with both lines low.
class SignalTrace {
public:
    SignalTrace();

    void append(int64_t t_ms, DriveState state);

    const std::vector<TraceSample>& samples() const { return samples_; }
    int64_t last_time() const { return samples_.back().t_ms; }

    bool operator==(const SignalTrace&) const = default;

private:
    std::vector<TraceSample> samples_;
};

struct ScheduledEvent {
    enum class Action { Insert, Remove };

    int64_t t_ms = 0;
    Action action = Action::Insert;
    std::optional<Disc> disc; // required for Insert
};

// Runs a whole insert/remove schedule through the controller. Each internal
// phase occupies at least 1 ms so sample times stay strictly increasing:
// spin-up takes max(1, spin_up_ms), every read attempt 1 ms, the
// authentication decision 1 ms. Deterministic for a fixed (schedule, db,
// cfg, seed). Throws ScenarioMalformed on bad schedules.
SignalTrace run_scenario(const std::vector<ScheduledEvent>& events,
                         const CodeDatabase& db, const DriveConfig& cfg,
                         uint64_t seed);

// Content gate: sector reads are only served while the controller is in
// Running. Throws IllegalTransition otherwise; see content.hpp for the
// open_content contract this forwards to.
std::vector<std::vector<uint8_t>> read_disc_content(DriveState state,
                                                    const Disc& disc,
                                                    const TagCode& code);

} // namespace tagdrive
