#include "tagdrive/drive.hpp"

#include <algorithm>
#include <string>

#include "tagdrive/content.hpp"

namespace tagdrive {

const char* drive_state_name(DriveState s) {
    switch (s) {
        case DriveState::Idle: return "Idle";
        case DriveState::SpinningUp: return "SpinningUp";
        case DriveState::ReadingTag: return "ReadingTag";
        case DriveState::Authenticating: return "Authenticating";
        case DriveState::Running: return "Running";
        case DriveState::Ejecting: return "Ejecting";
    }
    throw IllegalTransition("invalid DriveState value");
}

OutputSignals signals_for(DriveState s) {
    switch (s) {
        case DriveState::Running: return {1, 0};
        case DriveState::Ejecting: return {0, 1};
        default: return {0, 0};
    }
}

namespace {

[[noreturn]] void illegal(DriveState state, const char* event_name) {
    throw IllegalTransition(std::string(event_name) + " is not legal in state " +
                            drive_state_name(state));
}

struct StepVisitor {
    DriveState state;
    const DriveConfig& cfg;

    DriveState operator()(const event::InsertDisc&) const {
        if (state != DriveState::Idle) illegal(state, "InsertDisc");
        return DriveState::SpinningUp;
    }

    DriveState operator()(const event::Tick& tick) const {
        // Time passes in every state; only spin-up completion changes state.
        if (state == DriveState::SpinningUp && tick.ms >= cfg.spin_up_ms) {
            return DriveState::ReadingTag;
        }
        return state;
    }

    DriveState operator()(const event::TagRead& read) const {
        if (state != DriveState::ReadingTag) illegal(state, "TagRead");
        // The driver delivers the final outcome; a failure here means the
        // retry budget is spent and nothing matched, so the disc goes out.
        return read.result.is_ok() ? DriveState::Authenticating : DriveState::Ejecting;
    }

    DriveState operator()(const event::AuthDecision& decision) const {
        if (state != DriveState::Authenticating) illegal(state, "AuthDecision");
        return decision.ok ? DriveState::Running : DriveState::Ejecting;
    }

    DriveState operator()(const event::RemoveDisc&) const {
        return DriveState::Idle;
    }
};

} // namespace

StepResult step(DriveState state, const DriveEvent& ev, const DriveConfig& cfg) {
    const DriveState next = std::visit(StepVisitor{state, cfg}, ev);
    return {next, signals_for(next)};
}

bool authenticate(const ReadResult& read, const CodeDatabase& db) {
    return read.is_ok() && db.contains(*read.code);
}

SignalTrace::SignalTrace() {
    samples_.push_back({0, DriveState::Idle, 0, 0});
}

void SignalTrace::append(int64_t t_ms, DriveState state) {
    if (t_ms <= samples_.back().t_ms) {
        throw ScenarioMalformed("trace sample times must be strictly increasing (" +
                                std::to_string(t_ms) + " after " +
                                std::to_string(samples_.back().t_ms) + ")");
    }
    const OutputSignals sig = signals_for(state);
    samples_.push_back({t_ms, state, sig.run, sig.eject});
}

namespace {

void validate_schedule(const std::vector<ScheduledEvent>& events,
                       const CodeDatabase& db) {
    int64_t prev = 0;
    for (size_t i = 0; i < events.size(); ++i) {
        const ScheduledEvent& ev = events[i];
        if (ev.t_ms <= 0) {
            throw ScenarioMalformed("event " + std::to_string(i) +
                                    ": t_ms must be > 0");
        }
        if (i > 0 && ev.t_ms <= prev) {
            throw ScenarioMalformed("event " + std::to_string(i) +
                                    ": times must be strictly increasing");
        }
        prev = ev.t_ms;
        if (ev.action == ScheduledEvent::Action::Insert) {
            if (!ev.disc.has_value()) {
                throw ScenarioMalformed("event " + std::to_string(i) +
                                        ": insert without a disc");
            }
            if (ev.disc->tag && ev.disc->tag->code.width() != db.width()) {
                throw ScenarioMalformed(
                    "event " + std::to_string(i) + ": disc tag width " +
                    std::to_string(ev.disc->tag->code.width()) +
                    " does not match database width " + std::to_string(db.width()));
            }
        }
    }
}

} // namespace

SignalTrace run_scenario(const std::vector<ScheduledEvent>& events,
                         const CodeDatabase& db, const DriveConfig& cfg,
                         uint64_t seed) {
    validate_config(cfg);
    validate_schedule(events, db);

    SignalTrace trace;
    DriveState state = DriveState::Idle;
    ReadChannel chan(seed, cfg.bit_error_rate);

    for (const ScheduledEvent& ev : events) {
        if (ev.t_ms <= trace.last_time()) {
            throw ScenarioMalformed(
                "event at t=" + std::to_string(ev.t_ms) +
                " overlaps the previous episode (busy until t=" +
                std::to_string(trace.last_time()) + ")");
        }

        if (ev.action == ScheduledEvent::Action::Remove) {
            if (state == DriveState::Idle) continue; // nothing to remove, no sample
            state = step(state, event::RemoveDisc{}, cfg).state;
            trace.append(ev.t_ms, state);
            continue;
        }

        const Disc& disc = *ev.disc;
        if (state != DriveState::Idle) {
            throw ScenarioMalformed("insert at t=" + std::to_string(ev.t_ms) +
                                    " while a disc is already in the drive");
        }

        state = step(state, event::InsertDisc{disc}, cfg).state;
        trace.append(ev.t_ms, state);

        // Each internal phase takes at least one tick so samples never collide.
        const int64_t spin = std::max<int64_t>(1, cfg.spin_up_ms);
        int64_t now = ev.t_ms + spin;
        state = step(state, event::Tick{spin}, cfg).state;
        trace.append(now, state);

        // Read with retries; one attempt per millisecond. Both a missing tag
        // and a detected corrupt read burn an attempt.
        ReadResult result = ReadResult::no_tag();
        const unsigned max_attempts = 1 + cfg.read_retries;
        for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
            result = read_tag(disc, cfg, chan);
            ++now;
            if (result.is_ok()) break;
        }

        state = step(state, event::TagRead{result}, cfg).state;
        trace.append(now, state);

        if (state == DriveState::Authenticating) {
            const bool ok = authenticate(result, db);
            state = step(state, event::AuthDecision{ok}, cfg).state;
            trace.append(++now, state);
        }
    }
    return trace;
}

std::vector<std::vector<uint8_t>> read_disc_content(DriveState state,
                                                    const Disc& disc,
                                                    const TagCode& code) {
    if (state != DriveState::Running) {
        throw IllegalTransition(std::string("content read requested in state ") +
                                drive_state_name(state));
    }
    if (!disc.content) {
        throw ContentAuthFailure("disc carries no sealed image");
    }
    return open_content(*disc.content, code, disc.serial);
}

} // namespace tagdrive
