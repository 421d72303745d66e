#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpar/errors.hpp"
#include "qpar/scheduler.hpp"

namespace qpar {

inline constexpr const char* kSpeedscopeSchema =
    "https://www.speedscope.app/file-format-schema.json";

// Serializes a critical path as a speedscope evented profile. Adjacent path
// instructions merge flames over their longest common stack prefix, so a
// subroutine spanning several instructions appears as one flame. Frame
// identity is the operation name alone.
inline nlohmann::ordered_json to_speedscope_json(const std::vector<PathEntry>& path,
                                                 std::int64_t depth,
                                                 const std::string& name) {
    using json = nlohmann::ordered_json;

    std::vector<std::string> frame_names;
    std::map<std::string, std::size_t> frame_index;
    auto intern = [&](const std::string& frame) {
        auto it = frame_index.find(frame);
        if (it != frame_index.end()) return it->second;
        frame_index.emplace(frame, frame_names.size());
        frame_names.push_back(frame);
        return frame_names.size() - 1;
    };

    json events = json::array();
    std::vector<std::string> open;  // currently open stack
    std::int64_t cursor = 0;

    auto close_to = [&](std::size_t keep, std::int64_t at) {
        while (open.size() > keep) {
            events.push_back(
                {{"type", "C"}, {"frame", intern(open.back())}, {"at", at}});
            open.pop_back();
        }
    };

    if (!path.empty() && path.front().start != 0) {
        throw Error("critical path does not start at 0");
    }
    for (const PathEntry& entry : path) {
        if (entry.start < cursor) throw Error("overlapping spans");
        if (entry.start > cursor) throw Error("critical path has a gap");
        std::size_t lcp = 0;
        while (lcp < open.size() && lcp < entry.stack.size() &&
               open[lcp] == entry.stack[lcp]) {
            ++lcp;
        }
        close_to(lcp, entry.start);
        for (std::size_t k = lcp; k < entry.stack.size(); ++k) {
            events.push_back(
                {{"type", "O"}, {"frame", intern(entry.stack[k])}, {"at", entry.start}});
            open.push_back(entry.stack[k]);
        }
        cursor = entry.finish;
    }
    close_to(0, cursor);
    if (cursor != depth) {
        throw Error("critical path covers " + std::to_string(cursor) + " of depth " +
                    std::to_string(depth));
    }

    json frames = json::array();
    for (const std::string& frame : frame_names) frames.push_back({{"name", frame}});

    json doc;
    doc["$schema"] = kSpeedscopeSchema;
    doc["shared"] = {{"frames", frames}};
    doc["profiles"] = json::array({json{{"type", "evented"},
                                        {"name", name},
                                        {"unit", "none"},
                                        {"startValue", 0},
                                        {"endValue", depth},
                                        {"events", events}}});
    return doc;
}

inline std::string to_speedscope(const std::vector<PathEntry>& path, std::int64_t depth,
                                 const std::string& name) {
    return to_speedscope_json(path, depth, name).dump();
}

// Structural validation against the documented speedscope file format.
// Returns one message per problem; empty means the document conforms.
inline std::vector<std::string> validate_speedscope(const nlohmann::json& doc) {
    std::vector<std::string> problems;
    auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

    if (!doc.is_object()) {
        fail("document is not an object");
        return problems;
    }
    if (!doc.contains("$schema") || doc["$schema"] != kSpeedscopeSchema) {
        fail("missing or wrong $schema");
    }
    if (!doc.contains("shared") || !doc["shared"].is_object() ||
        !doc["shared"].contains("frames") || !doc["shared"]["frames"].is_array()) {
        fail("missing shared.frames array");
        return problems;
    }
    const auto& frames = doc["shared"]["frames"];
    for (const auto& frame : frames) {
        if (!frame.is_object() || !frame.contains("name") || !frame["name"].is_string()) {
            fail("frame without a string name");
        }
    }
    if (!doc.contains("profiles") || !doc["profiles"].is_array() || doc["profiles"].empty()) {
        fail("missing profiles array");
        return problems;
    }
    for (const auto& profile : doc["profiles"]) {
        if (profile.value("type", "") != "evented") {
            fail("profile type must be \"evented\"");
            continue;
        }
        if (!profile.contains("name") || !profile["name"].is_string()) {
            fail("profile without a string name");
        }
        static const char* units[] = {"none",         "nanoseconds", "microseconds",
                                      "milliseconds", "seconds",     "bytes"};
        bool unit_ok = false;
        for (const char* u : units) unit_ok |= profile.value("unit", "") == u;
        if (!unit_ok) fail("profile unit is not a speedscope unit");
        if (!profile.contains("startValue") || !profile["startValue"].is_number()) {
            fail("profile without numeric startValue");
        }
        if (!profile.contains("endValue") || !profile["endValue"].is_number()) {
            fail("profile without numeric endValue");
        }
        if (!profile.contains("events") || !profile["events"].is_array()) {
            fail("profile without events array");
            continue;
        }
        double start_value = profile.value("startValue", 0.0);
        double end_value = profile.value("endValue", 0.0);
        double prev_at = start_value;
        bool open_seen_at_ts = false;  // an "O" already occurred at prev_at
        std::vector<std::int64_t> stack;
        for (const auto& event : profile["events"]) {
            std::string type = event.value("type", "");
            if (type != "O" && type != "C") {
                fail("event type must be \"O\" or \"C\"");
                continue;
            }
            if (!event.contains("frame") || !event["frame"].is_number_integer()) {
                fail("event without integer frame");
                continue;
            }
            std::int64_t frame = event["frame"];
            if (frame < 0 || frame >= static_cast<std::int64_t>(frames.size())) {
                fail("event frame index out of range");
                continue;
            }
            if (!event.contains("at") || !event["at"].is_number()) {
                fail("event without numeric at");
                continue;
            }
            double at = event["at"];
            if (at < prev_at) fail("events not sorted by at");
            if (at > prev_at) open_seen_at_ts = false;
            if (at < start_value || at > end_value) fail("event outside profile range");
            if (type == "C") {
                // At equal timestamps closes come before opens.
                if (open_seen_at_ts) fail("close after open at equal timestamp");
                if (stack.empty() || stack.back() != frame) {
                    fail("close does not match the open frame");
                } else {
                    stack.pop_back();
                }
            } else {
                open_seen_at_ts = true;
                stack.push_back(frame);
            }
            prev_at = at;
        }
        if (!stack.empty()) fail("unbalanced events: frames left open");
    }
    return problems;
}

}  // namespace qpar
