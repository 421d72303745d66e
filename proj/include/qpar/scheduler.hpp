#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qpar/errors.hpp"
#include "qpar/ir.hpp"

namespace qpar {

// Gate-cost table. Markers and Alloc/Release always cost zero; classically
// controlled gates cost their inner kind.
class MetricTable {
public:
    // T and Tdg cost 1; rotations default to 1 as a stand-in for
    // fault-tolerant synthesis and can be set to 0.
    static MetricTable t_depth(std::int64_t rz_cost = 1) {
        MetricTable m;
        m.name_ = "t-depth";
        m.set(GateOp::T, 1);
        m.set(GateOp::Tdg, 1);
        m.set(GateOp::Rz, rz_cost);
        return m;
    }

    static MetricTable full_depth() {
        MetricTable m;
        m.name_ = "full-depth";
        for (GateOp op : kAllGateOps) m.set(op, 1);
        return m;
    }

    // Config format: one `GATE=COST` per line; '#' starts a comment.
    // Unknown gate names are rejected.
    static MetricTable from_string(const std::string& text, std::string name = "custom") {
        MetricTable m;
        m.name_ = std::move(name);
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
            line.erase(std::remove_if(line.begin(), line.end(), is_space), line.end());
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw Error("metric config line " + std::to_string(lineno) +
                            ": expected GATE=COST");
            }
            std::string gate = line.substr(0, eq);
            auto op = gate_from_name(gate);
            if (!op) {
                throw Error("metric config line " + std::to_string(lineno) +
                            ": unknown gate '" + gate + "'");
            }
            std::int64_t cost = 0;
            try {
                cost = std::stoll(line.substr(eq + 1));
            } catch (const std::exception&) {
                throw Error("metric config line " + std::to_string(lineno) + ": bad cost");
            }
            if (cost < 0) {
                throw Error("metric config line " + std::to_string(lineno) +
                            ": cost must be nonnegative");
            }
            m.set(*op, cost);
        }
        return m;
    }

    static MetricTable from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open metric config '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

    void set(GateOp op, std::int64_t cost) { costs_[static_cast<std::size_t>(op)] = cost; }

    std::int64_t cost(const Gate& g) const { return costs_[static_cast<std::size_t>(g.op)]; }

    const std::string& name() const { return name_; }

private:
    std::array<std::int64_t, std::size(kAllGateOps)> costs_{};
    std::string name_ = "custom";
};

// ASAP schedule over the qubit-dependency DAG. Two instructions are ordered
// iff they touch a common qubit (trace order breaks the tie) or are linked
// by a measurement result; markers and Alloc/Release synchronize nothing.
struct Schedule {
    std::vector<std::int64_t> start;
    std::vector<std::int64_t> finish;
    std::vector<std::int64_t> cost;
    // Per instruction: the predecessor whose finish time determined start
    // (lowest writer index on ties), or -1.
    std::vector<std::ptrdiff_t> determining_pred;
    std::int64_t depth = 0;
};

inline Schedule schedule(const Trace& trace, const MetricTable& metric) {
    {
        auto diags = validate_trace(trace);
        if (!diags.empty()) {
            throw ValidationError("invalid trace: " + diags.front().message +
                                  " (instruction " + std::to_string(diags.front().instruction) +
                                  ")");
        }
    }

    const std::size_t n = trace.instructions.size();
    Schedule sched;
    sched.start.assign(n, 0);
    sched.finish.assign(n, 0);
    sched.cost.assign(n, 0);
    sched.determining_pred.assign(n, -1);

    std::vector<std::int64_t> ready;
    std::vector<std::ptrdiff_t> last_writer;
    auto ensure = [&](QubitId q) {
        if (q.index >= ready.size()) {
            ready.resize(q.index + 1, 0);
            last_writer.resize(q.index + 1, -1);
        }
    };
    std::map<int, std::pair<std::int64_t, std::ptrdiff_t>> results;  // slot -> finish, writer

    for (std::size_t i = 0; i < n; ++i) {
        const InstrOp& op = trace.instructions[i].op;
        if (const auto* g = std::get_if<GateInstr>(&op)) {
            std::int64_t start = 0;
            for (QubitId q : g->operands) {
                ensure(q);
                start = std::max(start, ready[q.index]);
            }
            if (g->gate.condition) {
                start = std::max(start, results.at(*g->gate.condition).first);
            }
            // Determining predecessor: among dependencies achieving `start`,
            // the writer with the lowest instruction index.
            std::ptrdiff_t det = -1;
            for (QubitId q : g->operands) {
                if (ready[q.index] == start && last_writer[q.index] >= 0) {
                    if (det < 0 || last_writer[q.index] < det) det = last_writer[q.index];
                }
            }
            if (g->gate.condition) {
                const auto& [rfinish, rwriter] = results.at(*g->gate.condition);
                if (rfinish == start && rwriter >= 0 && (det < 0 || rwriter < det)) {
                    det = rwriter;
                }
            }
            std::int64_t cost = metric.cost(g->gate);
            sched.start[i] = start;
            sched.cost[i] = cost;
            sched.finish[i] = start + cost;
            sched.determining_pred[i] = det;
            for (QubitId q : g->operands) {
                ready[q.index] = sched.finish[i];
                last_writer[q.index] = static_cast<std::ptrdiff_t>(i);
            }
            if (g->result_slot) {
                results[*g->result_slot] = {sched.finish[i], static_cast<std::ptrdiff_t>(i)};
            }
        } else if (const auto* a = std::get_if<AllocInstr>(&op)) {
            std::int64_t start = 0;
            for (QubitId q : a->ids) {
                ensure(q);
                start = std::max(start, ready[q.index]);
            }
            sched.start[i] = sched.finish[i] = start;
        } else if (const auto* r = std::get_if<ReleaseInstr>(&op)) {
            std::int64_t start = 0;
            for (QubitId q : r->ids) {
                ensure(q);
                start = std::max(start, ready[q.index]);
            }
            sched.start[i] = sched.finish[i] = start;
        }
        // markers: start = finish = 0
        sched.depth = std::max(sched.depth, sched.finish[i]);
    }
    return sched;
}

struct PathEntry {
    std::size_t instruction = 0;
    std::int64_t start = 0;
    std::int64_t finish = 0;
    std::vector<std::string> stack;
};

// Walks back from a maximal-finish instruction (lowest index on ties) along
// determining predecessors, skipping zero-cost instructions. The returned
// path is in time order and its costs sum to the schedule depth.
inline std::vector<PathEntry> critical_path(const Schedule& sched, const Trace& trace) {
    std::vector<PathEntry> path;
    if (sched.depth == 0) return path;

    std::ptrdiff_t cur = -1;
    for (std::size_t i = 0; i < sched.finish.size(); ++i) {
        if (sched.finish[i] == sched.depth) {
            cur = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }

    while (cur >= 0) {
        std::size_t i = static_cast<std::size_t>(cur);
        if (sched.cost[i] > 0) {
            path.push_back({i, sched.start[i], sched.finish[i], trace.instructions[i].stack});
        }
        if (sched.start[i] == 0) break;
        cur = sched.determining_pred[i];
    }
    std::reverse(path.begin(), path.end());

    std::int64_t total = 0;
    for (const PathEntry& e : path) total += e.finish - e.start;
    if (total != sched.depth) {
        throw Error("internal: critical path cost sum " + std::to_string(total) +
                    " != depth " + std::to_string(sched.depth));
    }
    return path;
}

struct FrameCost {
    std::string name;
    std::int64_t self = 0;   // cost of path instructions whose innermost frame this is
    std::int64_t total = 0;  // cost of path instructions with this frame anywhere on stack
};

struct ResourceReport {
    std::int64_t depth = 0;
    std::size_t t_count = 0;
    std::size_t gate_count = 0;
    std::uint32_t qubit_high_watermark = 0;
    std::vector<FrameCost> frames;  // sorted by total desc, then name
};

inline ResourceReport resource_report(const Trace& trace, const Schedule& sched) {
    ResourceReport report;
    report.depth = sched.depth;
    report.t_count = t_count(trace);
    report.gate_count = count_gates(trace, [](const Gate&) { return true; });
    report.qubit_high_watermark = trace.qubit_high_watermark;

    std::map<std::string, FrameCost> frames;
    for (const PathEntry& e : critical_path(sched, trace)) {
        std::int64_t cost = e.finish - e.start;
        if (!e.stack.empty()) frames[e.stack.back()].self += cost;
        std::set<std::string> seen;
        for (const std::string& frame : e.stack) {
            if (seen.insert(frame).second) frames[frame].total += cost;
        }
    }
    for (auto& [name, cost] : frames) {
        cost.name = name;
        report.frames.push_back(cost);
    }
    std::sort(report.frames.begin(), report.frames.end(),
              [](const FrameCost& a, const FrameCost& b) {
                  if (a.total != b.total) return a.total > b.total;
                  return a.name < b.name;
              });
    return report;
}

}  // namespace qpar
