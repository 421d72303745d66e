#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpar/errors.hpp"

namespace qpar {

// Physical qubit slot assigned by the qubit manager. Ids are dense and
// minted from zero, so they double as simulator slot indices.
struct QubitId {
    std::uint32_t index = 0;
    friend auto operator<=>(const QubitId&, const QubitId&) = default;
};

enum class GateOp {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz,
    CNOT,
    CZ,
    CCX,
    SWAP,
    CSWAP,
    MeasureZ,
    MeasureXReset,
};

inline constexpr GateOp kAllGateOps[] = {
    GateOp::H,    GateOp::X,    GateOp::Y,        GateOp::Z,
    GateOp::S,    GateOp::Sdg,  GateOp::T,        GateOp::Tdg,
    GateOp::Rz,   GateOp::CNOT, GateOp::CZ,       GateOp::CCX,
    GateOp::SWAP, GateOp::CSWAP, GateOp::MeasureZ, GateOp::MeasureXReset,
};

inline std::string_view gate_name(GateOp op) {
    switch (op) {
        case GateOp::H: return "H";
        case GateOp::X: return "X";
        case GateOp::Y: return "Y";
        case GateOp::Z: return "Z";
        case GateOp::S: return "S";
        case GateOp::Sdg: return "Sdg";
        case GateOp::T: return "T";
        case GateOp::Tdg: return "Tdg";
        case GateOp::Rz: return "Rz";
        case GateOp::CNOT: return "CNOT";
        case GateOp::CZ: return "CZ";
        case GateOp::CCX: return "CCX";
        case GateOp::SWAP: return "SWAP";
        case GateOp::CSWAP: return "CSWAP";
        case GateOp::MeasureZ: return "MeasureZ";
        case GateOp::MeasureXReset: return "MeasureXReset";
    }
    return "?";
}

inline std::optional<GateOp> gate_from_name(std::string_view name) {
    for (GateOp op : kAllGateOps) {
        if (gate_name(op) == name) return op;
    }
    return std::nullopt;
}

inline int gate_arity(GateOp op) {
    switch (op) {
        case GateOp::CNOT:
        case GateOp::CZ:
        case GateOp::SWAP:
            return 2;
        case GateOp::CCX:
        case GateOp::CSWAP:
            return 3;
        default:
            return 1;
    }
}

inline bool is_measurement(GateOp op) {
    return op == GateOp::MeasureZ || op == GateOp::MeasureXReset;
}

// A gate application. `condition`, when set, makes this a classically
// controlled gate that fires iff the referenced result slot recorded One.
struct Gate {
    GateOp op = GateOp::H;
    double angle = 0.0;                 // Rz only
    std::optional<int> condition;
    friend bool operator==(const Gate&, const Gate&) = default;
};

struct GateInstr {
    Gate gate;
    std::vector<QubitId> operands;
    std::optional<int> result_slot;     // measurements only, assigned in trace order
    friend bool operator==(const GateInstr&, const GateInstr&) = default;
};

struct AllocInstr {
    std::vector<QubitId> ids;
    friend bool operator==(const AllocInstr&, const AllocInstr&) = default;
};

struct ReleaseInstr {
    std::vector<QubitId> ids;
    friend bool operator==(const ReleaseInstr&, const ReleaseInstr&) = default;
};

struct ParallelBeginInstr {
    friend bool operator==(const ParallelBeginInstr&, const ParallelBeginInstr&) = default;
};
struct ParallelEndInstr {
    friend bool operator==(const ParallelEndInstr&, const ParallelEndInstr&) = default;
};

struct SectionBeginInstr {
    int index = 0;
    friend bool operator==(const SectionBeginInstr&, const SectionBeginInstr&) = default;
};
struct SectionEndInstr {
    friend bool operator==(const SectionEndInstr&, const SectionEndInstr&) = default;
};

struct FanoutBeginInstr {
    int fanout_id = 0;
    std::vector<QubitId> originals;
    // copies[r] holds the replica-(r+1) ids; replica 0 is the originals.
    std::vector<std::vector<QubitId>> copies;
    friend bool operator==(const FanoutBeginInstr&, const FanoutBeginInstr&) = default;
};
struct FanoutEndInstr {
    int fanout_id = 0;
    friend bool operator==(const FanoutEndInstr&, const FanoutEndInstr&) = default;
};

using InstrOp = std::variant<GateInstr, AllocInstr, ReleaseInstr, ParallelBeginInstr,
                             ParallelEndInstr, SectionBeginInstr, SectionEndInstr,
                             FanoutBeginInstr, FanoutEndInstr>;

struct Instruction {
    InstrOp op;
    std::vector<std::string> stack;     // call chain, outermost first
    friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Flat, fully unrolled instruction sequence. Immutable once built.
struct Trace {
    std::vector<Instruction> instructions;
    std::uint32_t qubit_high_watermark = 0;   // total distinct qubit slots minted
    int result_count = 0;
    friend bool operator==(const Trace&, const Trace&) = default;
};

struct Diagnostic {
    std::size_t instruction = 0;
    std::string message;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline const GateInstr* as_gate(const Instruction& instr) {
    return std::get_if<GateInstr>(&instr.op);
}

// Checks structural trace invariants: distinct gate operands, liveness of
// every gated qubit, balanced marker nesting, result-slot ordering, and the
// sibling-section sharing rule (qubits active in an enclosing fanout are
// exempt). Returns one diagnostic per violation.
inline std::vector<Diagnostic> validate_trace(const Trace& trace) {
    std::vector<Diagnostic> diags;

    struct ParallelCtx {
        int current_section = -1;                 // -1: between sections
        int next_index = 0;
        std::map<std::uint32_t, int> first_touch; // qubit -> section index
    };
    enum class ScopeKind { Parallel, Fanout };
    struct Scope {
        ScopeKind kind;
        int fanout_id = 0;      // Fanout only
        std::size_t ctx = 0;    // Parallel: context index; Fanout: begin instruction
    };

    std::vector<Scope> scopes;
    std::vector<ParallelCtx> contexts;            // live parallel blocks
    std::map<std::uint32_t, bool> live;
    std::map<std::uint32_t, int> fanout_exempt;   // qubit -> active fanout count
    std::set<int> recorded_slots;

    auto report = [&](std::size_t i, std::string msg) {
        diags.push_back({i, std::move(msg)});
    };

    // Attributes a qubit touch to every parallel block with an open section.
    auto touch = [&](std::size_t i, QubitId q) {
        for (const Scope& s : scopes) {
            if (s.kind != ScopeKind::Parallel) continue;
            ParallelCtx& ctx = contexts[s.ctx];
            if (ctx.current_section < 0) continue;
            auto [it, inserted] = ctx.first_touch.emplace(q.index, ctx.current_section);
            if (!inserted && it->second != ctx.current_section) {
                auto ex = fanout_exempt.find(q.index);
                if (ex == fanout_exempt.end() || ex->second == 0) {
                    report(i, "qubit " + std::to_string(q.index) +
                                  " shared across sibling sections");
                }
                it->second = ctx.current_section;  // report each transition once
            }
        }
    };

    for (std::size_t i = 0; i < trace.instructions.size(); ++i) {
        const InstrOp& op = trace.instructions[i].op;
        if (const auto* g = std::get_if<GateInstr>(&op)) {
            std::set<std::uint32_t> seen;
            for (QubitId q : g->operands) {
                if (!seen.insert(q.index).second) report(i, "duplicate operand");
                auto it = live.find(q.index);
                if (it == live.end() || !it->second) {
                    report(i, "qubit " + std::to_string(q.index) + " not live");
                }
                touch(i, q);
            }
            if (static_cast<int>(g->operands.size()) != gate_arity(g->gate.op)) {
                report(i, "wrong operand count for " + std::string(gate_name(g->gate.op)));
            }
            if (is_measurement(g->gate.op)) {
                if (!g->result_slot) {
                    report(i, "measurement without result slot");
                } else {
                    recorded_slots.insert(*g->result_slot);
                }
            }
            if (g->gate.condition && !recorded_slots.count(*g->gate.condition)) {
                report(i, "result slot " + std::to_string(*g->gate.condition) +
                              " not yet recorded");
            }
        } else if (const auto* a = std::get_if<AllocInstr>(&op)) {
            for (QubitId q : a->ids) {
                if (live[q.index]) {
                    report(i, "qubit " + std::to_string(q.index) + " already live");
                }
                live[q.index] = true;
                touch(i, q);
            }
        } else if (const auto* r = std::get_if<ReleaseInstr>(&op)) {
            for (QubitId q : r->ids) {
                auto it = live.find(q.index);
                if (it == live.end() || !it->second) {
                    report(i, "qubit " + std::to_string(q.index) + " not live at release");
                } else {
                    it->second = false;
                }
            }
        } else if (std::holds_alternative<ParallelBeginInstr>(op)) {
            contexts.push_back({});
            scopes.push_back({ScopeKind::Parallel, 0, contexts.size() - 1});
        } else if (std::holds_alternative<ParallelEndInstr>(op)) {
            if (scopes.empty() || scopes.back().kind != ScopeKind::Parallel) {
                report(i, "unbalanced ParallelEnd");
            } else if (contexts[scopes.back().ctx].current_section >= 0) {
                report(i, "ParallelEnd with open section");
            } else {
                contexts.pop_back();
                scopes.pop_back();
            }
        } else if (const auto* sb = std::get_if<SectionBeginInstr>(&op)) {
            if (scopes.empty() || scopes.back().kind != ScopeKind::Parallel) {
                report(i, "SectionBegin outside parallel block");
            } else {
                ParallelCtx& ctx = contexts[scopes.back().ctx];
                if (ctx.current_section >= 0) {
                    report(i, "SectionBegin inside open section");
                } else {
                    if (sb->index != ctx.next_index) {
                        report(i, "unexpected section index");
                    }
                    ctx.current_section = sb->index;
                    ctx.next_index = sb->index + 1;
                }
            }
        } else if (std::holds_alternative<SectionEndInstr>(op)) {
            if (scopes.empty() || scopes.back().kind != ScopeKind::Parallel ||
                contexts[scopes.back().ctx].current_section < 0) {
                report(i, "unbalanced SectionEnd");
            } else {
                contexts[scopes.back().ctx].current_section = -1;
            }
        } else if (const auto* fb = std::get_if<FanoutBeginInstr>(&op)) {
            scopes.push_back({ScopeKind::Fanout, fb->fanout_id, i});
            for (QubitId q : fb->originals) ++fanout_exempt[q.index];
            for (const auto& replica : fb->copies) {
                for (QubitId q : replica) ++fanout_exempt[q.index];
            }
        } else if (const auto* fe = std::get_if<FanoutEndInstr>(&op)) {
            if (scopes.empty() || scopes.back().kind != ScopeKind::Fanout ||
                scopes.back().fanout_id != fe->fanout_id) {
                report(i, "unbalanced FanoutEnd");
            } else {
                // Undo the exemptions added by the matching begin.
                const auto& b = std::get<FanoutBeginInstr>(
                    trace.instructions[scopes.back().ctx].op);
                for (QubitId q : b.originals) --fanout_exempt[q.index];
                for (const auto& replica : b.copies) {
                    for (QubitId q : replica) --fanout_exempt[q.index];
                }
                scopes.pop_back();
            }
        }
    }
    if (!scopes.empty()) {
        report(trace.instructions.size() ? trace.instructions.size() - 1 : 0,
               "unclosed markers at end of trace");
    }
    return diags;
}

inline Gate inverse_gate(const Gate& g) {
    Gate inv = g;
    switch (g.op) {
        case GateOp::S: inv.op = GateOp::Sdg; break;
        case GateOp::Sdg: inv.op = GateOp::S; break;
        case GateOp::T: inv.op = GateOp::Tdg; break;
        case GateOp::Tdg: inv.op = GateOp::T; break;
        case GateOp::Rz: inv.angle = -g.angle; break;
        default: break;  // self-inverse
    }
    return inv;
}

// Reverses a gate-only block and replaces each gate by its inverse.
// Throws NotAdjointableError on measurements or classically controlled gates.
inline std::vector<Instruction> invert_gates(const std::vector<Instruction>& block) {
    std::vector<Instruction> out;
    out.reserve(block.size());
    for (auto it = block.rbegin(); it != block.rend(); ++it) {
        const auto* g = std::get_if<GateInstr>(&it->op);
        if (!g || is_measurement(g->gate.op) || g->gate.condition) {
            throw NotAdjointableError();
        }
        GateInstr inv = *g;
        inv.gate = inverse_gate(g->gate);
        out.push_back({std::move(inv), it->stack});
    }
    return out;
}

// Number of gate instructions matching the predicate. Classically controlled
// gates are counted by their inner kind; markers never count.
inline std::size_t count_gates(const Trace& trace,
                               const std::function<bool(const Gate&)>& pred) {
    std::size_t n = 0;
    for (const Instruction& instr : trace.instructions) {
        if (const GateInstr* g = as_gate(instr)) {
            if (pred(g->gate)) ++n;
        }
    }
    return n;
}

inline bool is_t_like(const Gate& g) {
    return g.op == GateOp::T || g.op == GateOp::Tdg;
}

inline std::size_t t_count(const Trace& trace) {
    return count_gates(trace, is_t_like);
}

namespace detail {

inline std::string format_angle(double angle) {
    std::ostringstream os;
    os.precision(17);
    os << angle;
    return os.str();
}

inline std::string instr_kind_string(const InstrOp& op) {
    struct Visitor {
        std::string operator()(const GateInstr& g) const {
            std::string s;
            if (g.gate.condition) {
                s += "If[r" + std::to_string(*g.gate.condition) + "]:";
            }
            s += gate_name(g.gate.op);
            if (g.gate.op == GateOp::Rz) s += "(" + format_angle(g.gate.angle) + ")";
            return s;
        }
        std::string operator()(const AllocInstr&) const { return "Alloc"; }
        std::string operator()(const ReleaseInstr&) const { return "Release"; }
        std::string operator()(const ParallelBeginInstr&) const { return "ParallelBegin"; }
        std::string operator()(const ParallelEndInstr&) const { return "ParallelEnd"; }
        std::string operator()(const SectionBeginInstr& s) const {
            return "SectionBegin(" + std::to_string(s.index) + ")";
        }
        std::string operator()(const SectionEndInstr&) const { return "SectionEnd"; }
        std::string operator()(const FanoutBeginInstr& f) const {
            return "FanoutBegin(" + std::to_string(f.fanout_id) + ")";
        }
        std::string operator()(const FanoutEndInstr& f) const {
            return "FanoutEnd(" + std::to_string(f.fanout_id) + ")";
        }
    };
    return std::visit(Visitor{}, op);
}

inline const std::vector<QubitId>* instr_qubits(const InstrOp& op) {
    if (const auto* g = std::get_if<GateInstr>(&op)) return &g->operands;
    if (const auto* a = std::get_if<AllocInstr>(&op)) return &a->ids;
    if (const auto* r = std::get_if<ReleaseInstr>(&op)) return &r->ids;
    return nullptr;
}

}  // namespace detail

// Debug dump, one instruction per line:
//   <index> <stack joined by ';'> <kind> <operands>
// The format is stable and used by golden-file tests.
inline std::string dump_trace(const Trace& trace) {
    std::string out;
    for (std::size_t i = 0; i < trace.instructions.size(); ++i) {
        const Instruction& instr = trace.instructions[i];
        out += std::to_string(i);
        out += ' ';
        if (instr.stack.empty()) {
            out += '-';
        } else {
            for (std::size_t k = 0; k < instr.stack.size(); ++k) {
                if (k) out += ';';
                out += instr.stack[k];
            }
        }
        out += ' ';
        out += detail::instr_kind_string(instr.op);
        if (const auto* qs = detail::instr_qubits(instr.op)) {
            for (QubitId q : *qs) {
                out += ' ';
                out += std::to_string(q.index);
            }
        }
        if (const auto* g = std::get_if<GateInstr>(&instr.op); g && g->result_slot) {
            out += " -> r" + std::to_string(*g->result_slot);
        }
        out += '\n';
    }
    return out;
}

// Test helper: derives watermark and result count from raw instructions.
inline Trace make_trace(std::vector<Instruction> instructions) {
    Trace t;
    t.instructions = std::move(instructions);
    std::uint32_t hi = 0;
    int results = 0;
    for (const Instruction& instr : t.instructions) {
        if (const auto* qs = detail::instr_qubits(instr.op)) {
            for (QubitId q : *qs) hi = std::max(hi, q.index + 1);
        }
        if (const auto* g = std::get_if<GateInstr>(&instr.op)) {
            if (g->result_slot) results = std::max(results, *g->result_slot + 1);
        }
        if (const auto* f = std::get_if<FanoutBeginInstr>(&instr.op)) {
            for (QubitId q : f->originals) hi = std::max(hi, q.index + 1);
            for (const auto& replica : f->copies) {
                for (QubitId q : replica) hi = std::max(hi, q.index + 1);
            }
        }
    }
    t.qubit_high_watermark = hi;
    t.result_count = results;
    return t;
}

}  // namespace qpar
