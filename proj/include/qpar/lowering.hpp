#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qpar/ast.hpp"
#include "qpar/errors.hpp"
#include "qpar/ir.hpp"
#include "qpar/parser.hpp"
#include "qpar/qubit_manager.hpp"

namespace qpar {

// Concrete entry-point arguments; qubit parameters are not allowed on entries.
struct ArgValue {
    std::variant<long long, double> value;
    static ArgValue integer(long long v) { return {v}; }
    static ArgValue real(double v) { return {v}; }
};
using EntryArgs = std::map<std::string, ArgValue>;

// Balanced binary CNOT tree entangling each copy with the original. The
// returned instructions carry empty stacks; callers attribute them.
inline std::vector<Instruction> expand_fanout_gates(QubitId original,
                                                    std::span<const QubitId> copies) {
    if (copies.empty()) {
        throw LoweringError("expand_fanout_gates requires at least one copy");
    }
    for (QubitId c : copies) {
        if (c == original) throw LoweringError("fanout copy equals original");
    }
    std::vector<Instruction> out;
    std::vector<QubitId> sources{original};
    std::size_t built = 0;
    while (built < copies.size()) {
        std::size_t wave = sources.size();
        for (std::size_t s = 0; s < wave && built < copies.size(); ++s, ++built) {
            GateInstr g;
            g.gate.op = GateOp::CNOT;
            g.operands = {sources[s], copies[built]};
            out.push_back({std::move(g), {}});
            sources.push_back(copies[built]);
        }
    }
    return out;
}

// Rewrites every parallel construct to its serial form: `parallel for`
// loses the keyword and any fanout clause; `parallel sections` becomes a
// sequence of scoped blocks (printed as `within { } apply { ... }`).
Block strip_parallel(const Block& block);

inline Stmt strip_parallel(const Stmt& stmt) {
    struct Visitor {
        Stmt operator()(const UseStmt& s) const { return Stmt{s}; }
        Stmt operator()(const LetStmt& s) const { return Stmt{s}; }
        Stmt operator()(const ForStmt& s) const {
            ForStmt out = s;
            out.parallel = false;
            out.fanout.reset();
            out.body = strip_parallel(s.body);
            return Stmt{std::move(out)};
        }
        Stmt operator()(const SectionsStmt& s) const { return Stmt{s}; }  // handled by block
        Stmt operator()(const WithinApplyStmt& s) const {
            WithinApplyStmt out = s;
            out.within = strip_parallel(s.within);
            out.apply = strip_parallel(s.apply);
            return Stmt{std::move(out)};
        }
        Stmt operator()(const IfResultStmt& s) const {
            IfResultStmt out = s;
            out.body = strip_parallel(s.body);
            return Stmt{std::move(out)};
        }
        Stmt operator()(const CallStmt& s) const { return Stmt{s}; }
    };
    return std::visit(Visitor{}, stmt.node);
}

inline Block strip_parallel(const Block& block) {
    Block out;
    for (const Stmt& stmt : block.stmts) {
        if (const auto* sections = std::get_if<SectionsStmt>(&stmt.node)) {
            for (const Block& section : sections->sections) {
                WithinApplyStmt scoped;
                scoped.line = sections->line;
                scoped.column = sections->column;
                scoped.apply = strip_parallel(section);
                out.stmts.push_back(Stmt{std::move(scoped)});
            }
        } else {
            out.stmts.push_back(strip_parallel(stmt));
        }
    }
    return out;
}

inline Ast strip_parallel(const Ast& ast) {
    Ast out;
    for (const OperationDef& op : ast.operations) {
        OperationDef copy = op;
        copy.body = strip_parallel(op.body);
        out.operations.push_back(std::move(copy));
    }
    return out;
}

namespace detail {

using Value = std::variant<long long, double, QubitId, std::vector<QubitId>>;

inline std::string at_location(int line, int column) {
    return " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
}

class Lowerer {
public:
    Lowerer(const Ast& ast, QubitManager& mgr) : ast_(ast), mgr_(mgr) {}

    Trace run(const std::string& entry, const EntryArgs& args) {
        const OperationDef* op = ast_.find(entry);
        if (!op) throw LoweringError("unknown entry operation '" + entry + "'");
        for (const Param& p : op->params) {
            if (p.type == ValueType::Qubit || p.type == ValueType::QubitArray) {
                throw LoweringError("entry operation '" + entry +
                                    "' has qubit parameters; provide a wrapper");
            }
        }
        for (const auto& [name, value] : args) {
            bool known = false;
            for (const Param& p : op->params) known |= p.name == name;
            if (!known) throw LoweringError("unknown entry argument " + name);
        }

        Env env;
        env.push_back({});
        for (const Param& p : op->params) {
            auto it = args.find(p.name);
            if (it == args.end()) {
                throw LoweringError("missing entry argument " + p.name);
            }
            if (p.type == ValueType::Int) {
                const auto* v = std::get_if<long long>(&it->second.value);
                if (!v) throw LoweringError("entry argument " + p.name + " must be an integer");
                env.back()[p.name] = *v;
            } else {
                if (const auto* v = std::get_if<double>(&it->second.value)) {
                    env.back()[p.name] = *v;
                } else {
                    env.back()[p.name] =
                        static_cast<double>(std::get<long long>(it->second.value));
                }
            }
        }

        stack_.push_back(entry);
        sink_ = &trace_.instructions;
        exec_block(op->body, env);
        stack_.pop_back();

        if (mgr_.live_count() != 0) {
            throw LoweringError("internal: live qubits left after entry returned");
        }
        trace_.qubit_high_watermark = mgr_.next_fresh();
        trace_.result_count = next_result_slot_;

        auto diags = validate_trace(trace_);
        if (!diags.empty()) {
            std::string msg = "trace validation failed: " + diags.front().message +
                              " (instruction " + std::to_string(diags.front().instruction) +
                              ")";
            if (diags.size() > 1) {
                msg += " and " + std::to_string(diags.size() - 1) + " more";
            }
            throw ValidationError(msg);
        }
        return std::move(trace_);
    }

private:
    using Scope = std::map<std::string, Value>;
    using Env = std::vector<Scope>;

    void emit(InstrOp op) { sink_->push_back({std::move(op), stack_}); }

    void bind(Env& env, const std::string& name, Value v) {
        env.back()[name] = std::move(v);
    }

    const Value& lookup(const Env& env, const std::string& name, int line, int column) const {
        for (auto it = env.rbegin(); it != env.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return found->second;
        }
        throw LoweringError("unbound identifier '" + name + "'" + at_location(line, column));
    }

    // Runs a block in a fresh scope; use-allocations are released at exit in
    // reverse allocation order.
    void exec_block(const Block& block, Env& env) {
        env.push_back({});
        std::vector<std::vector<QubitId>> allocs;
        for (const Stmt& stmt : block.stmts) exec_stmt(stmt, env, allocs);
        for (auto it = allocs.rbegin(); it != allocs.rend(); ++it) {
            std::vector<QubitId> ids(it->rbegin(), it->rend());
            mgr_.release(ids);
            emit(ReleaseInstr{std::move(ids)});
        }
        env.pop_back();
    }

    void exec_stmt(const Stmt& stmt, Env& env, std::vector<std::vector<QubitId>>& allocs) {
        struct Visitor {
            Lowerer& l;
            Env& env;
            std::vector<std::vector<QubitId>>& allocs;

            void operator()(const UseStmt& s) const {
                std::size_t count = 1;
                bool array = s.count.has_value();
                if (array) {
                    long long n = l.eval_int(*s.count, env);
                    if (n < 0) {
                        throw LoweringError("negative qubit array size" +
                                            at_location(s.line, s.column));
                    }
                    count = static_cast<std::size_t>(n);
                }
                std::vector<QubitId> ids = l.mgr_.allocate(count);
                l.emit(AllocInstr{ids});
                allocs.push_back(ids);
                if (array) {
                    l.bind(env, s.name, ids);
                } else {
                    l.bind(env, s.name, ids[0]);
                }
            }

            void operator()(const LetStmt& s) const {
                l.bind(env, s.name, l.eval(s.value, env));
            }

            void operator()(const ForStmt& s) const { l.exec_for(s, env); }

            void operator()(const SectionsStmt& s) const {
                l.emit(ParallelBeginInstr{});
                l.mgr_.begin_parallel();
                for (const Block& section : s.sections) {
                    int index = l.mgr_.begin_section();
                    l.emit(SectionBeginInstr{index});
                    l.exec_block(section, env);
                    l.emit(SectionEndInstr{});
                    l.mgr_.end_section();
                }
                l.emit(ParallelEndInstr{});
                l.mgr_.end_parallel();
            }

            void operator()(const WithinApplyStmt& s) const {
                std::vector<Instruction> prologue = l.lower_to_buffer([&] {
                    l.exec_block(s.within, env);
                });
                std::vector<Instruction> epilogue;
                try {
                    epilogue = invert_gates(prologue);
                } catch (const NotAdjointableError&) {
                    throw LoweringError("within block is not adjointable" +
                                        at_location(s.line, s.column));
                }
                for (Instruction& instr : prologue) l.sink_->push_back(std::move(instr));
                l.exec_block(s.apply, env);
                for (Instruction& instr : epilogue) l.sink_->push_back(std::move(instr));
            }

            void operator()(const IfResultStmt& s) const {
                QubitId q = l.eval_qubit(s.qubit, env);
                int slot = l.next_result_slot_++;
                GateInstr m;
                m.gate.op = s.basis;
                m.operands = {q};
                m.result_slot = slot;
                l.emit(std::move(m));

                std::vector<Instruction> body = l.lower_to_buffer([&] {
                    l.exec_block(s.body, env);
                });
                for (Instruction& instr : body) {
                    auto* g = std::get_if<GateInstr>(&instr.op);
                    if (!g || is_measurement(g->gate.op) || g->gate.condition) {
                        throw LoweringError(
                            "measurement conditional bodies may contain only gates" +
                            at_location(s.line, s.column));
                    }
                    g->gate.condition = slot;
                    l.sink_->push_back(std::move(instr));
                }
            }

            void operator()(const CallStmt& s) const { l.exec_call(s, env); }
        };
        std::visit(Visitor{*this, env, allocs}, stmt.node);
    }

    void exec_for(const ForStmt& s, Env& env) {
        struct Item {
            Value value;
        };
        std::vector<Value> items;
        if (s.iterable.is_range) {
            long long from = eval_int(s.iterable.from, env);
            long long to = eval_int(s.iterable.to, env);
            for (long long v = from; v <= to; ++v) items.push_back(v);
        } else {
            const Value& v = lookup(env, s.iterable.array, s.line, s.column);
            const auto* ids = std::get_if<std::vector<QubitId>>(&v);
            if (!ids) {
                throw LoweringError("cannot iterate over '" + s.iterable.array + "'" +
                                    at_location(s.line, s.column));
            }
            for (QubitId q : *ids) items.push_back(q);
        }

        if (!s.parallel) {
            for (Value& item : items) {
                env.push_back({});
                env.back()[s.var] = item;
                exec_block(s.body, env);
                env.pop_back();
            }
            return;
        }

        std::optional<int> fanout_id;
        std::vector<Instruction> tree;
        bool fanout_is_array = false;
        if (s.fanout) {
            long long replicas = eval_int(s.fanout->replicas, env);
            if (replicas < 1) {
                throw LoweringError("fanout replica count < 1" +
                                    at_location(s.line, s.column));
            }
            const Value& v = lookup(env, s.fanout->qubits, s.line, s.column);
            std::vector<QubitId> originals;
            if (const auto* q = std::get_if<QubitId>(&v)) {
                originals = {*q};
            } else if (const auto* ids = std::get_if<std::vector<QubitId>>(&v)) {
                originals = *ids;
                fanout_is_array = true;
            } else {
                throw LoweringError("fanout target '" + s.fanout->qubits +
                                    "' is not a qubit binding" + at_location(s.line, s.column));
            }
            // Copies are drawn from the scope current at Fanout time, before
            // the parallel block opens.
            int fid = mgr_.fanout_register(originals, replicas);
            fanout_id = fid;

            FanoutBeginInstr begin;
            begin.fanout_id = fid;
            begin.originals = originals;
            std::vector<QubitId> flat_copies;
            for (long long r = 1; r < replicas; ++r) {
                std::vector<QubitId> replica = mgr_.get_copies(fid, static_cast<int>(r));
                begin.copies.push_back(replica);
                flat_copies.insert(flat_copies.end(), replica.begin(), replica.end());
            }
            emit(std::move(begin));
            if (!flat_copies.empty()) emit(AllocInstr{flat_copies});

            for (std::size_t j = 0; j < originals.size(); ++j) {
                std::vector<QubitId> per_original;
                for (long long r = 1; r < replicas; ++r) {
                    per_original.push_back(mgr_.get_copies(fid, static_cast<int>(r))[j]);
                }
                if (!per_original.empty()) {
                    for (Instruction& instr : expand_fanout_gates(originals[j], per_original)) {
                        tree.push_back(instr);
                        instr.stack = stack_;
                        sink_->push_back(std::move(instr));
                    }
                }
            }
        }

        emit(ParallelBeginInstr{});
        mgr_.begin_parallel();
        for (Value& item : items) {
            int index = mgr_.begin_section();
            emit(SectionBeginInstr{index});
            env.push_back({});
            if (fanout_id) {
                std::vector<QubitId> replica = mgr_.get_copies(*fanout_id, index);
                if (fanout_is_array) {
                    env.back()[s.fanout->qubits] = replica;
                } else {
                    env.back()[s.fanout->qubits] = replica[0];
                }
            }
            env.back()[s.var] = item;
            exec_block(s.body, env);
            env.pop_back();
            emit(SectionEndInstr{});
            mgr_.end_section();
        }
        emit(ParallelEndInstr{});
        mgr_.end_parallel();

        if (fanout_id) {
            QubitManager::FanoutRecord rec = mgr_.unfanout();
            for (Instruction& instr : invert_gates(tree)) {
                instr.stack = stack_;
                sink_->push_back(std::move(instr));
            }
            std::vector<QubitId> flat;
            for (const auto& replica : rec.copies) {
                flat.insert(flat.end(), replica.begin(), replica.end());
            }
            if (!flat.empty()) emit(ReleaseInstr{std::move(flat)});
            emit(FanoutEndInstr{rec.fanout_id});
        }
    }

    void exec_call(const CallStmt& s, Env& env) {
        if (s.adjoint) {
            CallStmt forward = s;
            forward.adjoint = false;
            std::vector<Instruction> body = lower_to_buffer([&] { exec_call(forward, env); });
            std::vector<Instruction> inverse;
            try {
                inverse = invert_gates(body);
            } catch (const NotAdjointableError&) {
                throw LoweringError("'" + s.callee + "' is not adjointable" +
                                    at_location(s.line, s.column));
            }
            for (Instruction& instr : inverse) sink_->push_back(std::move(instr));
            return;
        }

        if (auto intrinsic = gate_from_name(s.callee)) {
            GateInstr g;
            g.gate.op = *intrinsic;
            std::size_t arg0 = 0;
            if (*intrinsic == GateOp::Rz) {
                g.gate.angle = eval_real(s.args[0], env);
                arg0 = 1;
            }
            for (std::size_t i = arg0; i < s.args.size(); ++i) {
                g.operands.push_back(eval_qubit(s.args[i], env));
            }
            emit(std::move(g));
            return;
        }

        const OperationDef* callee = ast_.find(s.callee);
        if (!callee) {
            throw LoweringError("unknown callee '" + s.callee + "'" +
                                at_location(s.line, s.column));
        }
        if (call_depth_ >= kMaxCallDepth) {
            throw LoweringError("call depth exceeded at '" + s.callee + "'" +
                                at_location(s.line, s.column));
        }

        Env callee_env;
        callee_env.push_back({});
        for (std::size_t i = 0; i < callee->params.size(); ++i) {
            const Param& p = callee->params[i];
            switch (p.type) {
                case ValueType::Int:
                    callee_env.back()[p.name] = eval_int(s.args[i], env);
                    break;
                case ValueType::Real:
                    callee_env.back()[p.name] = eval_real(s.args[i], env);
                    break;
                case ValueType::Qubit:
                    callee_env.back()[p.name] = eval_qubit(s.args[i], env);
                    break;
                case ValueType::QubitArray: {
                    Value v = eval(s.args[i], env);
                    if (!std::holds_alternative<std::vector<QubitId>>(v)) {
                        throw LoweringError("argument " + std::to_string(i + 1) + " of '" +
                                            s.callee + "' must be a qubit array" +
                                            at_location(s.line, s.column));
                    }
                    callee_env.back()[p.name] = std::move(v);
                    break;
                }
            }
        }

        ++call_depth_;
        stack_.push_back(callee->name);
        exec_block(callee->body, callee_env);
        stack_.pop_back();
        --call_depth_;
    }

    template <typename Fn>
    std::vector<Instruction> lower_to_buffer(Fn&& fn) {
        std::vector<Instruction> buffer;
        std::vector<Instruction>* saved = sink_;
        sink_ = &buffer;
        try {
            fn();
        } catch (...) {
            sink_ = saved;
            throw;
        }
        sink_ = saved;
        return buffer;
    }

    Value eval(const Expr& e, Env& env) {
        switch (e.kind) {
            case Expr::Kind::IntLit: return e.int_value;
            case Expr::Kind::RealLit: return e.real_value;
            case Expr::Kind::Pi: return std::numbers::pi_v<double>;
            case Expr::Kind::Ident: return lookup(env, e.name, e.line, e.column);
            case Expr::Kind::Index: {
                const Value& v = lookup(env, e.name, e.line, e.column);
                const auto* ids = std::get_if<std::vector<QubitId>>(&v);
                if (!ids) {
                    throw LoweringError("'" + e.name + "' is not indexable" +
                                        at_location(e.line, e.column));
                }
                long long idx = eval_int(e.children[0], env);
                if (idx < 0 || idx >= static_cast<long long>(ids->size())) {
                    throw LoweringError("index " + std::to_string(idx) +
                                        " out of range for '" + e.name + "' (size " +
                                        std::to_string(ids->size()) + ")" +
                                        at_location(e.line, e.column));
                }
                return (*ids)[static_cast<std::size_t>(idx)];
            }
            case Expr::Kind::Len: {
                const Value& v = lookup(env, e.name, e.line, e.column);
                const auto* ids = std::get_if<std::vector<QubitId>>(&v);
                if (!ids) {
                    throw LoweringError("len() requires a qubit array" +
                                        at_location(e.line, e.column));
                }
                return static_cast<long long>(ids->size());
            }
            case Expr::Kind::Neg: {
                Value v = eval(e.children[0], env);
                if (const auto* i = std::get_if<long long>(&v)) return -*i;
                if (const auto* d = std::get_if<double>(&v)) return -*d;
                throw LoweringError("operand of unary '-' must be numeric" +
                                    at_location(e.line, e.column));
            }
            case Expr::Kind::Binary: {
                Value lhs = eval(e.children[0], env);
                Value rhs = eval(e.children[1], env);
                const auto* li = std::get_if<long long>(&lhs);
                const auto* ld = std::get_if<double>(&lhs);
                const auto* ri = std::get_if<long long>(&rhs);
                const auto* rd = std::get_if<double>(&rhs);
                if ((!li && !ld) || (!ri && !rd)) {
                    throw LoweringError("arithmetic operands must be numeric" +
                                        at_location(e.line, e.column));
                }
                if (li && ri) {
                    long long a = *li;
                    long long b = *ri;
                    switch (e.op) {
                        case BinOp::Add: return a + b;
                        case BinOp::Sub: return a - b;
                        case BinOp::Mul: return a * b;
                        case BinOp::Div:
                            if (b == 0) {
                                throw LoweringError("division by zero" +
                                                    at_location(e.line, e.column));
                            }
                            return a / b;  // truncates toward zero
                    }
                }
                double a = li ? static_cast<double>(*li) : *ld;
                double b = ri ? static_cast<double>(*ri) : *rd;
                switch (e.op) {
                    case BinOp::Add: return a + b;
                    case BinOp::Sub: return a - b;
                    case BinOp::Mul: return a * b;
                    case BinOp::Div:
                        if (b == 0.0) {
                            throw LoweringError("division by zero" +
                                                at_location(e.line, e.column));
                        }
                        return a / b;
                }
                return 0LL;
            }
        }
        return 0LL;
    }

    long long eval_int(const Expr& e, Env& env) {
        Value v = eval(e, env);
        if (const auto* i = std::get_if<long long>(&v)) return *i;
        throw LoweringError("expected an integer expression" + at_location(e.line, e.column));
    }

    double eval_real(const Expr& e, Env& env) {
        Value v = eval(e, env);
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
        throw LoweringError("expected a numeric expression" + at_location(e.line, e.column));
    }

    QubitId eval_qubit(const Expr& e, Env& env) {
        Value v = eval(e, env);
        if (const auto* q = std::get_if<QubitId>(&v)) return *q;
        throw LoweringError("expected a qubit expression" + at_location(e.line, e.column));
    }

    static constexpr int kMaxCallDepth = 512;

    const Ast& ast_;
    QubitManager& mgr_;
    Trace trace_;
    std::vector<std::string> stack_;
    std::vector<Instruction>* sink_ = nullptr;
    int next_result_slot_ = 0;
    int call_depth_ = 0;
};

}  // namespace detail

// Classically interprets `entry` with the given arguments, applying the
// parallel-construct rewrites and drawing every qubit from `manager`.
// The produced trace is validated before it is returned.
inline Trace trace_program(const Ast& ast, const std::string& entry, const EntryArgs& args,
                           QubitManager& manager) {
    return detail::Lowerer(ast, manager).run(entry, args);
}

inline Trace trace_program(const Ast& ast, const std::string& entry,
                           const EntryArgs& args = {}) {
    QubitManager manager;
    return trace_program(ast, entry, args, manager);
}

}  // namespace qpar
