#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qpar/ir.hpp"

namespace qpar {

enum class ValueType { Int, Real, Qubit, QubitArray };

inline std::string_view value_type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "Int";
        case ValueType::Real: return "Double";
        case ValueType::Qubit: return "Qubit";
        case ValueType::QubitArray: return "Qubit[]";
    }
    return "?";
}

enum class BinOp { Add, Sub, Mul, Div };

// Expression tree with value semantics; children are held inline.
struct Expr {
    enum class Kind { IntLit, RealLit, Pi, Ident, Index, Len, Neg, Binary };

    Kind kind = Kind::IntLit;
    long long int_value = 0;      // IntLit
    double real_value = 0.0;      // RealLit
    std::string name;             // Ident, Index, Len
    BinOp op = BinOp::Add;        // Binary
    std::vector<Expr> children;   // Index: [subscript]; Neg: [operand]; Binary: [lhs, rhs]
    int line = 0;
    int column = 0;

    static Expr int_lit(long long v) {
        Expr e;
        e.kind = Kind::IntLit;
        e.int_value = v;
        return e;
    }
    static Expr real_lit(double v) {
        Expr e;
        e.kind = Kind::RealLit;
        e.real_value = v;
        return e;
    }
    static Expr pi() {
        Expr e;
        e.kind = Kind::Pi;
        return e;
    }
    static Expr ident(std::string n) {
        Expr e;
        e.kind = Kind::Ident;
        e.name = std::move(n);
        return e;
    }
    static Expr index(std::string n, Expr subscript) {
        Expr e;
        e.kind = Kind::Index;
        e.name = std::move(n);
        e.children.push_back(std::move(subscript));
        return e;
    }
    static Expr len(std::string n) {
        Expr e;
        e.kind = Kind::Len;
        e.name = std::move(n);
        return e;
    }
    static Expr neg(Expr operand) {
        Expr e;
        e.kind = Kind::Neg;
        e.children.push_back(std::move(operand));
        return e;
    }
    static Expr binary(BinOp op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = Kind::Binary;
        e.op = op;
        e.children.push_back(std::move(lhs));
        e.children.push_back(std::move(rhs));
        return e;
    }
};

struct FanoutClause {
    std::string qubits;
    Expr replicas;
};

struct Iterable {
    bool is_range = true;
    Expr from;          // range only
    Expr to;            // range only
    std::string array;  // array iteration only
};

struct Stmt;

struct Block {
    std::vector<Stmt> stmts;
};

struct UseStmt {
    std::string name;
    std::optional<Expr> count;  // set: use x = Qubit[count]; unset: use x = Qubit()
    int line = 0, column = 0;
};

struct LetStmt {
    std::string name;
    Expr value;
    int line = 0, column = 0;
};

struct ForStmt {
    std::string var;
    Iterable iterable;
    bool parallel = false;
    std::optional<FanoutClause> fanout;
    Block body;
    int line = 0, column = 0;
};

struct SectionsStmt {
    std::vector<Block> sections;  // nonempty by construction
    int line = 0, column = 0;
};

struct WithinApplyStmt {
    Block within;
    Block apply;
    int line = 0, column = 0;
};

struct IfResultStmt {
    GateOp basis = GateOp::MeasureZ;  // MeasureZ (MResetZ) or MeasureXReset (MResetX)
    Expr qubit;
    Block body;
    int line = 0, column = 0;
};

struct CallStmt {
    bool adjoint = false;
    std::string callee;
    std::vector<Expr> args;
    int line = 0, column = 0;
};

struct Stmt {
    std::variant<UseStmt, LetStmt, ForStmt, SectionsStmt, WithinApplyStmt, IfResultStmt,
                 CallStmt>
        node;
};

struct Param {
    std::string name;
    ValueType type = ValueType::Int;
};

struct OperationDef {
    std::string name;
    std::vector<Param> params;
    Block body;
    int line = 0, column = 0;
};

struct Ast {
    std::vector<OperationDef> operations;

    const OperationDef* find(std::string_view name) const {
        for (const OperationDef& op : operations) {
            if (op.name == name) return &op;
        }
        return nullptr;
    }
};

// --- Structural equality (source positions ignored) ---

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::IntLit:
            if (a.int_value != b.int_value) return false;
            break;
        case Expr::Kind::RealLit:
            if (a.real_value != b.real_value) return false;
            break;
        case Expr::Kind::Pi:
            break;
        case Expr::Kind::Ident:
        case Expr::Kind::Index:
        case Expr::Kind::Len:
            if (a.name != b.name) return false;
            break;
        case Expr::Kind::Neg:
            break;
        case Expr::Kind::Binary:
            if (a.op != b.op) return false;
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}

bool structurally_equal(const Block& a, const Block& b);

inline bool structurally_equal(const Iterable& a, const Iterable& b) {
    if (a.is_range != b.is_range) return false;
    if (a.is_range) {
        return structurally_equal(a.from, b.from) && structurally_equal(a.to, b.to);
    }
    return a.array == b.array;
}

inline bool structurally_equal(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) return false;
    struct Visitor {
        const Stmt& rhs;
        bool operator()(const UseStmt& x) const {
            const auto& y = std::get<UseStmt>(rhs.node);
            if (x.name != y.name || x.count.has_value() != y.count.has_value()) return false;
            return !x.count || structurally_equal(*x.count, *y.count);
        }
        bool operator()(const LetStmt& x) const {
            const auto& y = std::get<LetStmt>(rhs.node);
            return x.name == y.name && structurally_equal(x.value, y.value);
        }
        bool operator()(const ForStmt& x) const {
            const auto& y = std::get<ForStmt>(rhs.node);
            if (x.var != y.var || x.parallel != y.parallel) return false;
            if (!structurally_equal(x.iterable, y.iterable)) return false;
            if (x.fanout.has_value() != y.fanout.has_value()) return false;
            if (x.fanout &&
                (x.fanout->qubits != y.fanout->qubits ||
                 !structurally_equal(x.fanout->replicas, y.fanout->replicas))) {
                return false;
            }
            return structurally_equal(x.body, y.body);
        }
        bool operator()(const SectionsStmt& x) const {
            const auto& y = std::get<SectionsStmt>(rhs.node);
            if (x.sections.size() != y.sections.size()) return false;
            for (std::size_t i = 0; i < x.sections.size(); ++i) {
                if (!structurally_equal(x.sections[i], y.sections[i])) return false;
            }
            return true;
        }
        bool operator()(const WithinApplyStmt& x) const {
            const auto& y = std::get<WithinApplyStmt>(rhs.node);
            return structurally_equal(x.within, y.within) &&
                   structurally_equal(x.apply, y.apply);
        }
        bool operator()(const IfResultStmt& x) const {
            const auto& y = std::get<IfResultStmt>(rhs.node);
            return x.basis == y.basis && structurally_equal(x.qubit, y.qubit) &&
                   structurally_equal(x.body, y.body);
        }
        bool operator()(const CallStmt& x) const {
            const auto& y = std::get<CallStmt>(rhs.node);
            if (x.adjoint != y.adjoint || x.callee != y.callee ||
                x.args.size() != y.args.size()) {
                return false;
            }
            for (std::size_t i = 0; i < x.args.size(); ++i) {
                if (!structurally_equal(x.args[i], y.args[i])) return false;
            }
            return true;
        }
    };
    return std::visit(Visitor{b}, a.node);
}

inline bool structurally_equal(const Block& a, const Block& b) {
    if (a.stmts.size() != b.stmts.size()) return false;
    for (std::size_t i = 0; i < a.stmts.size(); ++i) {
        if (!structurally_equal(a.stmts[i], b.stmts[i])) return false;
    }
    return true;
}

inline bool structurally_equal(const Ast& a, const Ast& b) {
    if (a.operations.size() != b.operations.size()) return false;
    for (std::size_t i = 0; i < a.operations.size(); ++i) {
        const OperationDef& x = a.operations[i];
        const OperationDef& y = b.operations[i];
        if (x.name != y.name || x.params.size() != y.params.size()) return false;
        for (std::size_t k = 0; k < x.params.size(); ++k) {
            if (x.params[k].name != y.params[k].name || x.params[k].type != y.params[k].type) {
                return false;
            }
        }
        if (!structurally_equal(x.body, y.body)) return false;
    }
    return true;
}

// --- Canonical printing ---

namespace detail {

inline int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            return (e.op == BinOp::Mul || e.op == BinOp::Div) ? 2 : 1;
        case Expr::Kind::Neg:
            return 3;
        default:
            return 4;
    }
}

inline void print_expr(std::ostream& os, const Expr& e) {
    auto child = [&](const Expr& c, bool needs_paren) {
        if (needs_paren) os << '(';
        print_expr(os, c);
        if (needs_paren) os << ')';
    };
    switch (e.kind) {
        case Expr::Kind::IntLit:
            os << e.int_value;
            break;
        case Expr::Kind::RealLit: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << e.real_value;
            std::string s = tmp.str();
            if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
                s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
                s += ".0";
            }
            os << s;
            break;
        }
        case Expr::Kind::Pi:
            os << "pi";
            break;
        case Expr::Kind::Ident:
            os << e.name;
            break;
        case Expr::Kind::Index:
            os << e.name << '[';
            print_expr(os, e.children[0]);
            os << ']';
            break;
        case Expr::Kind::Len:
            os << "len(" << e.name << ')';
            break;
        case Expr::Kind::Neg:
            os << '-';
            child(e.children[0], precedence(e.children[0]) < precedence(e));
            break;
        case Expr::Kind::Binary: {
            int prec = precedence(e);
            const Expr& lhs = e.children[0];
            const Expr& rhs = e.children[1];
            child(lhs, precedence(lhs) < prec);
            switch (e.op) {
                case BinOp::Add: os << " + "; break;
                case BinOp::Sub: os << " - "; break;
                case BinOp::Mul: os << " * "; break;
                case BinOp::Div: os << " / "; break;
            }
            // Right operand of equal precedence keeps its own grouping.
            child(rhs, precedence(rhs) <= prec && rhs.kind == Expr::Kind::Binary);
            break;
        }
    }
}

inline void print_block(std::ostream& os, const Block& block, int indent);

inline void print_indent(std::ostream& os, int indent) {
    for (int i = 0; i < indent; ++i) os << "    ";
}

inline void print_stmt(std::ostream& os, const Stmt& stmt, int indent) {
    struct Visitor {
        std::ostream& os;
        int indent;
        void operator()(const UseStmt& s) const {
            print_indent(os, indent);
            os << "use " << s.name << " = Qubit";
            if (s.count) {
                os << '[';
                print_expr(os, *s.count);
                os << ']';
            } else {
                os << "()";
            }
            os << ";\n";
        }
        void operator()(const LetStmt& s) const {
            print_indent(os, indent);
            os << "let " << s.name << " = ";
            print_expr(os, s.value);
            os << ";\n";
        }
        void operator()(const ForStmt& s) const {
            print_indent(os, indent);
            if (s.parallel) os << "parallel ";
            os << "for " << s.var << " in ";
            if (s.iterable.is_range) {
                print_expr(os, s.iterable.from);
                os << "..";
                print_expr(os, s.iterable.to);
            } else {
                os << s.iterable.array;
            }
            if (s.fanout) {
                os << " fanout(" << s.fanout->qubits << ", ";
                print_expr(os, s.fanout->replicas);
                os << ')';
            }
            os << ' ';
            print_block(os, s.body, indent);
            os << '\n';
        }
        void operator()(const SectionsStmt& s) const {
            print_indent(os, indent);
            os << "parallel sections {\n";
            for (const Block& section : s.sections) {
                print_indent(os, indent + 1);
                os << "section ";
                print_block(os, section, indent + 1);
                os << '\n';
            }
            print_indent(os, indent);
            os << "}\n";
        }
        void operator()(const WithinApplyStmt& s) const {
            print_indent(os, indent);
            os << "within ";
            print_block(os, s.within, indent);
            os << " apply ";
            print_block(os, s.apply, indent);
            os << '\n';
        }
        void operator()(const IfResultStmt& s) const {
            print_indent(os, indent);
            os << "if " << (s.basis == GateOp::MeasureZ ? "MResetZ" : "MResetX") << '(';
            print_expr(os, s.qubit);
            os << ") == One ";
            print_block(os, s.body, indent);
            os << '\n';
        }
        void operator()(const CallStmt& s) const {
            print_indent(os, indent);
            if (s.adjoint) os << "Adjoint ";
            os << s.callee << '(';
            for (std::size_t i = 0; i < s.args.size(); ++i) {
                if (i) os << ", ";
                print_expr(os, s.args[i]);
            }
            os << ");\n";
        }
    };
    std::visit(Visitor{os, indent}, stmt.node);
}

inline void print_block(std::ostream& os, const Block& block, int indent) {
    os << "{\n";
    for (const Stmt& stmt : block.stmts) print_stmt(os, stmt, indent + 1);
    print_indent(os, indent);
    os << '}';
}

}  // namespace detail

// Emits canonical source text; parsing it back yields a structurally equal AST.
inline std::string pretty_print(const Ast& ast) {
    std::ostringstream os;
    bool first = true;
    for (const OperationDef& op : ast.operations) {
        if (!first) os << '\n';
        first = false;
        os << "operation " << op.name << '(';
        for (std::size_t i = 0; i < op.params.size(); ++i) {
            if (i) os << ", ";
            os << op.params[i].name << " : " << value_type_name(op.params[i].type);
        }
        os << ") : Unit ";
        detail::print_block(os, op.body, 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace qpar
