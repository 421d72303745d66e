#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qpar/ast.hpp"
#include "qpar/errors.hpp"

namespace qpar {

namespace detail {

enum class Tok {
    Ident,
    IntLit,
    RealLit,
    // keywords
    KwOperation,
    KwUse,
    KwLet,
    KwFor,
    KwIn,
    KwParallel,
    KwSections,
    KwSection,
    KwFanout,
    KwWithin,
    KwApply,
    KwIf,
    KwAdjoint,
    KwOne,
    KwUnit,
    KwInt,
    KwDouble,
    KwQubit,
    KwPi,
    KwLen,
    KwMResetZ,
    KwMResetX,
    // symbols
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Assign,
    EqEq,
    DotDot,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    long long int_value = 0;
    double real_value = 0.0;
    int line = 1;
    int column = 1;
};

inline std::string token_desc(Tok kind) {
    switch (kind) {
        case Tok::Ident: return "identifier";
        case Tok::IntLit: return "integer literal";
        case Tok::RealLit: return "real literal";
        case Tok::KwOperation: return "'operation'";
        case Tok::KwUse: return "'use'";
        case Tok::KwLet: return "'let'";
        case Tok::KwFor: return "'for'";
        case Tok::KwIn: return "'in'";
        case Tok::KwParallel: return "'parallel'";
        case Tok::KwSections: return "'sections'";
        case Tok::KwSection: return "'section'";
        case Tok::KwFanout: return "'fanout'";
        case Tok::KwWithin: return "'within'";
        case Tok::KwApply: return "'apply'";
        case Tok::KwIf: return "'if'";
        case Tok::KwAdjoint: return "'Adjoint'";
        case Tok::KwOne: return "'One'";
        case Tok::KwUnit: return "'Unit'";
        case Tok::KwInt: return "'Int'";
        case Tok::KwDouble: return "'Double'";
        case Tok::KwQubit: return "'Qubit'";
        case Tok::KwPi: return "'pi'";
        case Tok::KwLen: return "'len'";
        case Tok::KwMResetZ: return "'MResetZ'";
        case Tok::KwMResetX: return "'MResetX'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Colon: return "':'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Assign: return "'='";
        case Tok::EqEq: return "'=='";
        case Tok::DotDot: return "'..'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Eof: return "end of input";
    }
    return "?";
}

inline std::vector<Token> tokenize(std::string_view source) {
    static const std::map<std::string_view, Tok> keywords = {
        {"operation", Tok::KwOperation}, {"use", Tok::KwUse},
        {"let", Tok::KwLet},             {"for", Tok::KwFor},
        {"in", Tok::KwIn},               {"parallel", Tok::KwParallel},
        {"sections", Tok::KwSections},   {"section", Tok::KwSection},
        {"fanout", Tok::KwFanout},       {"within", Tok::KwWithin},
        {"apply", Tok::KwApply},         {"if", Tok::KwIf},
        {"Adjoint", Tok::KwAdjoint},     {"One", Tok::KwOne},
        {"Unit", Tok::KwUnit},           {"Int", Tok::KwInt},
        {"Double", Tok::KwDouble},       {"Qubit", Tok::KwQubit},
        {"pi", Tok::KwPi},               {"len", Tok::KwLen},
        {"MResetZ", Tok::KwMResetZ},     {"MResetX", Tok::KwMResetX},
    };

    std::vector<Token> tokens;
    int line = 1;
    int column = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (source[i + k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        i += n;
    };

    while (i < source.size()) {
        char c = source[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
            while (i < source.size() && source[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = column;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < source.size() &&
                   (std::isalnum(static_cast<unsigned char>(source[j])) || source[j] == '_')) {
                ++j;
            }
            tok.text = std::string(source.substr(i, j - i));
            auto kw = keywords.find(tok.text);
            tok.kind = kw == keywords.end() ? Tok::Ident : kw->second;
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < source.size() && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
            bool real = false;
            if (j + 1 < source.size() && source[j] == '.' && source[j + 1] != '.' &&
                std::isdigit(static_cast<unsigned char>(source[j + 1]))) {
                real = true;
                ++j;
                while (j < source.size() &&
                       std::isdigit(static_cast<unsigned char>(source[j]))) {
                    ++j;
                }
            }
            if (j < source.size() && (source[j] == 'e' || source[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < source.size() && (source[k] == '+' || source[k] == '-')) ++k;
                if (k < source.size() && std::isdigit(static_cast<unsigned char>(source[k]))) {
                    real = true;
                    ++k;
                    while (k < source.size() &&
                           std::isdigit(static_cast<unsigned char>(source[k]))) {
                        ++k;
                    }
                    j = k;
                }
            }
            std::string text(source.substr(i, j - i));
            if (real) {
                tok.kind = Tok::RealLit;
                tok.real_value = std::stod(text);
            } else {
                tok.kind = Tok::IntLit;
                try {
                    tok.int_value = std::stoll(text);
                } catch (const std::out_of_range&) {
                    throw ParseError("integer literal out of range", line, column);
                }
            }
            tok.text = std::move(text);
            advance(j - i);
        } else {
            switch (c) {
                case '(': tok.kind = Tok::LParen; advance(1); break;
                case ')': tok.kind = Tok::RParen; advance(1); break;
                case '{': tok.kind = Tok::LBrace; advance(1); break;
                case '}': tok.kind = Tok::RBrace; advance(1); break;
                case '[': tok.kind = Tok::LBracket; advance(1); break;
                case ']': tok.kind = Tok::RBracket; advance(1); break;
                case ':': tok.kind = Tok::Colon; advance(1); break;
                case ';': tok.kind = Tok::Semi; advance(1); break;
                case ',': tok.kind = Tok::Comma; advance(1); break;
                case '+': tok.kind = Tok::Plus; advance(1); break;
                case '*': tok.kind = Tok::Star; advance(1); break;
                case '/': tok.kind = Tok::Slash; advance(1); break;
                case '-': tok.kind = Tok::Minus; advance(1); break;
                case '=':
                    if (i + 1 < source.size() && source[i + 1] == '=') {
                        tok.kind = Tok::EqEq;
                        advance(2);
                    } else {
                        tok.kind = Tok::Assign;
                        advance(1);
                    }
                    break;
                case '.':
                    if (i + 1 < source.size() && source[i + 1] == '.') {
                        tok.kind = Tok::DotDot;
                        advance(2);
                    } else {
                        throw ParseError("unexpected character '.'", line, column);
                    }
                    break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", line,
                                     column);
            }
        }
        tokens.push_back(std::move(tok));
    }
    Token eof;
    eof.kind = Tok::Eof;
    eof.line = line;
    eof.column = column;
    tokens.push_back(eof);
    return tokens;
}

class Parser {
public:
    explicit Parser(std::string_view source) : tokens_(tokenize(source)) {}

    Ast parse_program() {
        Ast ast;
        while (!at(Tok::Eof)) {
            ast.operations.push_back(parse_operation());
        }
        return ast;
    }

private:
    const Token& peek(int offset = 0) const {
        std::size_t i = pos_ + offset;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at(Tok kind) const { return peek().kind == kind; }
    Token next() { return tokens_[pos_++]; }
    Token expect(Tok kind) {
        if (!at(kind)) {
            const Token& t = peek();
            throw ParseError("expected " + token_desc(kind) + ", found " + token_desc(t.kind),
                             t.line, t.column);
        }
        return next();
    }
    bool accept(Tok kind) {
        if (at(kind)) {
            ++pos_;
            return true;
        }
        return false;
    }

    OperationDef parse_operation() {
        const Token& kw = expect(Tok::KwOperation);
        OperationDef op;
        op.line = kw.line;
        op.column = kw.column;
        op.name = expect(Tok::Ident).text;
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            do {
                Param p;
                p.name = expect(Tok::Ident).text;
                expect(Tok::Colon);
                if (accept(Tok::KwInt)) {
                    p.type = ValueType::Int;
                } else if (accept(Tok::KwDouble)) {
                    p.type = ValueType::Real;
                } else {
                    expect(Tok::KwQubit);
                    if (accept(Tok::LBracket)) {
                        expect(Tok::RBracket);
                        p.type = ValueType::QubitArray;
                    } else {
                        p.type = ValueType::Qubit;
                    }
                }
                op.params.push_back(std::move(p));
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        expect(Tok::Colon);
        expect(Tok::KwUnit);
        op.body = parse_block();
        return op;
    }

    Block parse_block() {
        expect(Tok::LBrace);
        Block block;
        while (!at(Tok::RBrace)) block.stmts.push_back(parse_stmt());
        expect(Tok::RBrace);
        return block;
    }

    Stmt parse_stmt() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::KwUse: return parse_use();
            case Tok::KwLet: return parse_let();
            case Tok::KwFor: return parse_for(false);
            case Tok::KwParallel: {
                next();
                if (at(Tok::KwFor)) return parse_for(true);
                expect(Tok::KwSections);
                return parse_sections(t);
            }
            case Tok::KwWithin: return parse_within();
            case Tok::KwIf: return parse_if_result();
            case Tok::KwAdjoint:
            case Tok::Ident: return parse_call();
            default:
                throw ParseError(
                    "expected a statement ('use', 'let', 'for', 'parallel', 'within', "
                    "'if', 'Adjoint', or a call), found " +
                        token_desc(t.kind),
                    t.line, t.column);
        }
    }

    Stmt parse_use() {
        const Token& kw = expect(Tok::KwUse);
        UseStmt s;
        s.line = kw.line;
        s.column = kw.column;
        s.name = expect(Tok::Ident).text;
        expect(Tok::Assign);
        expect(Tok::KwQubit);
        if (accept(Tok::LBracket)) {
            s.count = parse_expr();
            expect(Tok::RBracket);
        } else {
            expect(Tok::LParen);
            expect(Tok::RParen);
        }
        expect(Tok::Semi);
        return Stmt{std::move(s)};
    }

    Stmt parse_let() {
        const Token& kw = expect(Tok::KwLet);
        LetStmt s;
        s.line = kw.line;
        s.column = kw.column;
        s.name = expect(Tok::Ident).text;
        expect(Tok::Assign);
        s.value = parse_expr();
        expect(Tok::Semi);
        return Stmt{std::move(s)};
    }

    Stmt parse_for(bool parallel) {
        const Token& kw = expect(Tok::KwFor);
        ForStmt s;
        s.line = kw.line;
        s.column = kw.column;
        s.parallel = parallel;
        s.var = expect(Tok::Ident).text;
        expect(Tok::KwIn);
        s.iterable = parse_iterable();
        if (at(Tok::KwFanout)) {
            const Token& ft = next();
            if (!parallel) {
                throw ParseError("fanout clause requires a parallel for", ft.line, ft.column);
            }
            expect(Tok::LParen);
            FanoutClause clause;
            clause.qubits = expect(Tok::Ident).text;
            expect(Tok::Comma);
            clause.replicas = parse_expr();
            expect(Tok::RParen);
            s.fanout = std::move(clause);
        }
        s.body = parse_block();
        return Stmt{std::move(s)};
    }

    Iterable parse_iterable() {
        Iterable it;
        Expr first = parse_expr();
        if (accept(Tok::DotDot)) {
            it.is_range = true;
            it.from = std::move(first);
            it.to = parse_expr();
        } else {
            if (first.kind != Expr::Kind::Ident) {
                const Token& t = peek();
                throw ParseError("iterable must be a range or an array identifier", t.line,
                                 t.column);
            }
            it.is_range = false;
            it.array = first.name;
        }
        return it;
    }

    Stmt parse_sections(const Token& start) {
        SectionsStmt s;
        s.line = start.line;
        s.column = start.column;
        expect(Tok::LBrace);
        if (at(Tok::RBrace)) {
            const Token& t = peek();
            throw ParseError("parallel sections requires at least one section", t.line,
                             t.column);
        }
        while (!at(Tok::RBrace)) {
            expect(Tok::KwSection);
            s.sections.push_back(parse_block());
        }
        expect(Tok::RBrace);
        return Stmt{std::move(s)};
    }

    Stmt parse_within() {
        const Token& kw = expect(Tok::KwWithin);
        WithinApplyStmt s;
        s.line = kw.line;
        s.column = kw.column;
        s.within = parse_block();
        expect(Tok::KwApply);
        s.apply = parse_block();
        return Stmt{std::move(s)};
    }

    Stmt parse_if_result() {
        const Token& kw = expect(Tok::KwIf);
        IfResultStmt s;
        s.line = kw.line;
        s.column = kw.column;
        if (accept(Tok::KwMResetZ)) {
            s.basis = GateOp::MeasureZ;
        } else if (accept(Tok::KwMResetX)) {
            s.basis = GateOp::MeasureXReset;
        } else {
            const Token& t = peek();
            throw ParseError("expected 'MResetZ' or 'MResetX', found " + token_desc(t.kind),
                             t.line, t.column);
        }
        expect(Tok::LParen);
        s.qubit = parse_expr();
        expect(Tok::RParen);
        expect(Tok::EqEq);
        expect(Tok::KwOne);
        s.body = parse_block();
        return Stmt{std::move(s)};
    }

    Stmt parse_call() {
        CallStmt s;
        const Token& first = peek();
        s.line = first.line;
        s.column = first.column;
        s.adjoint = accept(Tok::KwAdjoint);
        s.callee = expect(Tok::Ident).text;
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            do {
                s.args.push_back(parse_expr());
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        expect(Tok::Semi);
        return Stmt{std::move(s)};
    }

    Expr parse_expr() { return parse_additive(); }

    Expr parse_additive() {
        Expr lhs = parse_multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinOp op = next().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
            Expr rhs = parse_multiplicative();
            int line = lhs.line;
            int column = lhs.column;
            lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
            lhs.line = line;
            lhs.column = column;
        }
        return lhs;
    }

    Expr parse_multiplicative() {
        Expr lhs = parse_unary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            BinOp op = next().kind == Tok::Star ? BinOp::Mul : BinOp::Div;
            Expr rhs = parse_unary();
            int line = lhs.line;
            int column = lhs.column;
            lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
            lhs.line = line;
            lhs.column = column;
        }
        return lhs;
    }

    Expr parse_unary() {
        if (at(Tok::Minus)) {
            const Token& t = next();
            Expr e = Expr::neg(parse_unary());
            e.line = t.line;
            e.column = t.column;
            return e;
        }
        return parse_atom();
    }

    Expr parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::IntLit: {
                next();
                Expr e = Expr::int_lit(t.int_value);
                e.line = t.line;
                e.column = t.column;
                return e;
            }
            case Tok::RealLit: {
                next();
                Expr e = Expr::real_lit(t.real_value);
                e.line = t.line;
                e.column = t.column;
                return e;
            }
            case Tok::KwPi: {
                next();
                Expr e = Expr::pi();
                e.line = t.line;
                e.column = t.column;
                return e;
            }
            case Tok::KwLen: {
                next();
                expect(Tok::LParen);
                std::string name = expect(Tok::Ident).text;
                expect(Tok::RParen);
                Expr e = Expr::len(std::move(name));
                e.line = t.line;
                e.column = t.column;
                return e;
            }
            case Tok::Ident: {
                next();
                if (accept(Tok::LBracket)) {
                    Expr sub = parse_expr();
                    expect(Tok::RBracket);
                    Expr e = Expr::index(t.text, std::move(sub));
                    e.line = t.line;
                    e.column = t.column;
                    return e;
                }
                Expr e = Expr::ident(t.text);
                e.line = t.line;
                e.column = t.column;
                return e;
            }
            case Tok::LParen: {
                next();
                Expr e = parse_expr();
                expect(Tok::RParen);
                return e;
            }
            default:
                throw ParseError("expected expression, found " + token_desc(t.kind), t.line,
                                 t.column);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// --- Resolution and type checking ---

class Resolver {
public:
    explicit Resolver(const Ast& ast) : ast_(ast) {}

    void run() {
        for (const OperationDef& op : ast_.operations) {
            if (gate_from_name(op.name) || op.name == "MResetZ" || op.name == "MResetX") {
                throw ParseError("operation name '" + op.name + "' is reserved", op.line,
                                 op.column);
            }
            if (!op_names_.insert(op.name).second) {
                throw ParseError("duplicate operation '" + op.name + "'", op.line, op.column);
            }
        }
        for (const OperationDef& op : ast_.operations) check_operation(op);
    }

private:
    using Scope = std::map<std::string, ValueType>;

    void check_operation(const OperationDef& op) {
        scopes_.clear();
        scopes_.push_back({});
        for (const Param& p : op.params) scopes_.back()[p.name] = p.type;
        check_block(op.body);
    }

    void check_block(const Block& block) {
        scopes_.push_back({});
        for (const Stmt& stmt : block.stmts) check_stmt(stmt);
        scopes_.pop_back();
    }

    void bind(const std::string& name, ValueType type) { scopes_.back()[name] = type; }

    const ValueType* lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    void check_stmt(const Stmt& stmt) {
        struct Visitor {
            Resolver& r;
            void operator()(const UseStmt& s) const {
                if (s.count) {
                    r.require_numeric_int(*s.count);
                    r.bind(s.name, ValueType::QubitArray);
                } else {
                    r.bind(s.name, ValueType::Qubit);
                }
            }
            void operator()(const LetStmt& s) const {
                r.bind(s.name, r.type_of(s.value));
            }
            void operator()(const ForStmt& s) const {
                ValueType var_type = ValueType::Int;
                if (s.iterable.is_range) {
                    r.require_numeric_int(s.iterable.from);
                    r.require_numeric_int(s.iterable.to);
                } else {
                    const ValueType* t = r.lookup(s.iterable.array);
                    if (!t) {
                        throw ParseError("unknown identifier '" + s.iterable.array + "'",
                                         s.line, s.column);
                    }
                    if (*t != ValueType::QubitArray) {
                        throw ParseError("cannot iterate over non-array '" + s.iterable.array +
                                             "'",
                                         s.line, s.column);
                    }
                    var_type = ValueType::Qubit;
                }
                if (s.fanout) {
                    const ValueType* t = r.lookup(s.fanout->qubits);
                    if (!t) {
                        throw ParseError("unknown identifier '" + s.fanout->qubits + "'",
                                         s.line, s.column);
                    }
                    if (*t != ValueType::Qubit && *t != ValueType::QubitArray) {
                        throw ParseError("fanout target '" + s.fanout->qubits +
                                             "' must be a qubit or qubit array",
                                         s.line, s.column);
                    }
                    r.require_numeric_int(s.fanout->replicas);
                }
                r.scopes_.push_back({});
                r.bind(s.var, var_type);
                for (const Stmt& inner : s.body.stmts) r.check_stmt(inner);
                r.scopes_.pop_back();
            }
            void operator()(const SectionsStmt& s) const {
                for (const Block& section : s.sections) r.check_block(section);
            }
            void operator()(const WithinApplyStmt& s) const {
                r.check_block(s.within);
                r.check_block(s.apply);
            }
            void operator()(const IfResultStmt& s) const {
                if (r.type_of(s.qubit) != ValueType::Qubit) {
                    throw ParseError("measurement target must be a qubit", s.line, s.column);
                }
                r.check_block(s.body);
            }
            void operator()(const CallStmt& s) const { r.check_call(s); }
        };
        std::visit(Visitor{*this}, stmt.node);
    }

    void check_call(const CallStmt& s) {
        if (auto intrinsic = gate_from_name(s.callee)) {
            if (is_measurement(*intrinsic)) {
                throw ParseError("'" + s.callee + "' is not callable as a statement", s.line,
                                 s.column);
            }
            std::vector<ValueType> expected;
            if (*intrinsic == GateOp::Rz) expected.push_back(ValueType::Real);
            for (int i = 0; i < gate_arity(*intrinsic); ++i) expected.push_back(ValueType::Qubit);
            check_args(s, expected);
            return;
        }
        const OperationDef* callee = ast_.find(s.callee);
        if (!callee) {
            throw ParseError("unknown callee '" + s.callee + "'", s.line, s.column);
        }
        std::vector<ValueType> expected;
        for (const Param& p : callee->params) expected.push_back(p.type);
        check_args(s, expected);
    }

    void check_args(const CallStmt& s, const std::vector<ValueType>& expected) {
        if (s.args.size() != expected.size()) {
            throw ParseError("'" + s.callee + "' expects " + std::to_string(expected.size()) +
                                 " argument(s), got " + std::to_string(s.args.size()),
                             s.line, s.column);
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            ValueType actual = type_of(s.args[i]);
            bool ok = actual == expected[i] ||
                      (expected[i] == ValueType::Real && actual == ValueType::Int);
            if (!ok) {
                throw ParseError("argument " + std::to_string(i + 1) + " of '" + s.callee +
                                     "' must be " + std::string(value_type_name(expected[i])),
                                 s.line, s.column);
            }
        }
    }

    void require_numeric_int(const Expr& e) {
        if (type_of(e) != ValueType::Int) {
            throw ParseError("expected an integer expression", e.line, e.column);
        }
    }

    ValueType type_of(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::IntLit: return ValueType::Int;
            case Expr::Kind::RealLit: return ValueType::Real;
            case Expr::Kind::Pi: return ValueType::Real;
            case Expr::Kind::Ident: {
                const ValueType* t = lookup(e.name);
                if (!t) throw ParseError("unknown identifier '" + e.name + "'", e.line, e.column);
                return *t;
            }
            case Expr::Kind::Index: {
                const ValueType* t = lookup(e.name);
                if (!t) throw ParseError("unknown identifier '" + e.name + "'", e.line, e.column);
                if (*t != ValueType::QubitArray) {
                    throw ParseError("'" + e.name + "' is not indexable", e.line, e.column);
                }
                require_numeric_int(e.children[0]);
                return ValueType::Qubit;
            }
            case Expr::Kind::Len: {
                const ValueType* t = lookup(e.name);
                if (!t) throw ParseError("unknown identifier '" + e.name + "'", e.line, e.column);
                if (*t != ValueType::QubitArray) {
                    throw ParseError("len() requires a qubit array", e.line, e.column);
                }
                return ValueType::Int;
            }
            case Expr::Kind::Neg: {
                ValueType t = type_of(e.children[0]);
                if (t != ValueType::Int && t != ValueType::Real) {
                    throw ParseError("operand of unary '-' must be numeric", e.line, e.column);
                }
                return t;
            }
            case Expr::Kind::Binary: {
                ValueType a = type_of(e.children[0]);
                ValueType b = type_of(e.children[1]);
                bool numeric = (a == ValueType::Int || a == ValueType::Real) &&
                               (b == ValueType::Int || b == ValueType::Real);
                if (!numeric) {
                    throw ParseError("arithmetic operands must be numeric", e.line, e.column);
                }
                return (a == ValueType::Real || b == ValueType::Real) ? ValueType::Real
                                                                      : ValueType::Int;
            }
        }
        return ValueType::Int;
    }

    const Ast& ast_;
    std::set<std::string> op_names_;
    std::vector<Scope> scopes_;
};

}  // namespace detail

// Syntax only; callers that merge several sources resolve afterwards.
inline Ast parse_unresolved(std::string_view source) {
    detail::Parser parser(source);
    return parser.parse_program();
}

// Resolution and type checking for a (possibly merged) program.
inline void resolve(const Ast& ast) { detail::Resolver(ast).run(); }

// Parses and resolves a program. Throws ParseError with source position on
// syntax, resolution or type failures.
inline Ast parse(std::string_view source) {
    Ast ast = parse_unresolved(source);
    resolve(ast);
    return ast;
}

}  // namespace qpar
