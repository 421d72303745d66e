#pragma once

#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qpar/errors.hpp"
#include "qpar/lowering.hpp"
#include "qpar/parser.hpp"

namespace qpar {

enum class Mode { Serial, Parallel };

inline std::string_view mode_name(Mode m) {
    return m == Mode::Parallel ? "parallel" : "serial";
}

namespace detail {

class SourceWriter {
public:
    void line(const std::string& text) {
        for (int i = 0; i < indent_; ++i) out_ += "    ";
        out_ += text;
        out_ += '\n';
    }
    void blank() { out_ += '\n'; }
    void open(const std::string& text) {
        line(text + " {");
        ++indent_;
    }
    // Closes the current block and opens another on the same line: "} apply {".
    void chain(const std::string& text) {
        --indent_;
        line("} " + text + " {");
        ++indent_;
    }
    void close() {
        --indent_;
        line("}");
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
    int indent_ = 0;
};

// coeff * var + c rendered as QPL source, e.g. (2, "k", -1) -> "2 * k - 1".
// Folds to a constant when `var` is itself an integer literal, which happens
// when a one-iteration round is emitted as a plain statement.
inline std::string affine(long long coeff, const std::string& var, long long c) {
    if (coeff == 0) return std::to_string(c);
    if (!var.empty()) {
        char* end = nullptr;
        long long value = std::strtoll(var.c_str(), &end, 10);
        if (end && *end == '\0') return std::to_string(coeff * value + c);
    }
    std::string s = coeff == 1 ? var : std::to_string(coeff) + " * " + var;
    if (c > 0) s += " + " + std::to_string(c);
    if (c < 0) s += " - " + std::to_string(-c);
    return s;
}

// Jones-style AND gadget: T-depth 1, four T gates, one helper; uncomputation
// is measurement-based and costs no T gates.
inline void emit_and_gadgets(SourceWriter& w) {
    w.open("operation AndCompute(a : Qubit, b : Qubit, t : Qubit) : Unit");
    w.line("use h = Qubit();");
    w.line("H(t);");
    w.line("CNOT(t, h);");
    w.line("CNOT(a, h);");
    w.line("CNOT(t, b);");
    w.line("CNOT(b, a);");
    w.line("T(t);");
    w.line("Tdg(h);");
    w.line("Tdg(b);");
    w.line("T(a);");
    w.line("CNOT(b, a);");
    w.line("CNOT(t, b);");
    w.line("CNOT(a, h);");
    w.line("CNOT(t, h);");
    w.line("H(t);");
    w.line("S(t);");
    w.close();
    w.blank();
    w.open("operation AndUncompute(a : Qubit, b : Qubit, t : Qubit) : Unit");
    w.open("if MResetX(t) == One");
    w.line("CZ(a, b);");
    w.close();
    w.close();
}

// In-place Toffoli built from the AND gadget.
inline void emit_apply_and(SourceWriter& w) {
    w.open("operation ApplyAnd(x : Qubit, y : Qubit, z : Qubit) : Unit");
    w.line("use tmp = Qubit();");
    w.line("AndCompute(x, y, tmp);");
    w.line("CNOT(tmp, z);");
    w.line("AndUncompute(x, y, tmp);");
    w.close();
}

}  // namespace detail

// Controlled-Rz gadget (helper qubit conjugated by Fredkin gates around one
// rotation) plus the ApplyRotations(n) driver.
inline std::string gen_controlled_rz(Mode mode) {
    detail::SourceWriter w;
    w.open("operation ControlledRz(angle : Double, control : Qubit, target : Qubit) : Unit");
    w.line("use helper = Qubit();");
    w.open("within");
    w.line("CSWAP(control, helper, target);");
    w.chain("apply");
    w.line("Rz(angle, helper);");
    w.close();
    w.close();
    w.blank();
    w.open("operation ApplyRotations(n : Int) : Unit");
    w.line("use ctls = Qubit[n];");
    w.line("use tgts = Qubit[n];");
    w.open(std::string(mode == Mode::Parallel ? "parallel " : "") + "for i in 0..n - 1");
    w.line("ControlledRz(pi * i / n, ctls[i], tgts[i]);");
    w.close();
    w.close();
    return w.take();
}

enum class AndGadget { Compute, Uncompute };

// Demo program around the AND gadget, for resource checks: the compute side
// carries exactly 4 T gates in one layer, the uncompute side none.
inline std::string gen_and(AndGadget which) {
    detail::SourceWriter w;
    detail::emit_and_gadgets(w);
    w.blank();
    w.open("operation Main() : Unit");
    w.line("use a = Qubit();");
    w.line("use b = Qubit();");
    w.line("use t = Qubit();");
    if (which == AndGadget::Compute) {
        w.line("AndCompute(a, b, t);");
    } else {
        w.line("AndUncompute(a, b, t);");
    }
    w.close();
    return w.take();
}

namespace detail {

struct McxNode {
    int lo = 0;
    int hi = 0;
    int anc = 0;    // index into the ancilla array (preorder)
    int depth = 0;  // recursion depth, root = 0
    int left = -1;  // child node index, -1 when the child is a single control
    int right = -1;
};

inline int build_mcx_tree(std::vector<McxNode>& nodes, int lo, int hi, int depth) {
    int index = static_cast<int>(nodes.size());
    nodes.push_back({lo, hi, index, depth, -1, -1});
    int mid = lo + (hi - lo + 1) / 2;
    if (mid - lo >= 2) {
        int left = build_mcx_tree(nodes, lo, mid, depth + 1);
        nodes[index].left = left;
    }
    if (hi - mid >= 2) {
        int right = build_mcx_tree(nodes, mid, hi, depth + 1);
        nodes[index].right = right;
    }
    return index;
}

inline std::string mcx_operand(const std::vector<McxNode>& nodes, int node, bool left_side) {
    const McxNode& n = nodes[node];
    int mid = n.lo + (n.hi - n.lo + 1) / 2;
    if (left_side) {
        return n.left >= 0 ? "anc[" + std::to_string(nodes[n.left].anc) + "]"
                           : "c[" + std::to_string(n.lo) + "]";
    }
    return n.right >= 0 ? "anc[" + std::to_string(nodes[n.right].anc) + "]"
                        : "c[" + std::to_string(mid) + "]";
}

}  // namespace detail

inline int mcx_full_cutoff(int n) {
    int levels = 0;
    while ((1 << levels) < n) ++levels;
    return levels;  // ceil(log2 n)
}

// Multi-controlled X over n controls as a balanced binary tree of AND
// gadgets with measurement-based uncomputation. In parallel mode the two
// recursive subtree computations are wrapped in `parallel sections` down to
// recursion depth `cutoff`; below that the serial form is used. cutoff 0
// matches serial mode exactly.
inline std::string gen_mcx(int n, int cutoff, Mode mode) {
    if (n < 2) throw Error("mcx requires n >= 2");
    if (cutoff < 0 || cutoff > mcx_full_cutoff(n)) {
        throw Error("invalid cutoff " + std::to_string(cutoff) + " for n = " +
                    std::to_string(n));
    }
    std::vector<detail::McxNode> nodes;
    detail::build_mcx_tree(nodes, 0, n, 0);

    detail::SourceWriter w;
    detail::emit_and_gadgets(w);

    auto span_name = [&](int node) {
        return std::to_string(nodes[node].lo) + "_" + std::to_string(nodes[node].hi);
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const detail::McxNode& node = nodes[i];
        w.blank();
        w.open("operation ComputeAnds_" + span_name(static_cast<int>(i)) +
               "(c : Qubit[], anc : Qubit[]) : Unit");
        bool wrap = mode == Mode::Parallel && node.depth < cutoff && node.left >= 0 &&
                    node.right >= 0;
        if (wrap) {
            w.open("parallel sections");
            w.open("section");
            w.line("ComputeAnds_" + span_name(node.left) + "(c, anc);");
            w.close();
            w.open("section");
            w.line("ComputeAnds_" + span_name(node.right) + "(c, anc);");
            w.close();
            w.close();
        } else {
            if (node.left >= 0) w.line("ComputeAnds_" + span_name(node.left) + "(c, anc);");
            if (node.right >= 0) w.line("ComputeAnds_" + span_name(node.right) + "(c, anc);");
        }
        w.line("AndCompute(" + detail::mcx_operand(nodes, static_cast<int>(i), true) + ", " +
               detail::mcx_operand(nodes, static_cast<int>(i), false) + ", anc[" +
               std::to_string(node.anc) + "]);");
        w.close();

        w.blank();
        w.open("operation UncomputeAnds_" + span_name(static_cast<int>(i)) +
               "(c : Qubit[], anc : Qubit[]) : Unit");
        w.line("AndUncompute(" + detail::mcx_operand(nodes, static_cast<int>(i), true) + ", " +
               detail::mcx_operand(nodes, static_cast<int>(i), false) + ", anc[" +
               std::to_string(node.anc) + "]);");
        if (wrap) {
            w.open("parallel sections");
            w.open("section");
            w.line("UncomputeAnds_" + span_name(node.left) + "(c, anc);");
            w.close();
            w.open("section");
            w.line("UncomputeAnds_" + span_name(node.right) + "(c, anc);");
            w.close();
            w.close();
        } else {
            if (node.left >= 0) w.line("UncomputeAnds_" + span_name(node.left) + "(c, anc);");
            if (node.right >= 0) w.line("UncomputeAnds_" + span_name(node.right) + "(c, anc);");
        }
        w.close();
    }

    w.blank();
    w.open("operation Main() : Unit");
    w.line("use c = Qubit[" + std::to_string(n) + "];");
    w.line("use t = Qubit();");
    w.line("use anc = Qubit[" + std::to_string(n - 1) + "];");
    w.line("ComputeAnds_0_" + std::to_string(n) + "(c, anc);");
    w.line("CNOT(anc[0], t);");
    w.line("UncomputeAnds_0_" + std::to_string(n) + "(c, anc);");
    w.close();
    return w.take();
}

namespace detail {

// Brent-Kung carry network plan over m = N-1 generate/propagate positions.
// z[i] ends up holding carry c_{i+1}; block propagates live in per-level
// ancilla arrays whose index ranges are pruned to what the network touches.
struct AdderPlan {
    int n = 0;
    int m = 0;
    int t_max = 0;
    std::vector<int> up_count;    // [t] complete blocks at level t (t >= 1)
    std::vector<int> down_count;  // [t] bases stride..down_count*stride
    std::vector<int> bp_min;      // [t] first block-propagate index, -1 if none
    std::vector<int> bp_max;
};

inline AdderPlan plan_adder(int n) {
    AdderPlan p;
    p.n = n;
    p.m = n - 1;
    while ((2 << p.t_max) <= p.m) ++p.t_max;  // largest t with 2^t <= m
    p.up_count.assign(p.t_max + 1, 0);
    p.down_count.assign(p.t_max + 1, 0);
    p.bp_min.assign(p.t_max + 1, -1);
    p.bp_max.assign(p.t_max + 1, -1);
    for (int t = 1; t <= p.t_max; ++t) {
        int stride = 1 << t;
        int half = stride >> 1;
        p.up_count[t] = p.m / stride;
        p.down_count[t] = (p.m - half) / stride;  // bases k*stride, k in [1, count]
    }
    // Needed block propagates, top level downward; gaps inside the hull are
    // filled so each level is one contiguous array.
    for (int t = p.t_max - 1; t >= 1; --t) {
        int lo = -1;
        int hi = -1;
        auto add = [&](int j) {
            if (lo < 0 || j < lo) lo = j;
            if (hi < 0 || j > hi) hi = j;
        };
        for (int k = 0; k < p.up_count[t + 1]; ++k) add(2 * k + 1);
        for (int k = 1; k <= p.down_count[t + 1]; ++k) add(2 * k);
        if (p.bp_min[t + 1] >= 0) {
            add(2 * p.bp_min[t + 1]);
            add(2 * p.bp_max[t + 1] + 1);
        }
        p.bp_min[t] = lo;
        p.bp_max[t] = hi;
    }
    return p;
}

struct AdderEmitOptions {
    Mode mode = Mode::Serial;
    // Emits the generate round starting at the position touched by the last
    // T-layer, so chained additions into the same register compose with
    // exactly additive depth. Used by the Givens construction.
    bool anchor_first = false;
    std::string op_name = "Add";
};

class AdderEmitter {
public:
    AdderEmitter(SourceWriter& w, const AdderPlan& plan, const AdderEmitOptions& options)
        : w_(w), p_(plan), opt_(options) {}

    void emit() {
        w_.open("operation " + opt_.op_name + "(a : Qubit[], b : Qubit[]) : Unit");
        if (p_.m >= 1) {
            w_.line("use z = Qubit[" + std::to_string(p_.m) + "];");
            for (int t = 1; t <= p_.t_max; ++t) {
                if (p_.bp_min[t] >= 0) {
                    w_.line("use " + bp_array(t) + " = Qubit[" +
                            std::to_string(p_.bp_max[t] - p_.bp_min[t] + 1) + "];");
                }
            }
            generate_round();
            loop("i", 0, p_.n - 1, [&](const std::string& i) {
                return "CNOT(a[" + i + "], b[" + i + "]);";
            });
            for (int t = 1; t <= p_.t_max; ++t) {
                bp_round(t, "AndCompute");
                up_round(t);
            }
            for (int t = p_.t_max; t >= 1; --t) down_round(t);
            for (int t = p_.t_max; t >= 1; --t) bp_round(t, "AndUncompute");
            loop("i", 1, p_.n - 1, [&](const std::string& i) {
                return "CNOT(z[" + i + " - 1], b[" + i + "]);";
            });
            // Complemented domain: carries are recomputed from a and the
            // complemented sum and cancelled off z.
            loop("i", 0, p_.m - 1, [&](const std::string& i) {
                return "X(b[" + i + "]);";
            });
            loop("i", 0, p_.m - 1, [&](const std::string& i) {
                return "CNOT(a[" + i + "], b[" + i + "]);";
            });
            for (int t = 1; t <= p_.t_max; ++t) bp_round(t, "AndCompute");
            for (int t = 1; t <= p_.t_max; ++t) down_round(t);
            for (int t = p_.t_max; t >= 1; --t) up_round(t);
            for (int t = p_.t_max; t >= 1; --t) bp_round(t, "AndUncompute");
            loop("i", 0, p_.m - 1, [&](const std::string& i) {
                return "CNOT(a[" + i + "], b[" + i + "]);";
            });
            loop("i", 0, p_.m - 1, [&](const std::string& i) {
                return "AndUncompute(a[" + i + "], b[" + i + "], z[" + i + "]);";
            });
            loop("i", 0, p_.m - 1, [&](const std::string& i) {
                return "X(b[" + i + "]);";
            });
        } else {
            w_.line("CNOT(a[0], b[0]);");
        }
        w_.close();
    }

private:
    std::string bp_array(int t) const { return "bp" + std::to_string(t); }

    // Block propagate of level t at block index expressed by `expr`
    // (already shifted into the array's local range for t >= 1).
    std::string bp_ref(int t, long long coeff, const std::string& var, long long c) const {
        if (t == 0) return "b[" + affine(coeff, var, c) + "]";
        return bp_array(t) + "[" + affine(coeff, var, c - p_.bp_min[t]) + "]";
    }

    template <typename Body>
    void loop(const std::string& var, long long from, long long to, Body body) {
        if (from > to) return;
        if (from == to) {
            w_.line(body(std::to_string(from)));
            return;
        }
        std::string head = opt_.mode == Mode::Parallel ? "parallel for " : "for ";
        w_.open(head + var + " in " + std::to_string(from) + ".." + std::to_string(to));
        w_.line(body(var));
        w_.close();
    }

    void generate_round() {
        int anchor = 0;
        if (opt_.anchor_first && p_.t_max >= 1 && p_.up_count[1] >= 1) {
            anchor = 2 * (p_.up_count[1] - 1) + 1;
        }
        auto gate = [&](const std::string& i) {
            return "AndCompute(a[" + i + "], b[" + i + "], z[" + i + "]);";
        };
        if (opt_.anchor_first && anchor > 0) {
            w_.line(gate(std::to_string(anchor)));
            loop("i", 0, anchor - 1, gate);
            loop("i", anchor + 1, p_.m - 1, gate);
        } else {
            loop("i", 0, p_.m - 1, gate);
        }
    }

    void bp_round(int t, const std::string& gadget) {
        if (p_.bp_min[t] < 0) return;
        long long jmin = p_.bp_min[t];
        loop("j", 0, p_.bp_max[t] - jmin, [&](const std::string& j) {
            return gadget + "(" + bp_ref(t - 1, 2, j, 2 * jmin) + ", " +
                   bp_ref(t - 1, 2, j, 2 * jmin + 1) + ", " + bp_array(t) + "[" + j + "]);";
        });
    }

    void up_round(int t) {
        if (p_.up_count[t] == 0) return;
        long long stride = 1LL << t;
        long long half = stride >> 1;
        loop("k", 0, p_.up_count[t] - 1, [&](const std::string& k) {
            return "ApplyAnd(" + bp_ref(t - 1, 2, k, 1) + ", z[" +
                   affine(stride, k, half - 1) + "], z[" + affine(stride, k, stride - 1) +
                   "]);";
        });
    }

    void down_round(int t) {
        if (p_.down_count[t] == 0) return;
        long long stride = 1LL << t;
        long long half = stride >> 1;
        loop("k", 1, p_.down_count[t], [&](const std::string& k) {
            return "ApplyAnd(" + bp_ref(t - 1, 2, k, 0) + ", z[" + affine(stride, k, -1) +
                   "], z[" + affine(stride, k, half - 1) + "]);";
        });
    }

    SourceWriter& w_;
    const AdderPlan& p_;
    AdderEmitOptions opt_;
};

inline void emit_adder(SourceWriter& w, int bitwidth, const AdderEmitOptions& options) {
    AdderPlan plan = plan_adder(bitwidth);
    AdderEmitter(w, plan, options).emit();
}

}  // namespace detail

// In-place carry-lookahead adder |a>|b> -> |a>|a+b mod 2^N>. Propagate and
// generate rounds are strided loops; parallel mode marks each round's loop
// `parallel for`.
inline std::string gen_cla_adder(int bitwidth, Mode mode) {
    if (bitwidth < 1) throw Error("adder bitwidth must be >= 1");
    detail::SourceWriter w;
    detail::emit_and_gadgets(w);
    w.blank();
    detail::emit_apply_and(w);
    w.blank();
    detail::AdderEmitOptions options;
    options.mode = mode;
    detail::emit_adder(w, bitwidth, options);
    w.blank();
    w.open("operation Main() : Unit");
    w.line("use a = Qubit[" + std::to_string(bitwidth) + "];");
    w.line("use b = Qubit[" + std::to_string(bitwidth) + "];");
    w.line("Add(a, b);");
    w.close();
    return w.take();
}

// CDKM-style ripple adder; its depth is dominated by the data-dependent
// carry chain, so both modes emit the same program.
inline std::string gen_ripple_adder(int bitwidth, Mode) {
    if (bitwidth < 1) throw Error("adder bitwidth must be >= 1");
    detail::SourceWriter w;
    detail::emit_and_gadgets(w);
    w.blank();
    detail::emit_apply_and(w);
    w.blank();
    w.open("operation Maj(x : Qubit, y : Qubit, z : Qubit) : Unit");
    w.line("CNOT(z, y);");
    w.line("CNOT(z, x);");
    w.line("ApplyAnd(x, y, z);");
    w.close();
    w.blank();
    w.open("operation Uma(x : Qubit, y : Qubit, z : Qubit) : Unit");
    w.line("ApplyAnd(x, y, z);");
    w.line("CNOT(z, x);");
    w.line("CNOT(x, y);");
    w.close();
    w.blank();
    w.open("operation Add(a : Qubit[], b : Qubit[]) : Unit");
    w.line("use carry = Qubit();");
    w.line("Maj(carry, b[0], a[0]);");
    int n = bitwidth;
    if (n >= 2) {
        if (n == 2) {
            w.line("Maj(a[0], b[1], a[1]);");
        } else {
            w.open("for i in 1.." + std::to_string(n - 1));
            w.line("Maj(a[i - 1], b[i], a[i]);");
            w.close();
        }
        if (n == 2) {
            w.line("Uma(a[0], b[1], a[1]);");
        } else {
            w.open("for k in 0.." + std::to_string(n - 2));
            w.line("Uma(a[" + std::to_string(n - 2) + " - k], b[" + std::to_string(n - 1) +
                   " - k], a[" + std::to_string(n - 1) + " - k]);");
            w.close();
        }
    }
    w.line("Uma(carry, b[0], a[0]);");
    w.close();
    w.blank();
    w.open("operation Main() : Unit");
    w.line("use a = Qubit[" + std::to_string(bitwidth) + "];");
    w.line("use b = Qubit[" + std::to_string(bitwidth) + "];");
    w.line("Add(a, b);");
    w.close();
    return w.take();
}

// Givens rotation gadget skeleton: q opaque Fourier registers, N angle
// registers, and N adders applied in chunks of q. The adder core is the
// serial carry-lookahead form in both modes; parallel mode wraps each chunk
// of q adders in `parallel sections`, which is where the q-fold depth
// reduction comes from.
inline std::string gen_givens(int adders, int bitwidth, int fourier_regs, Mode mode) {
    if (adders < 1) throw Error("givens requires N >= 1");
    if (fourier_regs < 1) throw Error("givens requires q >= 1");
    detail::SourceWriter w;
    w.open("operation PrepareFourierState(reg : Qubit[]) : Unit");
    w.close();
    w.blank();
    detail::emit_and_gadgets(w);
    w.blank();
    detail::emit_apply_and(w);
    w.blank();
    detail::AdderEmitOptions options;
    options.mode = Mode::Serial;
    options.anchor_first = true;
    options.op_name = "AddAngle";
    detail::emit_adder(w, bitwidth, options);
    w.blank();
    w.open("operation Main() : Unit");
    std::string width = std::to_string(bitwidth);
    for (int j = 0; j < fourier_regs; ++j) {
        w.line("use f" + std::to_string(j) + " = Qubit[" + width + "];");
    }
    for (int i = 0; i < adders; ++i) {
        w.line("use theta" + std::to_string(i) + " = Qubit[" + width + "];");
    }
    for (int j = 0; j < fourier_regs; ++j) {
        w.line("PrepareFourierState(f" + std::to_string(j) + ");");
    }
    for (int chunk = 0; chunk * fourier_regs < adders; ++chunk) {
        int lo = chunk * fourier_regs;
        int hi = std::min(adders, lo + fourier_regs);
        bool wrap = mode == Mode::Parallel && hi - lo >= 2;
        if (wrap) w.open("parallel sections");
        for (int i = lo; i < hi; ++i) {
            std::string call = "AddAngle(theta" + std::to_string(i) + ", f" +
                               std::to_string(i % fourier_regs) + ");";
            if (wrap) {
                w.open("section");
                w.line(call);
                w.close();
            } else {
                w.line(call);
            }
        }
        if (wrap) w.close();
    }
    w.close();
    return w.take();
}

// The fanout clause demo from the parallel-for discussion: one control
// shared by every loop iteration, fanned out to k entangled copies.
inline std::string gen_fanout_cnot(Mode mode) {
    detail::SourceWriter w;
    w.open("operation FanoutCnot(n : Int, k : Int) : Unit");
    w.line("use control = Qubit();");
    w.line("use targets = Qubit[n];");
    if (mode == Mode::Parallel) {
        w.open("parallel for t in targets fanout(control, k)");
    } else {
        w.open("for t in targets");
    }
    w.line("CNOT(control, t);");
    w.close();
    w.close();
    return w.take();
}

// Controlled AND round with a fanned-out control: the pattern needed by
// controlled adders, where serial access to the control would otherwise
// serialize every iteration.
inline std::string gen_ctrl_and_fanout(Mode mode) {
    detail::SourceWriter w;
    detail::emit_and_gadgets(w);
    w.blank();
    detail::emit_apply_and(w);
    w.blank();
    w.open("operation CtrlAndFanout(n : Int, k : Int) : Unit");
    w.line("use c = Qubit();");
    w.line("use xs = Qubit[n];");
    w.line("use ys = Qubit[n];");
    if (mode == Mode::Parallel) {
        w.open("parallel for i in 0..n - 1 fanout(c, k)");
    } else {
        w.open("for i in 0..n - 1");
    }
    w.line("ApplyAnd(c, xs[i], ys[i]);");
    w.close();
    w.close();
    return w.take();
}

// Toffoli demo used by the simulator corpus.
inline std::string gen_and_demo() {
    detail::SourceWriter w;
    detail::emit_and_gadgets(w);
    w.blank();
    detail::emit_apply_and(w);
    w.blank();
    w.open("operation Main() : Unit");
    w.line("use a = Qubit();");
    w.line("use b = Qubit();");
    w.line("use t = Qubit();");
    w.line("ApplyAnd(a, b, t);");
    w.close();
    return w.take();
}

// --- Circuit family dispatch ---

enum class Family { ControlledRz, AndGate, Mcx, ClaAdder, RippleAdder, Givens };

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::ControlledRz: return "controlled-rz";
        case Family::AndGate: return "and-gate";
        case Family::Mcx: return "mcx";
        case Family::ClaAdder: return "cla-adder";
        case Family::RippleAdder: return "ripple-adder";
        case Family::Givens: return "givens";
    }
    return "?";
}

inline std::optional<Family> family_from_name(std::string_view name) {
    for (Family f : {Family::ControlledRz, Family::AndGate, Family::Mcx, Family::ClaAdder,
                     Family::RippleAdder, Family::Givens}) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

struct CircuitSpec {
    Family family = Family::Mcx;
    int size = 8;        // mcx controls / adder bitwidth / rotation count / givens adders
    int cutoff = -1;     // mcx recursion cutoff, -1 = full
    int fourier = 1;     // givens q
    int bitwidth = 32;   // givens adder width
    Mode mode = Mode::Parallel;
};

struct GeneratedProgram {
    std::string source;
    std::string entry;
    EntryArgs args;
};

inline GeneratedProgram generate_program(const CircuitSpec& spec) {
    GeneratedProgram out;
    out.entry = "Main";
    switch (spec.family) {
        case Family::ControlledRz:
            out.source = gen_controlled_rz(spec.mode);
            out.entry = "ApplyRotations";
            out.args["n"] = ArgValue::integer(spec.size);
            break;
        case Family::AndGate:
            out.source = gen_and_demo();
            break;
        case Family::Mcx: {
            int cutoff = spec.cutoff >= 0 ? spec.cutoff : mcx_full_cutoff(spec.size);
            if (spec.mode == Mode::Serial) cutoff = 0;
            out.source = gen_mcx(spec.size, cutoff, spec.mode);
            break;
        }
        case Family::ClaAdder:
            out.source = gen_cla_adder(spec.size, spec.mode);
            break;
        case Family::RippleAdder:
            out.source = gen_ripple_adder(spec.size, spec.mode);
            break;
        case Family::Givens:
            out.source = gen_givens(spec.size, spec.bitwidth, spec.fourier, spec.mode);
            break;
    }
    return out;
}

// Scheduler-reported qubit count for the generated program.
inline std::uint32_t qubit_width(const CircuitSpec& spec) {
    GeneratedProgram program = generate_program(spec);
    Trace trace = trace_program(parse(program.source), program.entry, program.args);
    return trace.qubit_high_watermark;
}

// --- Shipped corpus ---

struct CorpusEntry {
    std::string file;
    std::string source;       // parallel-mode source; serial comes from strip_parallel
    std::string entry;
    EntryArgs estimate_args;  // defaults for estimate/flamegraph demos
    // Argument sets small enough for statevector equivalence checks
    // (watermark <= 12 in both modes).
    std::vector<EntryArgs> simulate_args;
};

inline const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = [] {
        std::vector<CorpusEntry> list;
        {
            CorpusEntry e;
            e.file = "rotations.qpl";
            e.source = gen_controlled_rz(Mode::Parallel);
            e.entry = "ApplyRotations";
            e.estimate_args["n"] = ArgValue::integer(8);
            EntryArgs n3, n4;
            n3["n"] = ArgValue::integer(3);
            n4["n"] = ArgValue::integer(4);
            e.simulate_args = {n3, n4};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "and_gadget.qpl";
            e.source = gen_and_demo();
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "mcx_n3.qpl";
            e.source = gen_mcx(3, mcx_full_cutoff(3), Mode::Parallel);
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "mcx_n4.qpl";
            e.source = gen_mcx(4, mcx_full_cutoff(4), Mode::Parallel);
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "mcx_n8.qpl";
            e.source = gen_mcx(8, mcx_full_cutoff(8), Mode::Parallel);
            e.entry = "Main";
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "mcx_n16.qpl";
            e.source = gen_mcx(16, mcx_full_cutoff(16), Mode::Parallel);
            e.entry = "Main";
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "adder_n2.qpl";
            e.source = gen_cla_adder(2, Mode::Parallel);
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "adder_n3.qpl";
            e.source = gen_cla_adder(3, Mode::Parallel);
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "adder_n8.qpl";
            e.source = gen_cla_adder(8, Mode::Parallel);
            e.entry = "Main";
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "ripple_n3.qpl";
            e.source = gen_ripple_adder(3, Mode::Parallel);
            e.entry = "Main";
            e.simulate_args = {EntryArgs{}};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "fanout_cnot.qpl";
            e.source = gen_fanout_cnot(Mode::Parallel);
            e.entry = "FanoutCnot";
            e.estimate_args["n"] = ArgValue::integer(8);
            e.estimate_args["k"] = ArgValue::integer(4);
            EntryArgs s1, s2;
            s1["n"] = ArgValue::integer(4);
            s1["k"] = ArgValue::integer(2);
            s2["n"] = ArgValue::integer(3);
            s2["k"] = ArgValue::integer(3);
            e.simulate_args = {s1, s2};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "ctrl_and_fanout.qpl";
            e.source = gen_ctrl_and_fanout(Mode::Parallel);
            e.entry = "CtrlAndFanout";
            e.estimate_args["n"] = ArgValue::integer(8);
            e.estimate_args["k"] = ArgValue::integer(4);
            EntryArgs s1;
            s1["n"] = ArgValue::integer(2);
            s1["k"] = ArgValue::integer(2);
            e.simulate_args = {s1};
            list.push_back(std::move(e));
        }
        {
            CorpusEntry e;
            e.file = "givens_n4_q2.qpl";
            e.source = gen_givens(4, 32, 2, Mode::Parallel);
            e.entry = "Main";
            list.push_back(std::move(e));
        }
        return list;
    }();
    return entries;
}

inline const CorpusEntry* find_corpus_entry(std::string_view file) {
    for (const CorpusEntry& e : corpus()) {
        if (e.file == file) return &e;
    }
    return nullptr;
}

}  // namespace qpar
