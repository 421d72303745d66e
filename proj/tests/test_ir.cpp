#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qpar/ir.hpp"

using namespace qpar;

namespace {

Instruction gate(GateOp op, std::initializer_list<std::uint32_t> qs,
                 std::vector<std::string> stack = {"Main"}) {
    GateInstr g;
    g.gate.op = op;
    for (auto q : qs) g.operands.push_back(QubitId{q});
    return {std::move(g), std::move(stack)};
}

Instruction alloc(std::initializer_list<std::uint32_t> qs) {
    AllocInstr a;
    for (auto q : qs) a.ids.push_back(QubitId{q});
    return {std::move(a), {"Main"}};
}

Instruction release(std::initializer_list<std::uint32_t> qs) {
    ReleaseInstr r;
    for (auto q : qs) r.ids.push_back(QubitId{q});
    return {std::move(r), {"Main"}};
}

}  // namespace

TEST_CASE("validate_trace accepts an empty trace") {
    CHECK(validate_trace(Trace{}).empty());
}

TEST_CASE("validate_trace flags a qubit shared across sibling sections") {
    Trace t = make_trace({
        alloc({0}),
        {ParallelBeginInstr{}, {"Main"}},
        {SectionBeginInstr{0}, {"Main"}},
        gate(GateOp::X, {0}),
        {SectionEndInstr{}, {"Main"}},
        {SectionBeginInstr{1}, {"Main"}},
        gate(GateOp::X, {0}),
        {SectionEndInstr{}, {"Main"}},
        {ParallelEndInstr{}, {"Main"}},
        release({0}),
    });
    auto diags = validate_trace(t);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message == "qubit 0 shared across sibling sections");
    CHECK(diags[0].instruction == 6);
}

TEST_CASE("validate_trace flags duplicate operands") {
    Trace t = make_trace({alloc({0}), gate(GateOp::CNOT, {0, 0}), release({0})});
    auto diags = validate_trace(t);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message == "duplicate operand");
}

TEST_CASE("validate_trace enforces liveness") {
    Trace t = make_trace({gate(GateOp::H, {0})});
    auto diags = validate_trace(t);
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].message == "qubit 0 not live");

    Trace released = make_trace({alloc({0}), release({0}), gate(GateOp::H, {0})});
    CHECK_FALSE(validate_trace(released).empty());
}

TEST_CASE("validate_trace checks marker nesting") {
    Trace bad_end = make_trace({{ParallelEndInstr{}, {"Main"}}});
    CHECK_FALSE(validate_trace(bad_end).empty());

    Trace section_outside = make_trace({{SectionBeginInstr{0}, {"Main"}}});
    CHECK_FALSE(validate_trace(section_outside).empty());

    Trace unclosed = make_trace({{ParallelBeginInstr{}, {"Main"}}});
    auto diags = validate_trace(unclosed);
    REQUIRE_FALSE(diags.empty());
    CHECK(diags.back().message == "unclosed markers at end of trace");
}

TEST_CASE("validate_trace exempts fanned-out qubits from the sibling rule") {
    FanoutBeginInstr fb;
    fb.fanout_id = 0;
    fb.originals = {QubitId{0}};
    fb.copies = {{QubitId{1}}};
    Trace t = make_trace({
        alloc({0}),
        {fb, {"Main"}},
        alloc({1}),
        gate(GateOp::CNOT, {0, 1}),
        {ParallelBeginInstr{}, {"Main"}},
        {SectionBeginInstr{0}, {"Main"}},
        gate(GateOp::X, {0}),
        {SectionEndInstr{}, {"Main"}},
        {SectionBeginInstr{1}, {"Main"}},
        gate(GateOp::X, {1}),
        {SectionEndInstr{}, {"Main"}},
        {SectionBeginInstr{2}, {"Main"}},
        gate(GateOp::X, {0}),
        {SectionEndInstr{}, {"Main"}},
        {ParallelEndInstr{}, {"Main"}},
        gate(GateOp::CNOT, {0, 1}),
        {FanoutEndInstr{0}, {"Main"}},
        release({1}),
        release({0}),
    });
    CHECK(validate_trace(t).empty());
}

TEST_CASE("validate_trace requires recorded result slots") {
    GateInstr conditional;
    conditional.gate.op = GateOp::Z;
    conditional.gate.condition = 0;
    conditional.operands = {QubitId{0}};
    Trace t = make_trace({alloc({0}), {conditional, {"Main"}}, release({0})});
    auto diags = validate_trace(t);
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].message == "result slot 0 not yet recorded");
}

TEST_CASE("invert_gates reverses and inverts") {
    GateInstr t_gate;
    t_gate.gate.op = GateOp::T;
    t_gate.operands = {QubitId{0}};
    GateInstr cnot;
    cnot.gate.op = GateOp::CNOT;
    cnot.operands = {QubitId{0}, QubitId{1}};
    std::vector<Instruction> block{{t_gate, {"Main"}}, {cnot, {"Main"}}};

    auto inv = invert_gates(block);
    REQUIRE(inv.size() == 2);
    CHECK(std::get<GateInstr>(inv[0].op).gate.op == GateOp::CNOT);
    CHECK(std::get<GateInstr>(inv[1].op).gate.op == GateOp::Tdg);
}

TEST_CASE("invert_gates rejects measurements") {
    GateInstr m;
    m.gate.op = GateOp::MeasureZ;
    m.operands = {QubitId{0}};
    m.result_slot = 0;
    std::vector<Instruction> block{{m, {"Main"}}};
    CHECK_THROWS_AS(invert_gates(block), NotAdjointableError);

    CHECK(invert_gates({}).empty());
}

TEST_CASE("invert_gates is an involution on random adjointable blocks") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
        std::vector<Instruction> block;
        int len = static_cast<int>(rng() % 20);
        for (int i = 0; i < len; ++i) {
            GateOp ops[] = {GateOp::H,  GateOp::X,   GateOp::S,    GateOp::Sdg, GateOp::T,
                            GateOp::Tdg, GateOp::Rz, GateOp::CNOT, GateOp::CCX, GateOp::SWAP};
            GateInstr g;
            g.gate.op = ops[rng() % std::size(ops)];
            if (g.gate.op == GateOp::Rz) {
                g.gate.angle = static_cast<double>(rng() % 100) / 10.0;
            }
            std::uint32_t base = static_cast<std::uint32_t>(rng() % 5);
            for (int k = 0; k < gate_arity(g.gate.op); ++k) {
                g.operands.push_back(QubitId{(base + static_cast<std::uint32_t>(k)) % 8});
            }
            block.push_back({std::move(g), {"Main"}});
        }
        CHECK(invert_gates(invert_gates(block)) == block);
    }
}

TEST_CASE("count_gates counts inner kinds and ignores markers") {
    GateInstr conditional;
    conditional.gate.op = GateOp::T;
    conditional.gate.condition = 0;
    conditional.operands = {QubitId{0}};
    GateInstr measure;
    measure.gate.op = GateOp::MeasureZ;
    measure.operands = {QubitId{1}};
    measure.result_slot = 0;

    Trace t = make_trace({
        alloc({0, 1}),
        gate(GateOp::T, {0}),
        {ParallelBeginInstr{}, {"Main"}},
        {SectionBeginInstr{0}, {"Main"}},
        gate(GateOp::Tdg, {1}),
        {SectionEndInstr{}, {"Main"}},
        {ParallelEndInstr{}, {"Main"}},
        {measure, {"Main"}},
        {conditional, {"Main"}},
        release({1, 0}),
    });
    CHECK(t_count(t) == 3);
    CHECK(count_gates(t, [](const Gate& g) { return g.op == GateOp::MeasureZ; }) == 1);
    CHECK(count_gates(Trace{}, is_t_like) == 0);
}

TEST_CASE("count_gates is invariant under marker insertion") {
    Trace base = make_trace({alloc({0, 1}), gate(GateOp::T, {0}), gate(GateOp::CNOT, {0, 1}),
                             gate(GateOp::Tdg, {1}), release({1, 0})});
    Trace wrapped = make_trace({
        alloc({0, 1}),
        {ParallelBeginInstr{}, {"Main"}},
        {SectionBeginInstr{0}, {"Main"}},
        gate(GateOp::T, {0}),
        gate(GateOp::CNOT, {0, 1}),
        gate(GateOp::Tdg, {1}),
        {SectionEndInstr{}, {"Main"}},
        {ParallelEndInstr{}, {"Main"}},
        release({1, 0}),
    });
    CHECK(t_count(base) == t_count(wrapped));
    auto all = [](const Gate&) { return true; };
    CHECK(count_gates(base, all) == count_gates(wrapped, all));
}

TEST_CASE("dump_trace golden format") {
    GateInstr rz;
    rz.gate.op = GateOp::Rz;
    rz.gate.angle = 1.5;
    rz.operands = {QubitId{1}};
    GateInstr measure;
    measure.gate.op = GateOp::MeasureXReset;
    measure.operands = {QubitId{0}};
    measure.result_slot = 0;
    GateInstr conditional;
    conditional.gate.op = GateOp::CZ;
    conditional.gate.condition = 0;
    conditional.operands = {QubitId{0}, QubitId{1}};

    Trace t = make_trace({
        alloc({0, 1}),
        {rz, {"Main", "Rot"}},
        {measure, {"Main"}},
        {conditional, {"Main"}},
        {SectionBeginInstr{2}, {}},
        release({1, 0}),
    });
    CHECK(dump_trace(t) ==
          "0 Main Alloc 0 1\n"
          "1 Main;Rot Rz(1.5) 1\n"
          "2 Main MeasureXReset 0 -> r0\n"
          "3 Main If[r0]:CZ 0 1\n"
          "4 - SectionBegin(2)\n"
          "5 Main Release 1 0\n");
}
