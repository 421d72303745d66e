#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "qpar/lowering.hpp"
#include "qpar/parser.hpp"
#include "qpar/simulator.hpp"
#include "qpar/stdlib.hpp"

using namespace qpar;

namespace {

Trace lower(const std::string& source, const std::string& entry = "Main",
            const EntryArgs& args = {}) {
    return trace_program(parse(source), entry, args);
}

}  // namespace

TEST_CASE("H twice is the identity") {
    Trace t = lower("operation Main() : Unit { use q = Qubit(); H(q); H(q); }");
    RunResult r = run(t, t.qubit_high_watermark, 1);
    CHECK(std::abs(r.state.amplitudes()[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("norm is preserved and dirty release is caught") {
    Trace dirty = lower("operation Main() : Unit { use q = Qubit(); X(q); }");
    CHECK_THROWS_AS(run(dirty, dirty.qubit_high_watermark, 1), SimulationError);

    Trace over_budget;
    over_budget.qubit_high_watermark = 30;
    CHECK_THROWS_AS(run(over_budget, 30, 1), SimulationError);
}

TEST_CASE("measurement collapses, records, and resets") {
    Trace t = lower(R"(
operation Main() : Unit {
    use q = Qubit();
    use r = Qubit();
    H(q);
    if MResetZ(q) == One {
        X(r);
        X(r);
    }
}
)");
    int ones = 0;
    for (std::uint64_t seed = 1; seed <= 32; ++seed) {
        RunResult result = run(t, t.qubit_high_watermark, seed);
        REQUIRE(result.results.size() == 1);
        ones += result.results[0];
        // post-measurement reset leaves |00>, so the release checks passed
        CHECK(std::abs(std::abs(result.state.amplitudes()[0]) - 1.0) < 1e-9);
    }
    CHECK(ones > 0);
    CHECK(ones < 32);

    RunResult a = run(t, t.qubit_high_watermark, 3);
    RunResult b = run(t, t.qubit_high_watermark, 3);
    CHECK(a.results == b.results);  // determinism per seed
}

TEST_CASE("Jones AND gadget computes and uncomputes on every basis input") {
    std::string source = gen_and_demo();  // ApplyAnd = compute, CNOT, uncompute
    Trace t = lower(source);
    auto principal = principal_qubits(t);
    REQUIRE(principal.size() == 3);

    RunOptions options;
    for (QubitId q : principal) options.preloaded.insert(q.index);
    for (std::uint64_t seed : {1ull, 2ull}) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                options.initial_basis_state =
                    static_cast<std::uint64_t>(a) | (static_cast<std::uint64_t>(b) << 1);
                RunResult r = run(t, t.qubit_high_watermark, seed, options);
                std::uint64_t want = options.initial_basis_state |
                                     (static_cast<std::uint64_t>(a & b) << 2);
                CHECK(std::abs(r.state.amplitudes()[want] -
                               std::complex<double>(1.0, 0.0)) < 1e-9);
            }
        }
    }
}

TEST_CASE("fanout then immediate unfanout restores the state") {
    // control in |+>, fanned out to 4 replicas, loop bodies are empty copies.
    std::string source = R"(
operation Pre(control : Qubit) : Unit {
    H(control);
}
operation Main() : Unit {
    use control = Qubit();
    use targets = Qubit[4];
    Pre(control);
    parallel for t in targets fanout(control, 4) {
        CNOT(control, t);
        CNOT(control, t);
    }
    H(control);
}
)";
    Trace t = lower(source);
    RunResult r = run(t, t.qubit_high_watermark, 1);
    // (|0>+|1>)/sqrt2 fanned out and consolidated, then H back to |0...0>.
    CHECK(std::abs(r.state.amplitudes()[0] - std::complex<double>(1.0, 0.0)) < 1e-9);
}

TEST_CASE("equivalent accepts identical traces and flags an extra T") {
    Trace t = lower("operation Main() : Unit { use q = Qubit(); H(q); H(q); }");
    EquivalenceResult same = equivalent(t, t, t.qubit_high_watermark, 1e-9, {1});
    CHECK(same.equivalent);
    CHECK(same.max_deviation == 0.0);

    Trace with_t = lower("operation Main() : Unit { use q = Qubit(); H(q); T(q); H(q); }");
    // H T H != H H up to global phase on some basis input
    CHECK_FALSE(equivalent(t, with_t, t.qubit_high_watermark, 1e-9, {1}).equivalent);
}

TEST_CASE("run and invert_gates cancel on basis inputs") {
    std::string source = R"(
operation Main() : Unit {
    use a = Qubit();
    use b = Qubit();
    H(a);
    T(a);
    CNOT(a, b);
    S(b);
    CNOT(a, b);
    Tdg(a);
    H(a);
}
)";
    Trace forward = lower(source);
    Trace roundtrip;
    std::vector<Instruction> gates;
    for (const Instruction& instr : forward.instructions) {
        roundtrip.instructions.push_back(instr);
        if (as_gate(instr)) gates.push_back(instr);
    }
    auto inverse = invert_gates(gates);
    // insert the inverse right before the two trailing releases
    std::size_t insert_at = roundtrip.instructions.size() - 2;
    roundtrip.instructions.insert(
        roundtrip.instructions.begin() + static_cast<std::ptrdiff_t>(insert_at),
        inverse.begin(), inverse.end());
    roundtrip.qubit_high_watermark = forward.qubit_high_watermark;
    roundtrip.result_count = forward.result_count;

    RunOptions options;
    options.preloaded = {0, 1};
    for (std::uint64_t basis = 0; basis < 4; ++basis) {
        options.initial_basis_state = basis;
        RunResult r = run(roundtrip, roundtrip.qubit_high_watermark, 1, options);
        CHECK(std::abs(r.state.amplitudes()[basis] - std::complex<double>(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("equivalence of parallel and serial mcx n=3") {
    Trace par = lower(gen_mcx(3, mcx_full_cutoff(3), Mode::Parallel));
    Trace ser = lower(gen_mcx(3, 0, Mode::Serial));
    std::uint32_t slots = std::max(par.qubit_high_watermark, ser.qubit_high_watermark);
    EquivalenceResult r = equivalent(par, ser, slots, 1e-9, {1, 2});
    CHECK(r.equivalent);
    CHECK(r.max_deviation < 1e-9);
}

TEST_CASE("mcx flips the target iff all controls are one and leaves ancillas clean") {
    Trace t = lower(gen_mcx(3, mcx_full_cutoff(3), Mode::Parallel));
    auto principal = principal_qubits(t);
    REQUIRE(principal.size() == 6);  // c[0..2], t, and the top-level anc array

    // Enumerate c and t inputs; the ancilla register stays |0>.
    RunOptions options;
    for (QubitId q : principal) options.preloaded.insert(q.index);
    for (std::uint64_t basis = 0; basis < 16; ++basis) {
        options.initial_basis_state = basis;
        RunResult r = run(t, t.qubit_high_watermark, 1, options);
        bool all_controls = (basis & 7) == 7;
        std::uint64_t want = basis ^ (all_controls ? 8u : 0u);
        // exact basis permutation, amplitude 1 on the expected state;
        // ancilla cleanliness is enforced by the Release checks inside run()
        CHECK(std::abs(r.state.amplitudes()[want] - std::complex<double>(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("carry-lookahead adder matches modular addition exactly") {
    for (int width : {2, 3}) {
        for (Mode mode : {Mode::Serial, Mode::Parallel}) {
            Trace t = lower(gen_cla_adder(width, mode));
            RunOptions options;
            for (QubitId q : principal_qubits(t)) options.preloaded.insert(q.index);
            const std::uint64_t modulus = std::uint64_t{1} << width;
            for (std::uint64_t a = 0; a < modulus; ++a) {
                for (std::uint64_t b = 0; b < modulus; ++b) {
                    options.initial_basis_state = a | (b << width);
                    RunResult r = run(t, t.qubit_high_watermark, 1, options);
                    std::uint64_t want = a | (((a + b) % modulus) << width);
                    CHECK(std::abs(r.state.amplitudes()[want] -
                                   std::complex<double>(1.0, 0.0)) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("ripple adder matches modular addition") {
    Trace t = lower(gen_ripple_adder(2, Mode::Serial));
    RunOptions options;
    for (QubitId q : principal_qubits(t)) options.preloaded.insert(q.index);
    for (std::uint64_t a = 0; a < 4; ++a) {
        for (std::uint64_t b = 0; b < 4; ++b) {
            options.initial_basis_state = a | (b << 2);
            RunResult r = run(t, t.qubit_high_watermark, 2, options);
            std::uint64_t want = a | (((a + b) % 4) << 2);
            CHECK(std::abs(r.state.amplitudes()[want] - std::complex<double>(1.0, 0.0)) <
                  1e-9);
        }
    }
}

TEST_CASE("controlled rotation acts as Rz on the target when the control is set") {
    std::string source = gen_controlled_rz(Mode::Serial) + R"(
operation Drive(angle : Double) : Unit {
    use c = Qubit();
    use t = Qubit();
    ControlledRz(angle, c, t);
}
)";
    double angle = 0.7391;
    EntryArgs args;
    args["angle"] = ArgValue::real(angle);
    Trace t = trace_program(parse(source), "Drive", args);
    RunOptions options;
    for (QubitId q : principal_qubits(t)) options.preloaded.insert(q.index);

    // control |1>: Rz phase exp(+- i angle/2) on the target component
    for (int target = 0; target < 2; ++target) {
        options.initial_basis_state = 1u | (static_cast<std::uint64_t>(target) << 1);
        RunResult r = run(t, t.qubit_high_watermark, 1, options);
        std::complex<double> want =
            std::polar(1.0, (target ? 1.0 : -1.0) * angle / 2.0);
        CHECK(std::abs(r.state.amplitudes()[options.initial_basis_state] - want) < 1e-9);
    }
    // control |0>: identity up to the global phase exp(-i angle/2)
    for (int target = 0; target < 2; ++target) {
        options.initial_basis_state = static_cast<std::uint64_t>(target) << 1;
        RunResult r = run(t, t.qubit_high_watermark, 1, options);
        std::complex<double> want = std::polar(1.0, -angle / 2.0);
        CHECK(std::abs(r.state.amplitudes()[options.initial_basis_state] - want) < 1e-9);
    }
}

TEST_CASE("fanning out a whole register preserves semantics") {
    const char* text = R"(
operation Kick(reg : Qubit[], t : Qubit) : Unit {
    CNOT(reg[0], t);
    CZ(reg[1], t);
}
operation Main(n : Int, k : Int) : Unit {
    use reg = Qubit[2];
    use ts = Qubit[n];
    parallel for i in 0..n - 1 fanout(reg, k) {
        Kick(reg, ts[i]);
    }
}
)";
    EntryArgs args;
    args["n"] = ArgValue::integer(3);
    args["k"] = ArgValue::integer(2);
    Ast parallel_ast = parse(text);
    Ast serial_ast = strip_parallel(parallel_ast);
    resolve(serial_ast);
    Trace par = trace_program(parallel_ast, "Main", args);
    Trace ser = trace_program(serial_ast, "Main", args);

    const FanoutBeginInstr* fb = nullptr;
    for (const Instruction& instr : par.instructions) {
        if (const auto* f = std::get_if<FanoutBeginInstr>(&instr.op)) fb = f;
    }
    REQUIRE(fb != nullptr);
    CHECK(fb->originals.size() == 2);
    REQUIRE(fb->copies.size() == 1);
    CHECK(fb->copies[0].size() == 2);  // (k-1) * |originals|

    std::uint32_t slots = std::max(par.qubit_high_watermark, ser.qubit_high_watermark);
    EquivalenceResult r = equivalent(par, ser, slots, 1e-9, {1});
    CHECK(r.equivalent);
    CHECK(r.max_deviation < 1e-9);
}

TEST_CASE("principal qubits exclude helpers and fanout copies") {
    EntryArgs args;
    args["n"] = ArgValue::integer(4);
    args["k"] = ArgValue::integer(2);
    Trace t = trace_program(parse(gen_fanout_cnot(Mode::Parallel)), "FanoutCnot", args);
    auto principal = principal_qubits(t);
    CHECK(principal.size() == 5);  // control + 4 targets, no copies
    CHECK(t.qubit_high_watermark == 6);
}
