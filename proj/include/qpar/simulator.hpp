#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "qpar/errors.hpp"
#include "qpar/ir.hpp"

namespace qpar {

// Dense statevector oracle. Qubit ids index simulator slots directly;
// amplitudes are little-endian (slot 0 is the least significant bit).
class StateVector {
public:
    static constexpr std::uint32_t kMaxSlots = 24;
    using Amplitude = std::complex<double>;

    explicit StateVector(std::uint32_t slots) : slots_(slots) {
        if (slots > kMaxSlots) {
            throw SimulationError("trace exceeds slot budget (" + std::to_string(slots) +
                                  " > " + std::to_string(kMaxSlots) + ")");
        }
        amps_.assign(std::size_t{1} << slots, Amplitude{0.0, 0.0});
        amps_[0] = 1.0;
    }

    std::uint32_t slots() const { return slots_; }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }

    void set_basis_state(std::uint64_t index) {
        std::fill(amps_.begin(), amps_.end(), Amplitude{0.0, 0.0});
        amps_.at(index) = 1.0;
    }

    double probability_of_one(std::uint32_t slot) const {
        const std::uint64_t mask = std::uint64_t{1} << slot;
        double p = 0.0;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) p += std::norm(amps_[i]);
        }
        return p;
    }

    double norm() const {
        double n = 0.0;
        for (const Amplitude& a : amps_) n += std::norm(a);
        return std::sqrt(n);
    }

    void apply_single(std::uint32_t slot, const Amplitude m[2][2]) {
        const std::uint64_t mask = std::uint64_t{1} << slot;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            Amplitude a0 = amps_[i];
            Amplitude a1 = amps_[i | mask];
            amps_[i] = m[0][0] * a0 + m[0][1] * a1;
            amps_[i | mask] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    // Applies X to `target` on the subspace where all `controls` bits are 1.
    void apply_controlled_x(std::uint64_t controls, std::uint32_t target) {
        const std::uint64_t tmask = std::uint64_t{1} << target;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if ((i & controls) == controls && !(i & tmask)) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
    }

    void apply_phase(std::uint64_t mask_all_ones, Amplitude phase) {
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if ((i & mask_all_ones) == mask_all_ones) amps_[i] *= phase;
        }
    }

    void apply_swap(std::uint32_t a, std::uint32_t b, std::uint64_t controls = 0) {
        const std::uint64_t amask = std::uint64_t{1} << a;
        const std::uint64_t bmask = std::uint64_t{1} << b;
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            if ((i & controls) != controls) continue;
            if ((i & amask) && !(i & bmask)) {
                std::swap(amps_[i], amps_[(i & ~amask) | bmask]);
            }
        }
    }

    // Z-basis measurement with collapse and renormalization; returns true for
    // One. `u` is a uniform draw in [0, 1).
    bool measure_z(std::uint32_t slot, double u) {
        double p1 = probability_of_one(slot);
        bool one = u < p1;
        const std::uint64_t mask = std::uint64_t{1} << slot;
        double keep = one ? p1 : 1.0 - p1;
        if (keep <= 0.0) {
            throw SimulationError("measurement collapsed onto a zero-probability branch");
        }
        double scale = 1.0 / std::sqrt(keep);
        for (std::uint64_t i = 0; i < amps_.size(); ++i) {
            bool bit = (i & mask) != 0;
            amps_[i] = bit == one ? amps_[i] * scale : Amplitude{0.0, 0.0};
        }
        return one;
    }

private:
    std::uint32_t slots_;
    std::vector<Amplitude> amps_;
};

struct RunResult {
    StateVector state{0};
    std::vector<int> results;  // indexed by result slot; 1 = One
};

struct RunOptions {
    // Qubit ids whose first Alloc skips the |0> cleanliness check, so basis
    // inputs can be preloaded for equivalence runs.
    std::set<std::uint32_t> preloaded;
    std::uint64_t initial_basis_state = 0;
};

namespace detail {

inline double next_uniform(std::mt19937_64& rng) {
    // Portable uniform double in [0, 1); distribution classes vary across
    // standard library implementations.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void apply_gate(StateVector& state, const GateInstr& instr) {
    using A = StateVector::Amplitude;
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    const auto& q = instr.operands;
    auto bit = [&](std::size_t k) { return std::uint64_t{1} << q[k].index; };
    switch (instr.gate.op) {
        case GateOp::H: {
            const A m[2][2] = {{inv_sqrt2, inv_sqrt2}, {inv_sqrt2, -inv_sqrt2}};
            state.apply_single(q[0].index, m);
            break;
        }
        case GateOp::X:
            state.apply_controlled_x(0, q[0].index);
            break;
        case GateOp::Y: {
            const A m[2][2] = {{0.0, A{0.0, -1.0}}, {A{0.0, 1.0}, 0.0}};
            state.apply_single(q[0].index, m);
            break;
        }
        case GateOp::Z:
            state.apply_phase(bit(0), -1.0);
            break;
        case GateOp::S:
            state.apply_phase(bit(0), A{0.0, 1.0});
            break;
        case GateOp::Sdg:
            state.apply_phase(bit(0), A{0.0, -1.0});
            break;
        case GateOp::T:
            state.apply_phase(bit(0), std::polar(1.0, std::numbers::pi_v<double> / 4));
            break;
        case GateOp::Tdg:
            state.apply_phase(bit(0), std::polar(1.0, -std::numbers::pi_v<double> / 4));
            break;
        case GateOp::Rz: {
            const A m[2][2] = {{std::polar(1.0, -instr.gate.angle / 2), 0.0},
                               {0.0, std::polar(1.0, instr.gate.angle / 2)}};
            state.apply_single(q[0].index, m);
            break;
        }
        case GateOp::CNOT:
            state.apply_controlled_x(bit(0), q[1].index);
            break;
        case GateOp::CZ:
            state.apply_phase(bit(0) | bit(1), -1.0);
            break;
        case GateOp::CCX:
            state.apply_controlled_x(bit(0) | bit(1), q[2].index);
            break;
        case GateOp::SWAP:
            state.apply_swap(q[0].index, q[1].index);
            break;
        case GateOp::CSWAP:
            state.apply_swap(q[1].index, q[2].index, bit(0));
            break;
        case GateOp::MeasureZ:
        case GateOp::MeasureXReset:
            throw SimulationError("internal: measurement routed to apply_gate");
    }
}

}  // namespace detail

// Executes the trace in order. Alloc and Release assert that the slot is
// clean (|0> within 1e-9), catching dirty-reuse bugs; measurements draw from
// the seeded generator, collapse, and reset the slot to |0>.
inline RunResult run(const Trace& trace, std::uint32_t n_slots, std::uint64_t seed,
                     const RunOptions& options = {}) {
    if (trace.qubit_high_watermark > n_slots) {
        throw SimulationError("trace exceeds slot budget (" +
                              std::to_string(trace.qubit_high_watermark) + " > " +
                              std::to_string(n_slots) + ")");
    }
    {
        auto diags = validate_trace(trace);
        if (!diags.empty()) {
            throw SimulationError("invalid trace: " + diags.front().message);
        }
    }

    RunResult out;
    out.state = StateVector(n_slots);
    if (options.initial_basis_state != 0) {
        out.state.set_basis_state(options.initial_basis_state);
    }
    out.results.assign(static_cast<std::size_t>(trace.result_count), 0);
    std::mt19937_64 rng(seed);

    constexpr double kCleanTolerance = 1e-9;  // amplitude tolerance

    // Preloaded ids carry caller data: they enter in an arbitrary basis state
    // and leave holding results, so cleanliness checks do not apply to them.
    auto check_clean = [&](QubitId q, const char* what) {
        if (options.preloaded.count(q.index)) return;
        double p1 = out.state.probability_of_one(q.index);
        if (p1 > kCleanTolerance * kCleanTolerance) {
            throw SimulationError("slot " + std::to_string(q.index) + " not clean at " +
                                  what);
        }
    };

    for (const Instruction& instr : trace.instructions) {
        if (const auto* g = std::get_if<GateInstr>(&instr.op)) {
            if (is_measurement(g->gate.op)) {
                std::uint32_t slot = g->operands[0].index;
                if (g->gate.op == GateOp::MeasureXReset) {
                    const StateVector::Amplitude inv_sqrt2 = 0.7071067811865475244;
                    const StateVector::Amplitude m[2][2] = {{inv_sqrt2, inv_sqrt2},
                                                            {inv_sqrt2, -inv_sqrt2}};
                    out.state.apply_single(slot, m);
                }
                bool one = out.state.measure_z(slot, detail::next_uniform(rng));
                if (one) out.state.apply_controlled_x(0, slot);  // reset to |0>
                if (g->result_slot) {
                    out.results[static_cast<std::size_t>(*g->result_slot)] = one ? 1 : 0;
                }
                continue;
            }
            if (g->gate.condition &&
                out.results[static_cast<std::size_t>(*g->gate.condition)] != 1) {
                continue;
            }
            detail::apply_gate(out.state, *g);
            double n = out.state.norm();
            if (std::abs(n - 1.0) > 1e-9) {
                throw SimulationError("state norm drifted to " + std::to_string(n));
            }
        } else if (const auto* a = std::get_if<AllocInstr>(&instr.op)) {
            for (QubitId q : a->ids) check_clean(q, "Alloc");
        } else if (const auto* r = std::get_if<ReleaseInstr>(&instr.op)) {
            for (QubitId q : r->ids) check_clean(q, "Release");
        }
        // markers: no effect
    }
    return out;
}

struct EquivalenceResult {
    bool equivalent = true;
    double max_deviation = 0.0;
};

// Ids allocated directly in the entry frame, outside any parallel or fanout
// region: the program's semantic register for equivalence testing.
inline std::vector<QubitId> principal_qubits(const Trace& trace) {
    std::vector<QubitId> out;
    int region_depth = 0;
    for (const Instruction& instr : trace.instructions) {
        if (std::holds_alternative<ParallelBeginInstr>(instr.op) ||
            std::holds_alternative<FanoutBeginInstr>(instr.op)) {
            ++region_depth;
        } else if (std::holds_alternative<ParallelEndInstr>(instr.op) ||
                   std::holds_alternative<FanoutEndInstr>(instr.op)) {
            --region_depth;
        } else if (const auto* a = std::get_if<AllocInstr>(&instr.op)) {
            if (region_depth == 0 && instr.stack.size() == 1) {
                out.insert(out.end(), a->ids.begin(), a->ids.end());
            }
        }
    }
    return out;
}

// Runs both traces from every computational basis state of the principal
// qubits, for every seed, and compares final states up to one global phase
// (fixed on the largest-magnitude amplitude of A).
inline EquivalenceResult equivalent(const Trace& a, const Trace& b, std::uint32_t n_slots,
                                    double tolerance, const std::vector<std::uint64_t>& seeds) {
    std::vector<QubitId> principal = principal_qubits(a);
    {
        std::vector<QubitId> principal_b = principal_qubits(b);
        if (principal != principal_b) {
            throw SimulationError("traces have different principal registers");
        }
    }
    if (principal.size() > 20) {
        throw SimulationError("too many principal qubits to enumerate basis inputs");
    }

    RunOptions options;
    for (QubitId q : principal) options.preloaded.insert(q.index);

    EquivalenceResult result;
    const std::uint64_t inputs = std::uint64_t{1} << principal.size();
    for (std::uint64_t input = 0; input < inputs; ++input) {
        std::uint64_t basis = 0;
        for (std::size_t k = 0; k < principal.size(); ++k) {
            if (input & (std::uint64_t{1} << k)) basis |= std::uint64_t{1} << principal[k].index;
        }
        RunOptions run_options = options;
        run_options.initial_basis_state = basis;
        for (std::uint64_t seed : seeds.empty() ? std::vector<std::uint64_t>{1} : seeds) {
            RunResult ra = run(a, n_slots, seed, run_options);
            RunResult rb = run(b, n_slots, seed, run_options);
            const auto& va = ra.state.amplitudes();
            const auto& vb = rb.state.amplitudes();

            std::size_t anchor = 0;
            double best = -1.0;
            for (std::size_t i = 0; i < va.size(); ++i) {
                double mag = std::abs(va[i]);
                if (mag > best + 1e-15) {
                    best = mag;
                    anchor = i;
                }
            }
            std::complex<double> phase{1.0, 0.0};
            if (std::abs(va[anchor]) > 0.0 && std::abs(vb[anchor]) > 0.0) {
                phase = (va[anchor] / std::abs(va[anchor])) /
                        (vb[anchor] / std::abs(vb[anchor]));
            }
            double dev = 0.0;
            for (std::size_t i = 0; i < va.size(); ++i) {
                dev = std::max(dev, std::abs(va[i] - phase * vb[i]));
            }
            result.max_deviation = std::max(result.max_deviation, dev);
            if (dev >= tolerance) result.equivalent = false;
        }
    }
    return result;
}

}  // namespace qpar
