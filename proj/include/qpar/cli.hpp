#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qpar/flamegraph.hpp"
#include "qpar/lowering.hpp"
#include "qpar/parser.hpp"
#include "qpar/scheduler.hpp"
#include "qpar/simulator.hpp"
#include "qpar/stdlib.hpp"

namespace qpar::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;
inline constexpr int kParseError = 3;
inline constexpr int kSemanticError = 4;
inline constexpr int kMismatch = 5;

struct RunConfig {
    std::vector<std::string> sources;
    std::string entry = "Main";
    EntryArgs args;
    std::string metric = "t-depth";  // preset name or config file path
    long long rz_cost = 1;
    bool force_serial = false;
    std::string output;
    std::string profile_name;
    std::vector<std::uint64_t> seeds = {1, 2};
    double tolerance = 1e-9;
    bool check_parallel = false;
    long long max_qubits = 0;  // 0 = unbounded
    int top_frames = 10;
};

inline MetricTable resolve_metric(const std::string& name, long long rz_cost) {
    if (name == "t-depth") return MetricTable::t_depth(rz_cost);
    if (name == "full-depth") return MetricTable::full_depth();
    return MetricTable::from_file(name);
}

// `name=value`; the value is an integer when it parses as one in full.
inline std::pair<std::string, ArgValue> parse_entry_arg(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error("entry argument must be name=value, got '" + text + "'");
    }
    std::string name = text.substr(0, eq);
    std::string value = text.substr(eq + 1);
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used == value.size()) return {name, ArgValue::integer(v)};
    } catch (const std::exception&) {
    }
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used == value.size()) return {name, ArgValue::real(v)};
    } catch (const std::exception&) {
    }
    throw Error("cannot parse entry argument value '" + value + "'");
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Ast load_program(const std::vector<std::string>& paths, bool force_serial) {
    if (paths.empty()) throw Error("no source files given");
    Ast merged;
    for (const std::string& path : paths) {
        Ast ast = parse_unresolved(read_file(path));
        for (OperationDef& op : ast.operations) merged.operations.push_back(std::move(op));
    }
    resolve(merged);
    if (force_serial) {
        merged = strip_parallel(merged);
        resolve(merged);
    }
    return merged;
}

inline Trace lower(const Ast& ast, const RunConfig& config) {
    Trace trace = trace_program(ast, config.entry, config.args);
    if (config.max_qubits > 0 &&
        trace.qubit_high_watermark > static_cast<std::uint64_t>(config.max_qubits)) {
        throw ValidationError("qubit high watermark " +
                              std::to_string(trace.qubit_high_watermark) +
                              " exceeds --max-qubits " + std::to_string(config.max_qubits));
    }
    return trace;
}

inline void print_report(std::ostream& out, const RunConfig& config,
                         const ResourceReport& report) {
    out << "metric: " << config.metric << "\n";
    out << "depth: " << report.depth << "\n";
    out << "t-count: " << report.t_count << "\n";
    out << "gate-count: " << report.gate_count << "\n";
    out << "qubits: " << report.qubit_high_watermark << "\n";
    out << "top frames by critical-path contribution (total self name):\n";
    int shown = 0;
    for (const FrameCost& frame : report.frames) {
        if (shown++ >= config.top_frames) break;
        out << "  " << frame.total << " " << frame.self << " " << frame.name << "\n";
    }
}

}  // namespace detail

// Classifies an exception into the documented exit codes and prints it.
inline int report_error(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const ParseError*>(&e)) return kParseError;
    if (dynamic_cast<const ValidationError*>(&e)) return kSemanticError;
    if (dynamic_cast<const LoweringError*>(&e)) return kSemanticError;
    if (dynamic_cast<const SimulationError*>(&e)) return kSemanticError;
    return kUsageError;
}

inline int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Ast ast = detail::load_program(config.sources, config.force_serial);
        Trace trace = detail::lower(ast, config);
        MetricTable metric = resolve_metric(config.metric, config.rz_cost);
        Schedule sched = schedule(trace, metric);
        detail::print_report(out, config, resource_report(trace, sched));
        return kOk;
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

inline int cmd_flamegraph(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Ast ast = detail::load_program(config.sources, config.force_serial);
        Trace trace = detail::lower(ast, config);
        MetricTable metric = resolve_metric(config.metric, config.rz_cost);
        Schedule sched = schedule(trace, metric);
        auto path = critical_path(sched, trace);

        std::string name = config.profile_name;
        if (name.empty()) {
            name = config.entry + " (" + metric.name() + ")";
        }
        std::string output = config.output;
        if (output.empty()) {
            output = (config.sources.empty() ? config.entry : config.sources.front()) +
                     ".speedscope.json";
        }
        std::ofstream file(output, std::ios::binary);
        if (!file) throw Error("cannot write '" + output + "'");
        file << to_speedscope(path, sched.depth, name) << "\n";

        out << "depth: " << sched.depth << "\n";
        out << "wrote: " << output << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

inline int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Ast ast = detail::load_program(config.sources, config.force_serial);
        if (config.check_parallel) {
            Trace parallel = detail::lower(ast, config);
            Ast serial_ast = strip_parallel(ast);
            resolve(serial_ast);
            Trace serial = detail::lower(serial_ast, config);
            std::uint32_t slots =
                std::max(parallel.qubit_high_watermark, serial.qubit_high_watermark);
            EquivalenceResult r =
                equivalent(parallel, serial, slots, config.tolerance, config.seeds);
            out << (r.equivalent ? "PASS" : "FAIL") << " max deviation "
                << std::setprecision(3) << std::scientific << r.max_deviation << "\n";
            return r.equivalent ? kOk : kMismatch;
        }

        Trace trace = detail::lower(ast, config);
        RunResult result =
            run(trace, trace.qubit_high_watermark, config.seeds.empty() ? 1 : config.seeds[0]);
        for (std::size_t i = 0; i < result.results.size(); ++i) {
            out << "result[" << i << "] = " << (result.results[i] ? "One" : "Zero") << "\n";
        }
        out << "final state (nonzero amplitudes):\n";
        const auto& amps = result.state.amplitudes();
        int shown = 0;
        for (std::size_t i = 0; i < amps.size() && shown < 16; ++i) {
            if (std::abs(amps[i]) < 1e-9) continue;
            ++shown;
            out << "  |";
            for (std::uint32_t b = 0; b < result.state.slots(); ++b) {
                out << ((i >> b) & 1);
            }
            out << "> " << std::setprecision(6) << std::fixed << amps[i].real() << " + "
                << amps[i].imag() << "i\n";
            out.unsetf(std::ios::fixed);
        }
        return kOk;
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

struct SweepConfig {
    Family family = Family::Mcx;
    std::vector<int> sizes;
    std::vector<Mode> modes = {Mode::Parallel, Mode::Serial};
    std::optional<int> cutoff;  // mcx
    int fourier = 1;            // givens
    int bitwidth = 32;          // givens
    std::string metric = "t-depth";
    long long rz_cost = 1;
};

// One CSV row per (size, mode): family,size,mode,extra,depth,t_count,qubits.
inline int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err) {
    try {
        MetricTable metric = resolve_metric(config.metric, config.rz_cost);
        out << "family,size,mode,extra,depth,t_count,qubits\n";
        for (int size : config.sizes) {
            for (Mode mode : config.modes) {
                CircuitSpec spec;
                spec.family = config.family;
                spec.size = size;
                spec.mode = mode;
                spec.fourier = config.fourier;
                spec.bitwidth = config.bitwidth;
                if (config.cutoff) spec.cutoff = *config.cutoff;
                GeneratedProgram program = generate_program(spec);
                Trace trace =
                    trace_program(parse(program.source), program.entry, program.args);
                Schedule sched = schedule(trace, metric);
                std::string extra;
                if (config.family == Family::Mcx && config.cutoff) {
                    extra = "cutoff=" + std::to_string(*config.cutoff);
                } else if (config.family == Family::Givens) {
                    extra = "q=" + std::to_string(config.fourier) +
                            ";bitwidth=" + std::to_string(config.bitwidth);
                }
                out << family_name(config.family) << "," << size << "," << mode_name(mode)
                    << "," << extra << "," << sched.depth << "," << t_count(trace) << ","
                    << trace.qubit_high_watermark << "\n";
            }
        }
        return kOk;
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

struct ExamplesConfig {
    bool list = false;
    std::string write_dir;
    std::optional<Family> family;
    int size = 8;
    int cutoff = -1;
    int fourier = 1;
    int bitwidth = 32;
    Mode mode = Mode::Parallel;
    std::string output;
};

inline int cmd_examples(const ExamplesConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.list) {
            for (const CorpusEntry& e : corpus()) {
                out << e.file << " (entry " << e.entry << ")\n";
            }
            return kOk;
        }
        if (!config.write_dir.empty()) {
            std::filesystem::create_directories(config.write_dir);
            for (const CorpusEntry& e : corpus()) {
                std::ofstream file(std::filesystem::path(config.write_dir) / e.file,
                                   std::ios::binary);
                if (!file) throw Error("cannot write corpus file '" + e.file + "'");
                file << e.source;
            }
            out << "wrote " << corpus().size() << " corpus files to " << config.write_dir
                << "\n";
            return kOk;
        }
        if (!config.family) {
            throw Error("examples: pass --list, --write-dir, or --family");
        }
        CircuitSpec spec;
        spec.family = *config.family;
        spec.size = config.size;
        spec.cutoff = config.cutoff;
        spec.fourier = config.fourier;
        spec.bitwidth = config.bitwidth;
        spec.mode = config.mode;
        GeneratedProgram program = generate_program(spec);
        if (config.output.empty()) {
            out << program.source;
        } else {
            std::ofstream file(config.output, std::ios::binary);
            if (!file) throw Error("cannot write '" + config.output + "'");
            file << program.source;
            out << "wrote: " << config.output << "\n";
        }
        return kOk;
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
}

}  // namespace qpar::cli
