// Command-line front end: estimate, flamegraph, simulate, sweep, examples.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpar/cli.hpp"

namespace {

using qpar::cli::RunConfig;

std::string default_metric() {
    const char* env = std::getenv("QPAR_METRIC");
    return env && *env ? env : "t-depth";
}

void add_common_options(CLI::App* cmd, RunConfig& config, std::vector<std::string>& raw_args) {
    cmd->add_option("sources", config.sources, "QPL source files")->required();
    cmd->add_option("--entry", config.entry, "Entry operation name");
    cmd->add_option("--arg", raw_args, "Entry argument name=value (repeatable)");
    cmd->add_option("--metric", config.metric,
                    "Metric preset (t-depth, full-depth) or config file");
    cmd->add_option("--rz-cost", config.rz_cost, "Rz cost under the t-depth preset");
    cmd->add_flag("--force-serial", config.force_serial,
                  "Strip all parallel/fanout constructs before lowering");
    cmd->add_option("--max-qubits", config.max_qubits,
                    "Fail when the qubit high watermark exceeds this");
}

int finish_config(RunConfig& config, const std::vector<std::string>& raw_args,
                  std::ostream& err) {
    for (const std::string& raw : raw_args) {
        try {
            auto [name, value] = qpar::cli::parse_entry_arg(raw);
            config.args[name] = value;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return qpar::cli::kUsageError;
        }
    }
    return qpar::cli::kOk;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        seeds.push_back(std::stoull(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return seeds;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stoi(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qpar: parse, lower, estimate, and simulate QPL programs"};
    app.require_subcommand(1);

    RunConfig estimate_config;
    estimate_config.metric = default_metric();
    std::vector<std::string> estimate_args;
    CLI::App* estimate = app.add_subcommand("estimate", "Depth/T-count/qubit report");
    add_common_options(estimate, estimate_config, estimate_args);
    estimate->add_option("--top", estimate_config.top_frames,
                         "Number of frames to show in the report");

    RunConfig flame_config;
    flame_config.metric = default_metric();
    std::vector<std::string> flame_args;
    CLI::App* flame =
        app.add_subcommand("flamegraph", "Write the critical path as a speedscope profile");
    add_common_options(flame, flame_config, flame_args);
    flame->add_option("-o,--output", flame_config.output,
                      "Output path (default: <source>.speedscope.json)");
    flame->add_option("--name", flame_config.profile_name, "Profile name");

    RunConfig sim_config;
    sim_config.metric = default_metric();
    std::vector<std::string> sim_args;
    std::string sim_seeds;
    CLI::App* simulate = app.add_subcommand("simulate", "Statevector execution and checks");
    add_common_options(simulate, sim_config, sim_args);
    simulate->add_flag("--check-parallel", sim_config.check_parallel,
                       "Verify the parallel lowering against the serial one");
    simulate->add_option("--seeds", sim_seeds, "Comma-separated measurement seeds");
    simulate->add_option("--tolerance", sim_config.tolerance, "Equivalence tolerance");

    qpar::cli::SweepConfig sweep_config;
    sweep_config.metric = default_metric();
    std::string sweep_family = "mcx";
    std::string sweep_sizes;
    std::string sweep_modes = "parallel,serial";
    int sweep_cutoff = -2;
    std::string sweep_output;
    CLI::App* sweep = app.add_subcommand("sweep", "CSV of depth/T-count/qubits over sizes");
    sweep->add_option("--family", sweep_family,
                      "controlled-rz, and-gate, mcx, cla-adder, ripple-adder, givens")
        ->required();
    sweep->add_option("--sizes", sweep_sizes, "Comma-separated sizes")->required();
    sweep->add_option("--modes", sweep_modes, "Comma-separated modes (parallel, serial)");
    sweep->add_option("--cutoff", sweep_cutoff, "mcx recursion cutoff");
    sweep->add_option("--q", sweep_config.fourier, "givens Fourier register count");
    sweep->add_option("--bitwidth", sweep_config.bitwidth, "givens adder width");
    sweep->add_option("--metric", sweep_config.metric, "Metric preset or config file");
    sweep->add_option("--rz-cost", sweep_config.rz_cost, "Rz cost under t-depth");
    sweep->add_option("-o,--output", sweep_output, "Write CSV here instead of stdout");

    qpar::cli::ExamplesConfig examples_config;
    std::string examples_family;
    std::string examples_mode = "parallel";
    CLI::App* examples = app.add_subcommand("examples", "List or generate corpus programs");
    examples->add_flag("--list", examples_config.list, "List shipped corpus files");
    examples->add_option("--write-dir", examples_config.write_dir,
                         "Write every corpus file into this directory");
    examples->add_option("--family", examples_family, "Generate a program of this family");
    examples->add_option("--size", examples_config.size, "Family size parameter");
    examples->add_option("--cutoff", examples_config.cutoff, "mcx recursion cutoff");
    examples->add_option("--q", examples_config.fourier, "givens Fourier register count");
    examples->add_option("--bitwidth", examples_config.bitwidth, "givens adder width");
    examples->add_option("--mode", examples_mode, "parallel or serial");
    examples->add_option("-o,--output", examples_config.output, "Write the program here");

    CLI11_PARSE(app, argc, argv);

    if (estimate->parsed()) {
        int rc = finish_config(estimate_config, estimate_args, std::cerr);
        if (rc != qpar::cli::kOk) return rc;
        return qpar::cli::cmd_estimate(estimate_config, std::cout, std::cerr);
    }
    if (flame->parsed()) {
        int rc = finish_config(flame_config, flame_args, std::cerr);
        if (rc != qpar::cli::kOk) return rc;
        return qpar::cli::cmd_flamegraph(flame_config, std::cout, std::cerr);
    }
    if (simulate->parsed()) {
        int rc = finish_config(sim_config, sim_args, std::cerr);
        if (rc != qpar::cli::kOk) return rc;
        if (!sim_seeds.empty()) {
            try {
                sim_config.seeds = parse_seed_list(sim_seeds);
            } catch (const std::exception&) {
                std::cerr << "error: bad --seeds list '" << sim_seeds << "'\n";
                return qpar::cli::kUsageError;
            }
        }
        return qpar::cli::cmd_simulate(sim_config, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
        auto family = qpar::family_from_name(sweep_family);
        if (!family) {
            std::cerr << "error: unknown family '" << sweep_family << "'\n";
            return qpar::cli::kUsageError;
        }
        sweep_config.family = *family;
        try {
            sweep_config.sizes = parse_int_list(sweep_sizes);
        } catch (const std::exception&) {
            std::cerr << "error: bad --sizes list '" << sweep_sizes << "'\n";
            return qpar::cli::kUsageError;
        }
        sweep_config.modes.clear();
        for (const std::string& m : {std::string("parallel"), std::string("serial")}) {
            if (sweep_modes.find(m) != std::string::npos) {
                sweep_config.modes.push_back(m == "parallel" ? qpar::Mode::Parallel
                                                             : qpar::Mode::Serial);
            }
        }
        if (sweep_config.modes.empty()) {
            std::cerr << "error: --modes needs parallel and/or serial\n";
            return qpar::cli::kUsageError;
        }
        if (sweep_cutoff != -2) sweep_config.cutoff = sweep_cutoff;
        if (!sweep_output.empty()) {
            std::ofstream file(sweep_output, std::ios::binary);
            if (!file) {
                std::cerr << "error: cannot write '" << sweep_output << "'\n";
                return qpar::cli::kUsageError;
            }
            return qpar::cli::cmd_sweep(sweep_config, file, std::cerr);
        }
        return qpar::cli::cmd_sweep(sweep_config, std::cout, std::cerr);
    }
    if (examples->parsed()) {
        if (!examples_family.empty()) {
            auto family = qpar::family_from_name(examples_family);
            if (!family) {
                std::cerr << "error: unknown family '" << examples_family << "'\n";
                return qpar::cli::kUsageError;
            }
            examples_config.family = *family;
        }
        examples_config.mode =
            examples_mode == "serial" ? qpar::Mode::Serial : qpar::Mode::Parallel;
        return qpar::cli::cmd_examples(examples_config, std::cout, std::cerr);
    }
    return qpar::cli::kUsageError;
}
