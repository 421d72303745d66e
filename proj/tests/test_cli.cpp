#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>
#include <unistd.h>

#include "qpar/cli.hpp"

using namespace qpar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qpar_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name, const std::string& content) {
        fs::path p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }
};

}  // namespace

TEST_CASE("estimate reports depth, counts, and frames") {
    TempDir dir;
    std::string source = dir.file("mcx8.qpl", gen_mcx(8, mcx_full_cutoff(8), Mode::Parallel));

    cli::RunConfig config;
    config.sources = {source};
    std::ostringstream out, err;
    REQUIRE(cli::cmd_estimate(config, out, err) == cli::kOk);
    std::string text = out.str();
    CHECK(text.find("depth: 3\n") != std::string::npos);
    CHECK(text.find("t-count: 28\n") != std::string::npos);
    CHECK(text.find("qubits: 20\n") != std::string::npos);
    CHECK(text.find("AndCompute") != std::string::npos);

    config.force_serial = true;
    std::ostringstream serial_out;
    REQUIRE(cli::cmd_estimate(config, serial_out, err) == cli::kOk);
    CHECK(serial_out.str().find("depth: 7\n") != std::string::npos);
}

TEST_CASE("estimate exit codes") {
    TempDir dir;
    std::ostringstream out, err;

    cli::RunConfig missing;
    missing.sources = {dir.file("p.qpl", gen_controlled_rz(Mode::Parallel))};
    missing.entry = "ApplyRotations";
    CHECK(cli::cmd_estimate(missing, out, err) == cli::kSemanticError);
    CHECK(err.str().find("missing entry argument n") != std::string::npos);

    cli::RunConfig bad_syntax;
    bad_syntax.sources = {dir.file("bad.qpl", "operation Main() : Unit {")};
    CHECK(cli::cmd_estimate(bad_syntax, out, err) == cli::kParseError);

    cli::RunConfig shared;
    shared.sources = {dir.file("shared.qpl", R"(
operation Main() : Unit {
    use q = Qubit();
    parallel sections {
        section {
            X(q);
        }
        section {
            X(q);
        }
    }
}
)")};
    CHECK(cli::cmd_estimate(shared, out, err) == cli::kSemanticError);

    cli::RunConfig guarded;
    guarded.sources = {dir.file("mcx.qpl", gen_mcx(8, 3, Mode::Parallel))};
    guarded.max_qubits = 4;
    CHECK(cli::cmd_estimate(guarded, out, err) == cli::kSemanticError);
}

TEST_CASE("force-serial output is byte-identical to a stripped source") {
    TempDir dir;
    std::string parallel_text = gen_controlled_rz(Mode::Parallel);
    std::string stripped_text =
        std::regex_replace(parallel_text, std::regex("parallel "), "");

    cli::RunConfig forced;
    forced.sources = {dir.file("p.qpl", parallel_text)};
    forced.entry = "ApplyRotations";
    forced.args["n"] = ArgValue::integer(6);
    forced.force_serial = true;

    cli::RunConfig plain;
    plain.sources = {dir.file("s.qpl", stripped_text)};
    plain.entry = "ApplyRotations";
    plain.args["n"] = ArgValue::integer(6);

    std::ostringstream a, b, err;
    REQUIRE(cli::cmd_estimate(forced, a, err) == cli::kOk);
    REQUIRE(cli::cmd_estimate(plain, b, err) == cli::kOk);
    CHECK(a.str() == b.str());

    // same for a fanout loop: remove the fanout clause textually
    std::string fanout_text = gen_fanout_cnot(Mode::Parallel);
    std::string fanout_stripped =
        std::regex_replace(fanout_text, std::regex(" fanout\\(control, k\\)"), "");
    fanout_stripped = std::regex_replace(fanout_stripped, std::regex("parallel "), "");

    cli::RunConfig ffor;
    ffor.sources = {dir.file("f.qpl", fanout_text)};
    ffor.entry = "FanoutCnot";
    ffor.args["n"] = ArgValue::integer(8);
    ffor.args["k"] = ArgValue::integer(4);
    ffor.force_serial = true;
    cli::RunConfig fplain = ffor;
    fplain.sources = {dir.file("fs.qpl", fanout_stripped)};
    fplain.force_serial = false;

    std::ostringstream fa, fb;
    REQUIRE(cli::cmd_estimate(ffor, fa, err) == cli::kOk);
    REQUIRE(cli::cmd_estimate(fplain, fb, err) == cli::kOk);
    CHECK(fa.str() == fb.str());
}

TEST_CASE("flamegraph writes a valid document whose endValue is the depth") {
    TempDir dir;
    cli::RunConfig config;
    config.sources = {dir.file("mcx.qpl", gen_mcx(8, mcx_full_cutoff(8), Mode::Parallel))};
    config.output = (dir.path / "out.speedscope.json").string();

    std::ostringstream out, err;
    REQUIRE(cli::cmd_flamegraph(config, out, err) == cli::kOk);
    CHECK(out.str().find("depth: 3\n") != std::string::npos);

    std::ifstream in(config.output);
    REQUIRE(in.good());
    nlohmann::json doc = nlohmann::json::parse(in);
    CHECK(doc["profiles"][0]["endValue"] == 3);
    CHECK(validate_speedscope(doc).empty());

    cli::RunConfig serial = config;
    serial.force_serial = true;
    serial.output = (dir.path / "serial.speedscope.json").string();
    std::ostringstream serial_out;
    REQUIRE(cli::cmd_flamegraph(serial, serial_out, err) == cli::kOk);
    CHECK(serial_out.str().find("depth: 7\n") != std::string::npos);

    cli::RunConfig empty;
    empty.sources = {dir.file("empty.qpl", "operation Main() : Unit {\n}\n")};
    empty.output = (dir.path / "empty.speedscope.json").string();
    std::ostringstream empty_out;
    REQUIRE(cli::cmd_flamegraph(empty, empty_out, err) == cli::kOk);
    std::ifstream empty_in(empty.output);
    nlohmann::json empty_doc = nlohmann::json::parse(empty_in);
    CHECK(empty_doc["profiles"][0]["endValue"] == 0);
    CHECK(empty_doc["profiles"][0]["events"].empty());
    CHECK(validate_speedscope(empty_doc).empty());
}

TEST_CASE("estimate accepts a metric config file") {
    TempDir dir;
    const std::string table = "T=1\nTdg=1\nCNOT=2\n";
    std::string metric_path = dir.file("costs.cfg", table);
    cli::RunConfig config;
    config.sources = {dir.file("g.qpl", gen_and(AndGadget::Compute))};
    config.metric = metric_path;

    std::ostringstream out, err;
    REQUIRE(cli::cmd_estimate(config, out, err) == cli::kOk);
    Trace trace = trace_program(parse(gen_and(AndGadget::Compute)), "Main");
    std::int64_t want = schedule(trace, MetricTable::from_string(table)).depth;
    CHECK(out.str().find("depth: " + std::to_string(want) + "\n") != std::string::npos);
    CHECK(want > 1);  // the CNOT costs are in effect

    cli::RunConfig bad = config;
    bad.metric = dir.file("bad.cfg", "NOTAGATE=1\n");
    CHECK(cli::cmd_estimate(bad, out, err) == cli::kUsageError);
}

TEST_CASE("simulate --check-parallel passes on corpus programs") {
    TempDir dir;
    std::ostringstream err;

    cli::RunConfig adder;
    adder.sources = {dir.file("adder2.qpl", gen_cla_adder(2, Mode::Parallel))};
    adder.check_parallel = true;
    std::ostringstream adder_out;
    REQUIRE(cli::cmd_simulate(adder, adder_out, err) == cli::kOk);
    CHECK(adder_out.str().rfind("PASS", 0) == 0);

    cli::RunConfig mcx;
    mcx.sources = {dir.file("mcx3.qpl", gen_mcx(3, mcx_full_cutoff(3), Mode::Parallel))};
    mcx.check_parallel = true;
    std::ostringstream mcx_out;
    REQUIRE(cli::cmd_simulate(mcx, mcx_out, err) == cli::kOk);
    CHECK(mcx_out.str().rfind("PASS", 0) == 0);
}

TEST_CASE("simulate fails with a diagnostic before simulating an invalid program") {
    TempDir dir;
    cli::RunConfig config;
    config.sources = {dir.file("shared.qpl", R"(
operation Main() : Unit {
    use q = Qubit();
    use r = Qubit();
    parallel sections {
        section {
            CNOT(q, r);
        }
        section {
            X(q);
        }
    }
}
)")};
    config.check_parallel = true;
    std::ostringstream out, err;
    CHECK(cli::cmd_simulate(config, out, err) == cli::kSemanticError);
    CHECK(err.str().find("shared across sibling sections") != std::string::npos);
}

TEST_CASE("plain simulate prints results and amplitudes") {
    TempDir dir;
    cli::RunConfig config;
    config.sources = {dir.file("m.qpl", R"(
operation Main() : Unit {
    use q = Qubit();
    if MResetZ(q) == One {
        Z(q);
    }
}
)")};
    std::ostringstream out, err;
    REQUIRE(cli::cmd_simulate(config, out, err) == cli::kOk);
    CHECK(out.str().find("result[0] = Zero") != std::string::npos);
    CHECK(out.str().find("|0>") != std::string::npos);
}

TEST_CASE("sweep emits one CSV row per size and mode") {
    cli::SweepConfig config;
    config.family = Family::Mcx;
    config.sizes = {2, 4, 8, 16, 32};
    std::ostringstream out, err;
    REQUIRE(cli::cmd_sweep(config, out, err) == cli::kOk);

    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "family,size,mode,extra,depth,t_count,qubits");
    int rows = 0;
    int expected_parallel[] = {1, 2, 3, 4, 5};
    int expected_serial[] = {1, 3, 7, 15, 31};
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string family, size, mode, extra, depth, tc, qubits;
        std::getline(cells, family, ',');
        std::getline(cells, size, ',');
        std::getline(cells, mode, ',');
        std::getline(cells, extra, ',');
        std::getline(cells, depth, ',');
        std::getline(cells, tc, ',');
        std::getline(cells, qubits, ',');
        CHECK(family == "mcx");
        int n = std::stoi(size);
        int idx = n == 2 ? 0 : n == 4 ? 1 : n == 8 ? 2 : n == 16 ? 3 : 4;
        CHECK(std::stoi(depth) ==
              (mode == "parallel" ? expected_parallel[idx] : expected_serial[idx]));
        CHECK(std::stoi(tc) == 4 * (n - 1));
        ++rows;
    }
    CHECK(rows == 10);
}

TEST_CASE("examples lists, writes, and generates") {
    std::ostringstream out, err;
    cli::ExamplesConfig list;
    list.list = true;
    REQUIRE(cli::cmd_examples(list, out, err) == cli::kOk);
    CHECK(out.str().find("rotations.qpl") != std::string::npos);

    TempDir dir;
    cli::ExamplesConfig write;
    write.write_dir = (dir.path / "corpus").string();
    std::ostringstream write_out;
    REQUIRE(cli::cmd_examples(write, write_out, err) == cli::kOk);
    for (const CorpusEntry& e : corpus()) {
        CHECK(fs::exists(fs::path(write.write_dir) / e.file));
    }

    cli::ExamplesConfig genr;
    genr.family = Family::Mcx;
    genr.size = 4;
    genr.cutoff = 2;
    std::ostringstream gen_out;
    REQUIRE(cli::cmd_examples(genr, gen_out, err) == cli::kOk);
    CHECK(gen_out.str() == gen_mcx(4, 2, Mode::Parallel));

    cli::ExamplesConfig nothing;
    CHECK(cli::cmd_examples(nothing, out, err) == cli::kUsageError);
}

TEST_CASE("programs may be split across source files") {
    TempDir dir;
    std::string lib = dir.file("lib.qpl", R"(
operation Flip(q : Qubit) : Unit {
    T(q);
    X(q);
}
)");
    std::string main = dir.file("main.qpl", R"(
operation Main() : Unit {
    use q = Qubit();
    Flip(q);
    Adjoint Flip(q);
}
)");
    cli::RunConfig config;
    config.sources = {lib, main};
    std::ostringstream out, err;
    REQUIRE(cli::cmd_estimate(config, out, err) == cli::kOk);
    CHECK(out.str().find("t-count: 2\n") != std::string::npos);

    // a call across files fails if only one file is loaded
    cli::RunConfig partial;
    partial.sources = {main};
    CHECK(cli::cmd_estimate(partial, out, err) == cli::kParseError);
}

TEST_CASE("entry argument parsing") {
    auto [name, value] = cli::parse_entry_arg("n=8");
    CHECK(name == "n");
    CHECK(std::get<long long>(value.value) == 8);

    auto [rname, rvalue] = cli::parse_entry_arg("angle=0.5");
    CHECK(rname == "angle");
    CHECK(std::get<double>(rvalue.value) == 0.5);

    CHECK_THROWS_AS(cli::parse_entry_arg("oops"), Error);
    CHECK_THROWS_AS(cli::parse_entry_arg("n=abc"), Error);
}
