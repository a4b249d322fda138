// ratchetlab: scripted two-party messaging simulator.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ratchetlab/error.hpp"
#include "ratchetlab/sim/attack.hpp"
#include "ratchetlab/sim/harness.hpp"
#include "ratchetlab/sim/metadata.hpp"
#include "ratchetlab/sim/scenario.hpp"
#include "ratchetlab/sim/vectors.hpp"

using namespace ratchetlab;

namespace {

constexpr int kExpectationFailed = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::config, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_rules(const sim::RuleCheck& r) {
    std::cout << "ratchet rules: " << r.judged << " sends judged, " << r.establishments << " establishments, "
              << "counts [white->white " << r.rule_counts[0] << ", green->green " << r.rule_counts[1]
              << ", white->green " << r.rule_counts[2] << ", green->white " << r.rule_counts[3] << "]"
              << (r.ok() ? "" : " VIOLATED") << '\n';
    for (const auto& v : r.violations) std::cout << "  violation: " << v << '\n';
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& transcript_out) {
    sim::Scenario scenario = sim::load_scenario(path);
    if (seed) scenario.seed = *seed;
    sim::RunResult result = sim::run(scenario);

    if (!transcript_out.empty()) {
        std::ofstream out(transcript_out, std::ios::binary);
        if (!out) throw Error(Errc::config, "cannot write " + transcript_out);
        out << sim::transcript_to_jsonl(result.transcript);
    }

    std::size_t delivered = 0;
    std::size_t rejected = 0;
    for (const auto& [_, fate] : result.messages) {
        delivered += fate.delivered_ok;
        rejected += fate.rejected;
    }
    std::cout << "seed " << scenario.seed << ": " << result.messages.size() << " messages, " << delivered
              << " delivered, " << rejected << " rejected deliveries, " << result.transcript.size()
              << " transcript events\n";
    print_rules(result.rules);
    std::cout << "skipped keys remaining: " << result.skipped_keys_remaining << '\n';
    for (const auto& f : result.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (result.ok() ? "all expectations hold\n" : "expectations violated\n");
    return result.ok() ? 0 : kExpectationFailed;
}

int cmd_attack(const std::string& path) {
    sim::Scenario scenario = sim::load_scenario(path);
    if (scenario.parties.size() < 2) throw Error(Errc::config, "attack needs at least two parties");
    std::size_t sends = 0;
    for (const auto& e : scenario.script)
        if (std::holds_alternative<sim::SendEvent>(e)) ++sends;

    sim::AttackOptions opts;
    if (sends > 0) opts.messages = sends;
    auto report = sim::mark_attack_suite(scenario.parties[0], scenario.parties[1], scenario.seed, opts);
    std::cout << sim::render(report);

    sim::RunResult scripted = sim::run(scenario);
    std::cout << "scripted run: " << (scripted.ok() ? "expectations hold" : "expectations violated") << '\n';
    for (const auto& f : scripted.failures) std::cout << "FAIL " << f << '\n';

    const bool ok = report.all_pass() && report.mitm_delivery_succeeded && scripted.ok();
    return ok ? 0 : kExpectationFailed;
}

int cmd_metadata(const std::string& path) {
    auto events = sim::transcript_from_jsonl(read_file(path));
    auto summary = sim::fold_transcript(events);
    std::cout << render_metadata(summary);
    return 0;
}

int cmd_vectors() {
    bool all = true;
    for (const auto& v : sim::run_primitive_vectors()) {
        std::cout << (v.pass() ? "PASS " : "FAIL ") << v.name << " [" << v.source << "]";
        if (!v.pass()) std::cout << "\n  expected " << v.expected << "\n  actual   " << v.actual;
        std::cout << '\n';
        all = all && v.pass();
    }
    return all ? 0 : kExpectationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratchetlab - X3DH and Double Ratchet simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string transcript_out;
    auto* run = app.add_subcommand("run", "run a scenario and check its expectations");
    run->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--transcript", transcript_out, "write the transcript as JSON lines");

    std::string attack_path;
    auto* attack = app.add_subcommand("attack", "run Mark's attack suite on the first two parties");
    attack->add_option("scenario", attack_path, "scenario JSON")->required()->check(CLI::ExistingFile);

    std::string transcript_path;
    auto* metadata = app.add_subcommand("metadata", "fold a transcript into the server's metadata view");
    metadata->add_option("transcript", transcript_path, "transcript JSONL")->required()->check(CLI::ExistingFile);

    auto* vectors = app.add_subcommand("vectors", "check primitives against published test vectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(scenario_path, seed, transcript_out);
        if (*attack) return cmd_attack(attack_path);
        if (*metadata) return cmd_metadata(transcript_path);
        if (*vectors) return cmd_vectors();
    } catch (const Error& e) {
        std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
