// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/cli.hpp>
#include <drts/replay.hpp>
#include <drts/taskset.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace drts {

namespace {

namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitError = 2;
constexpr std::size_t kPlotPoints = 2000;

std::string fixed(double value, int digits = 4) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
    return buffer;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigFileError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<Cycles> parse_cycle_list(const std::string& text) {
    std::vector<Cycles> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const Rational r = Rational::parse(item);
        if (r.den() != 1 || r.is_zero()) {
            throw std::invalid_argument("t_unit must be a positive integer, got '" + item + "'");
        }
        out.push_back(r.num());
    }
    if (out.empty()) {
        throw std::invalid_argument("empty t_unit list");
    }
    return out;
}

double parse_threshold(const std::string& text) {
    const double value = Rational::parse(text).to_double();
    if (!(value > 0.0)) {
        throw std::invalid_argument("threshold must be positive, got '" + text + "'");
    }
    return value;
}

// Collects inputs and outputs of one command and writes the manifest.
class Run {
public:
    Run(std::string command, const std::vector<std::string>& args, const std::string& out_dir)
        : out_dir_(out_dir) {
        manifest_.command = std::move(command);
        manifest_.arguments = args;
        manifest_.working_directory = fs::current_path().string();
        manifest_.output_directory = out_dir;
        fs::create_directories(out_dir_);
    }

    void input(const fs::path& path, bool primary = false) {
        const std::string digest = sha256_file(path);
        manifest_.inputs.push_back({path.string(), digest});
        if (primary) {
            manifest_.config_digest = digest;
        }
    }

    void seeds(std::vector<std::uint64_t> list) { manifest_.seeds = std::move(list); }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(out_dir_ / name, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) {
            throw std::runtime_error("cannot write '" + (out_dir_ / name).string() + "'");
        }
        manifest_.outputs.push_back({name, sha256_hex(content)});
    }

    void finish() {
        const std::string doc = manifest_document(manifest_);
        std::ofstream out(out_dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        out << doc;
    }

private:
    fs::path out_dir_;
    RunManifest manifest_;
};

std::string wcei_row(Cycles t_unit, const WceiFunction& f, const LossReport& loss) {
    return std::to_string(t_unit) + "," + f.a.to_string() + "," + std::to_string(f.b) + "," +
           loss.best_rate.to_string() + "," + fixed(loss.worst_loss_percent) + "\n";
}

// Long-format (cycle, retired, fitted) rows for plotting, decimated.
std::string plot_rows(const ExecutionTrace& trace, const std::string& series, const std::vector<Phase>& phases) {
    std::string out;
    const auto s = trace.samples();
    const std::size_t step = std::max<std::size_t>(1, s.size() / kPlotPoints);
    for (std::size_t i = 0; i < s.size(); i += step) {
        // Guaranteed retirement from the trace start, per phase function.
        const Phase* phase = &phases.front();
        for (const auto& p : phases) {
            if (s[i].retired >= p.start_instruction) {
                phase = &p;
            }
        }
        const Cycles phase_start = retirement_cycle(trace, phase->start_instruction);
        const Cycles elapsed = s[i].cycle - phase_start;
        Instructions fitted = phase->start_instruction;
        if (elapsed >= phase->function.t_unit) {
            fitted += evaluate(phase->function, elapsed);
        }
        out += series + "," + std::to_string(s[i].cycle) + "," + std::to_string(s[i].retired) + "," +
               std::to_string(fitted) + "\n";
    }
    return out;
}

int cmd_generate(const std::vector<std::string>& args, const std::string& model_path, const std::string& out_dir,
                 std::ostream& out) {
    const std::string text = read_text(model_path);
    const ExecutionTrace trace = generate_from_document(text);
    Run run("generate", args, out_dir);
    run.input(model_path, true);
    std::ostringstream csv;
    store_trace(csv, trace);
    run.write("trace.csv", csv.str());
    run.finish();
    out << "generated " << trace.size() << " samples, " << trace.total_retired() << " instructions over "
        << trace.duration() << " cycles\n";
    return 0;
}

int cmd_profile(const std::vector<std::string>& args, const std::string& trace_path, const std::string& t_units,
                const std::string& out_dir, std::ostream& out) {
    const ExecutionTrace trace = load_trace_file(trace_path);
    const auto units = parse_cycle_list(t_units);
    Run run("profile", args, out_dir);
    run.input(trace_path, true);
    std::string table = "t_unit,a,b,best_rate,worst_loss_percent\n";
    std::string plot = "t_unit,cycle,retired,fitted\n";
    for (const Cycles t_unit : units) {
        const WceiFunction f = fit_wcei(trace, t_unit);
        const LossReport loss = worst_case_loss(f.a, best_rate(trace, t_unit));
        table += wcei_row(t_unit, f, loss);
        const PhaseSegmentation seg = single_phase(trace.label(), f, trace.total_retired());
        plot += plot_rows(trace, std::to_string(t_unit), seg.phases);
        const std::string name = units.size() == 1 ? "wcei.json" : "wcei_" + std::to_string(t_unit) + ".json";
        run.write(name, to_document(seg));
        out << "t_unit " << t_unit << ": a = " << f.a.to_string() << " (" << fixed(f.a.to_double()) << "), b = " << f.b
            << ", best " << fixed(loss.best_rate.to_double()) << ", worst loss " << fixed(loss.worst_loss_percent, 2)
            << "%\n";
    }
    run.write("loss.csv", table);
    run.write("plot.csv", plot);
    run.finish();
    return 0;
}

int cmd_segment(const std::vector<std::string>& args, const std::string& trace_path, const std::string& t_unit_text,
                const std::string& threshold_text, const std::string& sweep_text, const std::string& out_dir,
                std::ostream& out) {
    const ExecutionTrace trace = load_trace_file(trace_path);
    const auto units = parse_cycle_list(t_unit_text);
    if (units.size() != 1) {
        throw std::invalid_argument("segment takes a single t_unit");
    }
    const Cycles t_unit = units.front();
    const double threshold = parse_threshold(threshold_text);
    Run run("segment", args, out_dir);
    run.input(trace_path, true);

    PhaseSegmentation seg = segment_phases(trace, t_unit, threshold);
    seg.label = trace.label();
    run.write("segmentation.json", to_document(seg));

    std::string table = "phase,start_instruction,end_instruction,a,b,best_rate,worst_loss_percent\n";
    const auto losses = phase_losses(trace, seg);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const auto& f = seg.phases[i].function;
        table += std::to_string(i + 1) + "," + std::to_string(losses[i].start_instruction) + "," +
                 std::to_string(losses[i].end_instruction) + "," + f.a.to_string() + "," + std::to_string(f.b) + "," +
                 losses[i].loss.best_rate.to_string() + "," + fixed(losses[i].loss.worst_loss_percent) + "\n";
        out << "phase " << i + 1 << " [" << losses[i].start_instruction << ", " << losses[i].end_instruction
            << "): a = " << fixed(f.a.to_double()) << ", loss " << fixed(losses[i].loss.worst_loss_percent, 2)
            << "%\n";
    }
    const WceiFunction single = fit_wcei(trace, t_unit);
    const LossReport single_loss = worst_case_loss(single.a, best_rate(trace, t_unit));
    table += "single,0," + std::to_string(trace.total_retired()) + "," + single.a.to_string() + "," +
             std::to_string(single.b) + "," + single_loss.best_rate.to_string() + "," +
             fixed(single_loss.worst_loss_percent) + "\n";
    out << "single function: a = " << fixed(single.a.to_double()) << ", loss "
        << fixed(single_loss.worst_loss_percent, 2) << "%\n";
    run.write("phase_loss.csv", table);
    run.write("plot.csv", "series,cycle,retired,fitted\n" + plot_rows(trace, "phases", seg.phases) +
                              plot_rows(trace, "single", single_phase("", single, trace.total_retired()).phases));

    if (!sweep_text.empty()) {
        std::string sweep = "threshold,phases\n";
        std::stringstream in(sweep_text);
        std::string item;
        while (std::getline(in, item, ',')) {
            const double th = parse_threshold(item);
            sweep += item + "," + std::to_string(segment_phases(trace, t_unit, th).phases.size()) + "\n";
        }
        run.write("sweep.csv", sweep);
    }
    run.finish();
    return 0;
}

std::string summary_csv(const Timeline& timeline) {
    std::string out = "task,jobs_released,jobs_completed,deadline_misses,max_response,min_response\n";
    for (const auto& t : timeline.tasks) {
        const bool any = t.jobs_completed > 0;
        out += t.id + "," + std::to_string(t.jobs_released) + "," + std::to_string(t.jobs_completed) + "," +
               std::to_string(t.deadline_misses) + "," + (any ? std::to_string(t.max_response) : std::string()) + "," +
               (any ? std::to_string(t.min_response) : std::string()) + "\n";
    }
    return out;
}

std::string totals_text(const Timeline& timeline) {
    std::ostringstream out;
    out << "horizon " << timeline.horizon << '\n'
        << "busy_cycles " << timeline.busy_cycles << '\n'
        << "idle_cycles " << timeline.idle_cycles << '\n'
        << "background_cycles " << timeline.background_cycles << '\n'
        << "budget_overruns " << timeline.budget_overruns << '\n'
        << "deadline_misses " << timeline.deadline_misses() << '\n';
    return out.str();
}

LoadedTaskSet load_validated(const std::string& path, Run& run, std::ostream& err, bool& ok) {
    LoadedTaskSet loaded = load_taskset_file(path);
    run.input(path, true);
    for (const auto& f : loaded.referenced_files) {
        run.input(f);
    }
    const ValidationReport report = validate_taskset(loaded.taskset, loaded.config);
    ok = report.ok();
    if (!ok) {
        err << report.describe();
        run.write("validation.txt", report.describe());
    }
    return loaded;
}

int cmd_simulate(const std::vector<std::string>& args, const std::string& path, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
    Run run("simulate", args, out_dir);
    bool ok = false;
    const LoadedTaskSet loaded = load_validated(path, run, err, ok);
    if (!ok) {
        run.finish();
        return kExitFailure;
    }
    const Timeline timeline = simulate(loaded.taskset, loaded.config);
    run.write("timeline.csv", timeline_csv(timeline));
    run.write("summary.csv", summary_csv(timeline));
    run.write("totals.txt", totals_text(timeline));
    run.finish();
    out << totals_text(timeline);
    return 0;
}

int cmd_verify(const std::vector<std::string>& args, const std::string& path, const std::string& seeds_text,
               bool baseline, double jitter_scale, const std::string& speedup_text, const std::string& out_dir,
               std::ostream& out, std::ostream& err) {
    PerturbationSpec perturbation;
    perturbation.seeds = parse_seed_list(seeds_text);
    perturbation.jitter_scale = jitter_scale;
    const auto comma = speedup_text.find(',');
    if (comma == std::string::npos) {
        perturbation.speedup_lo = perturbation.speedup_hi = Rational::parse(speedup_text).to_double();
    } else {
        perturbation.speedup_lo = Rational::parse(speedup_text.substr(0, comma)).to_double();
        perturbation.speedup_hi = Rational::parse(speedup_text.substr(comma + 1)).to_double();
    }
    perturbation.validate();

    Run run("verify", args, out_dir);
    run.seeds(perturbation.seeds);
    bool ok = false;
    const LoadedTaskSet loaded = load_validated(path, run, err, ok);
    if (!ok) {
        run.finish();
        return kExitFailure;
    }
    const auto report = verify_determinism(loaded.taskset, loaded.config, perturbation, SchedulerMode::deterministic);
    run.write("determinism.csv", determinism_csv(report));
    run.write("divergence.txt", divergence_text(report));
    out << divergence_text(report);
    if (baseline) {
        const auto base = verify_determinism(loaded.taskset, loaded.config, perturbation, SchedulerMode::timer_baseline);
        run.write("baseline_determinism.csv", determinism_csv(base));
        run.write("baseline_divergence.txt", divergence_text(base));
        out << divergence_text(base);
    }
    run.finish();
    return report.identical ? 0 : kExitFailure;
}

std::string race_csv(const std::vector<RaceRun>& runs) {
    std::vector<std::pair<std::uint64_t, SharedVarTrace>> rows;
    for (const auto& r : runs) {
        rows.emplace_back(r.seed, r.trace);
    }
    return shared_var_csv(rows);
}

std::string status_name(std::int64_t value) {
    return value == kStatusNormal ? "NORMAL" : value == kStatusLost ? "LOST" : std::to_string(value);
}

std::string race_verdict(const char* name, const std::vector<RaceRun>& runs) {
    std::set<std::int64_t> finals;
    std::set<std::vector<std::tuple<Cycles, std::string, int, std::string, std::int64_t>>> traces;
    std::size_t lost = 0;
    for (const auto& r : runs) {
        finals.insert(r.final_status);
        lost += r.final_status == kStatusLost ? 1 : 0;
        std::vector<std::tuple<Cycles, std::string, int, std::string, std::int64_t>> key;
        for (const auto& a : r.trace) {
            key.emplace_back(a.virtual_time, a.task, static_cast<int>(a.operation), a.variable, a.value);
        }
        traces.insert(std::move(key));
    }
    std::string out = std::string(name) + ": " + std::to_string(runs.size()) + " runs, " +
                      std::to_string(traces.size()) + " distinct traces, final status";
    for (const auto v : finals) {
        out += " " + status_name(v);
    }
    out += ", LOST in " + std::to_string(lost) + " runs\n";
    return out;
}

int cmd_demo_race(const std::vector<std::string>& args, const std::string& seeds_text, bool no_jitter,
                  const std::string& out_dir, std::ostream& out) {
    const auto seeds = parse_seed_list(seeds_text);
    if (seeds.size() < 2) {
        throw std::invalid_argument("demo-race needs at least two seeds");
    }
    Run run("demo-race", args, out_dir);
    run.seeds(seeds);
    const RaceDemoResult result = race_demo(seeds, !no_jitter);
    run.write("deterministic_trace.csv", race_csv(result.deterministic));
    run.write("baseline_trace.csv", race_csv(result.baseline));
    const std::string verdict =
        race_verdict("deterministic", result.deterministic) + race_verdict("baseline", result.baseline);
    run.write("verdict.txt", verdict);
    run.finish();
    out << verdict;
    return 0;
}

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const RunManifest manifest = load_manifest_file(manifest_path);
    const fs::path target = fs::absolute(out_dir.empty() ? fs::path(manifest.output_directory) : fs::path(out_dir));
    std::vector<std::string> args = manifest.arguments;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--out") {
            args[i + 1] = target.string();
        }
    }
    const fs::path previous = fs::current_path();
    fs::current_path(manifest.working_directory);
    bool inputs_changed = false;
    for (const auto& input : manifest.inputs) {
        if (!fs::exists(input.path) || sha256_file(input.path) != input.sha256) {
            err << "input changed since the manifest was written: " << input.path << '\n';
            inputs_changed = true;
        }
    }
    std::ostringstream sink;
    const int status = inputs_changed ? kExitFailure : run_cli(args, sink, err);
    fs::current_path(previous);
    if (inputs_changed) {
        return kExitFailure;
    }

    std::size_t mismatches = 0;
    for (const auto& output : manifest.outputs) {
        const fs::path produced = target / output.path;
        if (!fs::exists(produced) || sha256_file(produced) != output.sha256) {
            out << "MISMATCH " << output.path << '\n';
            ++mismatches;
        }
    }
    if (mismatches == 0) {
        out << "reproduced " << manifest.outputs.size() << " files byte-identically in " << target.string() << '\n';
    }
    return mismatches == 0 ? status : kExitFailure;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic real-time scheduling toolkit", "drts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::string input;
    std::string out_dir = "out";
    std::string t_unit = std::to_string(kDefaultTUnit);
    std::string threshold = "0.2";
    std::string sweep;
    std::string seeds = "1-20";
    std::string speedup = "1";
    double jitter_scale = 1.0;
    bool baseline = false;
    bool no_jitter = false;

    auto* generate = app.add_subcommand("generate", "Generate a synthetic trace from a model document");
    generate->add_option("model", input, "Model document (JSON)")->required();

    auto* profile = app.add_subcommand("profile", "Fit a WCEI function and report its worst-case loss");
    profile->add_option("trace", input, "Trace file (cycle,retired)")->required();
    profile->add_option("--t-unit", t_unit, "Unit time in cycles; a comma list profiles each");

    auto* segment = app.add_subcommand("segment", "Split a trace into phases with one WCEI function each");
    segment->add_option("trace", input, "Trace file (cycle,retired)")->required();
    segment->add_option("--t-unit", t_unit, "Unit time in cycles");
    segment->add_option("--threshold", threshold, "Relative rate change opening a new phase");
    segment->add_option("--sweep", sweep, "Comma list of thresholds for a phase-count sweep");

    auto* sim = app.add_subcommand("simulate", "Run the deterministic scheduler over a task set");
    sim->add_option("taskset", input, "Task-set document (JSON)")->required();

    auto* verify = app.add_subcommand("verify", "Check schedule determinism across perturbation seeds");
    verify->add_option("taskset", input, "Task-set document (JSON)")->required();
    verify->add_option("--seeds", seeds, "Seeds, e.g. 1,2,3 or 1-20");
    verify->add_flag("--baseline", baseline, "Also run the timer-driven baseline");
    verify->add_option("--jitter-scale", jitter_scale, "Multiplier on every model's jitter amplitude");
    verify->add_option("--speedup", speedup, "Speedup range lo,hi within (0, 1]");

    auto* race = app.add_subcommand("demo-race", "Replay the status-variable race under both schedulers");
    race->add_option("--seeds", seeds, "Seeds, e.g. 1-20");
    race->add_flag("--no-jitter", no_jitter, "Run every seed on the nominal models");

    auto* rerun = app.add_subcommand("rerun", "Re-execute a manifest and compare output digests");
    rerun->add_option("manifest", input, "manifest.json of an earlier run")->required();

    for (auto* sub : {generate, profile, segment, sim, verify, race}) {
        sub->add_option("--out", out_dir, "Output directory");
    }
    std::string rerun_out;
    rerun->add_option("--out", rerun_out, "Output directory (default: the original one)");

    std::vector<const char*> argv{"drts"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*generate) {
            return cmd_generate(args, input, out_dir, out);
        }
        if (*profile) {
            return cmd_profile(args, input, t_unit, out_dir, out);
        }
        if (*segment) {
            return cmd_segment(args, input, t_unit, threshold, sweep, out_dir, out);
        }
        if (*sim) {
            return cmd_simulate(args, input, out_dir, out, err);
        }
        if (*verify) {
            return cmd_verify(args, input, seeds, baseline, jitter_scale, speedup, out_dir, out, err);
        }
        if (*race) {
            return cmd_demo_race(args, seeds, no_jitter, out_dir, out);
        }
        return cmd_rerun(input, rerun_out, out, err);
    } catch (const ValidationError& e) {
        err << e.what();
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace drts
