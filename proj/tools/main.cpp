// ionmap: physical mapping of trapped-ion circuits onto a tiled well fabric.
//
//   parse     QASM -> dependency graph dump (DOT)
//   schedule  QASM -> level table (force-directed, cap sweep)
//   map       full flow -> command stream + latency report
//   validate  replay a command stream against the fabric rules
//   size      explore block sizes for a directory of operation circuits
//   plotdata  CSV sweeps over the cap factor or the block size

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ionmap/emulator.hpp"
#include "ionmap/flow.hpp"
#include "ionmap/sizer.hpp"

using nlohmann::json;
using namespace ionmap;

namespace {

struct CommonOpts {
    int ulb_n = 1;
    int well_capacity = 5;
    std::int64_t move_delay = 10;
    std::int64_t one_qubit_delay = 50;
    std::int64_t two_qubit_delay = 100;
    std::string layout_file;
    std::string format = "text";

    FabricConfig fabric_config() const {
        FabricConfig cfg;
        cfg.ulb_n = ulb_n;
        cfg.well_capacity = well_capacity;
        cfg.move_delay_us = move_delay;
        cfg.one_qubit_delay_us = one_qubit_delay;
        cfg.two_qubit_delay_us = two_qubit_delay;
        return cfg;
    }
    TemplateLayout layout() const {
        if (layout_file.empty()) return TemplateLayout::builtin();
        std::ifstream in(layout_file);
        if (!in) throw Error("MalformedLayout", "cannot open " + layout_file);
        std::stringstream buf;
        buf << in.rdbuf();
        return TemplateLayout::from_text(buf.str());
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_ulb = true) {
    if (with_ulb)
        cmd->add_option("--ulb-n", opts.ulb_n, "logic block is n x n templates")
            ->check(CLI::PositiveNumber);
    cmd->add_option("--well-capacity", opts.well_capacity, "qubits per well");
    cmd->add_option("--move-delay", opts.move_delay, "hop latency (us)");
    cmd->add_option("--one-qubit-delay", opts.one_qubit_delay,
                    "one-qubit instruction latency (us)");
    cmd->add_option("--two-qubit-delay", opts.two_qubit_delay,
                    "two-qubit instruction latency (us)");
    cmd->add_option("--layout", opts.layout_file,
                    "template layout file ('.', B, C, I cell codes)");
    cmd->add_option("--format", opts.format, "report format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->set_config("--config", "", "key=value configuration file");
}

Program load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_qasm(buf.str());
}

std::vector<double> parse_alpha_set(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    if (out.empty()) throw Error("InvalidConfig", "empty alpha set");
    return out;
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    if (out.empty()) throw Error("InvalidConfig", "empty size list");
    return out;
}

WorkloadModel load_workload(const std::string& spec, const TemplateLayout& layout,
                            const FabricConfig& config) {
    if (spec == "toffoli")
        return toffoli_workload(default_l_r1_us(layout, config));
    WorkloadModel w;
    w.l_r1_us = default_l_r1_us(layout, config);
    std::ifstream in(spec);
    if (!in) throw Error("IoError", "cannot open workload " + spec);
    std::string line;
    while (std::getline(in, line)) {
        if (size_t hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        double value = std::stod(line.substr(eq + 1));
        if (key == "d_r_avg") w.d_r_avg = value;
        else if (key == "l_r1") w.l_r1_us = value;
        else if (key.rfind("w_", 0) == 0) w.weights[key.substr(2)] = value;
        else throw Error("InvalidConfig", "unknown workload key '" + key + "'");
    }
    return w;
}

json candidate_json(const CandidateOutcome& c) {
    return {{"alpha", c.alpha},
            {"cap", c.n_m},
            {"levels", c.schedule.num_levels},
            {"latency_us", c.latency_us},
            {"static_lb_us", c.static_lower_bound_us},
            {"ok", c.ok},
            {"error", c.error}};
}

int run_map(const std::string& input, const std::string& output,
            const std::string& placement_dump, const CommonOpts& opts,
            const FlowConfig& flow_cfg) {
    Program prog = load_program(input);
    Fabric fabric(opts.layout(), opts.fabric_config());
    FlowResult result = map_circuit(prog, fabric, flow_cfg);

    std::string out_path = output;
    if (out_path.empty())
        out_path = std::filesystem::path(input).stem().string() + ".cmds";
    std::ofstream out(out_path);
    write_stream(out, result.route.stream, fabric);
    if (!placement_dump.empty()) {
        std::ofstream pd(placement_dump);
        dump_placement(pd, result.graph, result.placement, fabric, true);
    }

    const CandidateOutcome& chosen = result.candidates[result.chosen];
    if (opts.format == "json") {
        json j{{"input", input},
               {"stream", out_path},
               {"total_latency_us", result.report.total_latency_us},
               {"validated", result.report.ok},
               {"levels", chosen.schedule.num_levels},
               {"alpha", chosen.alpha},
               {"cap", chosen.n_m},
               {"deferrals", result.placement.defer_count},
               {"candidates", json::array()}};
        for (const CandidateOutcome& c : result.candidates)
            j["candidates"].push_back(candidate_json(c));
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "total_latency_us=" << result.report.total_latency_us
                  << " validated=" << (result.report.ok ? "yes" : "no")
                  << " levels=" << chosen.schedule.num_levels
                  << " alpha=" << chosen.alpha << " cap=" << chosen.n_m
                  << " deferrals=" << result.placement.defer_count << '\n'
                  << "stream written to " << out_path << '\n';
    }
    return result.report.ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"physical mapper for trapped-ion quantum circuits"};
    app.require_subcommand(1);

    auto* cmd_parse = app.add_subcommand("parse", "parse QASM and dump the QIDG");
    CommonOpts parse_opts;
    std::string parse_input, parse_output;
    cmd_parse->add_option("input", parse_input, "QASM file")->required();
    cmd_parse->add_option("-o,--output", parse_output, "DOT output (default stdout)");
    add_common(cmd_parse, parse_opts, false);

    auto* cmd_sched = app.add_subcommand("schedule", "levelize a circuit");
    CommonOpts sched_opts;
    std::string sched_input, sched_alpha;
    int sched_nmax = 0;
    bool sched_oracle = false, sched_check = false;
    cmd_sched->add_option("input", sched_input, "QASM file")->required();
    cmd_sched->add_option("--nmax", sched_nmax,
                          "concurrency bound (default: #interaction wells)");
    cmd_sched->add_option("--alpha-set", sched_alpha,
                          "cap multipliers, e.g. 1.0,0.8,0.6");
    cmd_sched->add_flag("--oracle", sched_oracle,
                        "also run the exhaustive optimum (<=16 nodes)");
    cmd_sched->add_flag("--check", sched_check,
                        "validate the schedule against the constraints");
    add_common(cmd_sched, sched_opts);

    auto* cmd_map = app.add_subcommand("map", "full schedule/place/route flow");
    CommonOpts map_opts;
    std::string map_input, map_output, map_alpha, map_placement;
    std::uint64_t map_seed = 0;
    int map_nmax = 0, map_jobs = 1;
    bool map_fast = false, map_no_defer = false;
    cmd_map->add_option("input", map_input, "QASM file")->required();
    cmd_map->add_option("-o,--output", map_output, "command stream file");
    cmd_map->add_option("--dump-placement", map_placement,
                        "write the per-instruction placement table here");
    cmd_map->add_option("--seed", map_seed, "placement jitter seed");
    cmd_map->add_option("--nmax", map_nmax, "concurrency bound");
    cmd_map->add_option("--alpha-set", map_alpha, "cap multipliers");
    cmd_map->add_option("--jobs", map_jobs, "worker threads for the cap sweep");
    cmd_map->add_flag("--fast", map_fast, "route only the default cap candidate");
    cmd_map->add_flag("--no-defer", map_no_defer,
                      "fixed-level placement (no deferrals)");
    add_common(cmd_map, map_opts);

    auto* cmd_val = app.add_subcommand("validate", "replay a command stream");
    CommonOpts val_opts;
    std::string val_stream, val_circuit;
    cmd_val->add_option("stream", val_stream, "command stream file")->required();
    cmd_val->add_option("circuit", val_circuit, "QASM file the stream realizes")
        ->required();
    add_common(cmd_val, val_opts);

    auto* cmd_size = app.add_subcommand("size", "pick the best block size");
    CommonOpts size_opts;
    std::string size_dir, size_workload = "toffoli", size_sizes = "1,2,3",
                          size_output;
    int size_jobs = 1;
    std::uint64_t size_seed = 0;
    cmd_size->add_option("opsdir", size_dir, "directory of per-operation QASM files")
        ->required();
    cmd_size->add_option("--workload", size_workload,
                         "workload file (w_<OP>=, d_r_avg=, l_r1=) or 'toffoli'");
    cmd_size->add_option("--sizes", size_sizes, "candidate sizes, e.g. 1,2,3");
    cmd_size->add_option("--jobs", size_jobs, "parallel flow runs");
    cmd_size->add_option("--seed", size_seed, "placement jitter seed");
    cmd_size->add_option("-o,--output", size_output, "write the report here");
    add_common(cmd_size, size_opts, false);

    auto* cmd_plot = app.add_subcommand("plotdata", "CSV sweep emission");
    CommonOpts plot_opts;
    std::string plot_input, plot_sweep = "alpha", plot_sizes = "1,2,3", plot_output;
    std::uint64_t plot_seed = 0;
    cmd_plot->add_option("input", plot_input, "QASM file")->required();
    cmd_plot->add_option("--sweep", plot_sweep, "alpha | size")
        ->check(CLI::IsMember({"alpha", "size"}));
    cmd_plot->add_option("--sizes", plot_sizes, "sizes for --sweep size");
    cmd_plot->add_option("--seed", plot_seed, "placement jitter seed");
    cmd_plot->add_option("-o,--output", plot_output, "CSV file (default stdout)");
    add_common(cmd_plot, plot_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_parse) {
            Program prog = load_program(parse_input);
            Qidg g = Qidg::build(prog, parse_opts.fabric_config());
            g.compute_sibling_sets();
            if (parse_output.empty()) {
                g.dump_dot(std::cout);
            } else {
                std::ofstream out(parse_output);
                g.dump_dot(out);
            }
            return 0;
        }

        if (*cmd_sched) {
            Program prog = load_program(sched_input);
            Fabric fabric(sched_opts.layout(), sched_opts.fabric_config());
            Qidg raw = Qidg::build(prog, fabric.config());
            raw.compute_sibling_sets();
            Qidg g = raw;
            preprocess(g);
            SchedulerConfig cfg;
            cfg.n_max = sched_nmax > 0
                            ? sched_nmax
                            : static_cast<int>(fabric.interaction_wells().size());
            if (!sched_alpha.empty()) cfg.alpha_set = parse_alpha_set(sched_alpha);
            auto candidates = schedule_enumerated(g, cfg);
            int pick = default_candidate(candidates);
            const Schedule& s = candidates[pick].schedule;
            dump_schedule(std::cout, g, s);
            if (sched_oracle)
                std::cout << "# oracle_levels=" << exact_oracle(raw, cfg.n_max)
                          << '\n';
            if (sched_check) {
                auto violations = validate_schedule(raw, s, candidates[pick].n_m);
                for (const std::string& v : violations)
                    std::cout << "# violation: " << v << '\n';
                std::cout << "# check=" << (violations.empty() ? "ok" : "FAILED")
                          << '\n';
                if (!violations.empty()) return 2;
            }
            return 0;
        }

        if (*cmd_map) {
            FlowConfig cfg;
            cfg.seed = map_seed;
            cfg.fast = map_fast;
            cfg.jobs = map_jobs;
            cfg.scheduler.n_max = map_nmax;
            if (!map_alpha.empty())
                cfg.scheduler.alpha_set = parse_alpha_set(map_alpha);
            cfg.placer.defer_enabled = !map_no_defer;
            return run_map(map_input, map_output, map_placement, map_opts, cfg);
        }

        if (*cmd_val) {
            Program prog = load_program(val_circuit);
            Fabric fabric(val_opts.layout(), val_opts.fabric_config());
            Qidg g = Qidg::build(prog, fabric.config());
            g.compute_sibling_sets();
            preprocess(g);
            std::ifstream in(val_stream);
            if (!in) throw Error("IoError", "cannot open " + val_stream);
            CommandStream stream = read_stream(in, fabric);
            ValidationReport report = validate_stream(stream, fabric, g);
            if (val_opts.format == "json") {
                json j{{"ok", report.ok},
                       {"total_latency_us", report.total_latency_us},
                       {"violations", json::array()}};
                for (const Violation& v : report.violations)
                    j["violations"].push_back({{"time_us", v.time_us},
                                               {"rule", v.rule},
                                               {"detail", v.detail},
                                               {"command", v.command_index}});
                std::cout << j.dump(2) << '\n';
            } else {
                write_report(std::cout, report);
            }
            return report.ok ? 0 : 2;
        }

        if (*cmd_size) {
            TemplateLayout layout = size_opts.layout();
            FabricConfig base = size_opts.fabric_config();
            std::vector<int> sizes = parse_sizes(size_sizes);
            WorkloadModel workload = load_workload(size_workload, layout, base);

            std::map<std::string, Program> circuits;
            for (const auto& entry : std::filesystem::directory_iterator(size_dir)) {
                if (entry.path().extension() != ".qasm") continue;
                circuits[entry.path().stem().string()] =
                    load_program(entry.path().string());
            }
            if (circuits.empty())
                throw Error("IoError", "no .qasm files in " + size_dir);

            FlowConfig flow_cfg;
            flow_cfg.seed = size_seed;
            OpLatencyTable table =
                profile_sizes(circuits, sizes, layout, base, flow_cfg, size_jobs);
            SizeChoice choice = best_size(table, workload);

            std::ostringstream body;
            if (size_opts.format == "csv") {
                body << "n";
                for (const auto& [op, row] : table.rows) body << ',' << op;
                body << ",objective\n";
                for (size_t s = 0; s < table.sizes.size(); ++s) {
                    body << table.sizes[s];
                    for (const auto& [op, row] : table.rows) {
                        body << ',';
                        if (row[s].feasible) body << row[s].latency_us;
                        else body << "infeasible";
                    }
                    if (choice.objectives[s].feasible)
                        body << ',' << choice.objectives[s].objective;
                    else
                        body << ",infeasible";
                    body << '\n';
                }
                body << "# n_best=" << choice.n_best << '\n';
            } else if (size_opts.format == "json") {
                json j{{"n_best", choice.n_best}, {"sizes", json::array()}};
                for (size_t s = 0; s < table.sizes.size(); ++s) {
                    json row{{"n", table.sizes[s]},
                             {"feasible", choice.objectives[s].feasible}};
                    if (choice.objectives[s].feasible)
                        row["objective"] = choice.objectives[s].objective;
                    for (const auto& [op, cells] : table.rows)
                        row[op] = cells[s].feasible ? json(cells[s].latency_us)
                                                    : json(nullptr);
                    j["sizes"].push_back(row);
                }
                body << j.dump(2) << '\n';
            } else {
                body << "n_best=" << choice.n_best << '\n';
                for (size_t s = 0; s < table.sizes.size(); ++s) {
                    body << "n=" << table.sizes[s];
                    for (const auto& [op, row] : table.rows) {
                        body << "  " << op << '=';
                        if (row[s].feasible) body << row[s].latency_us << "us";
                        else body << "infeasible";
                    }
                    if (choice.objectives[s].feasible)
                        body << "  objective=" << choice.objectives[s].objective;
                    body << '\n';
                }
            }
            if (size_output.empty()) {
                std::cout << body.str();
            } else {
                std::ofstream out(size_output);
                out << body.str();
                std::cout << "report written to " << size_output << '\n';
            }
            return 0;
        }

        if (*cmd_plot) {
            std::ostringstream csv;
            Program prog = load_program(plot_input);
            if (plot_sweep == "alpha") {
                Fabric fabric(plot_opts.layout(), plot_opts.fabric_config());
                FlowConfig cfg;
                cfg.seed = plot_seed;
                FlowResult result = map_circuit(prog, fabric, cfg);
                csv << "alpha,cap,levels,static_lb_us,latency_us,ok\n";
                for (const CandidateOutcome& c : result.candidates)
                    csv << c.alpha << ',' << c.n_m << ',' << c.schedule.num_levels
                        << ',' << c.static_lower_bound_us << ',' << c.latency_us
                        << ',' << (c.ok ? 1 : 0) << '\n';
            } else {
                csv << "n,latency_us,feasible\n";
                for (int n : parse_sizes(plot_sizes)) {
                    FabricConfig cfg = plot_opts.fabric_config();
                    cfg.ulb_n = n;
                    Fabric fabric(plot_opts.layout(), cfg);
                    FlowConfig flow_cfg;
                    flow_cfg.seed = plot_seed;
                    try {
                        FlowResult result = map_circuit(prog, fabric, flow_cfg);
                        csv << n << ',' << result.report.total_latency_us << ','
                            << (result.report.ok ? 1 : 0) << '\n';
                    } catch (const Error& e) {
                        if (e.code() != "NoCreationWell") throw;
                        csv << n << ",,0\n";
                    }
                }
            }
            if (plot_output.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(plot_output);
                out << csv.str();
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
