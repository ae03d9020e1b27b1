#include "ionmap/flow.hpp"

#include <atomic>
#include <thread>

namespace ionmap {

FlowResult map_circuit(const Program& program, const Fabric& fabric,
                       const FlowConfig& config) {
    FlowResult result;
    result.raw_graph = Qidg::build(program, fabric.config());
    result.raw_graph.compute_sibling_sets();

    result.graph = result.raw_graph;
    preprocess(result.graph);

    SchedulerConfig sched_cfg = config.scheduler;
    if (sched_cfg.n_max <= 0)
        sched_cfg.n_max = static_cast<int>(fabric.interaction_wells().size());
    sched_cfg.n_max = std::min(
        sched_cfg.n_max, static_cast<int>(fabric.interaction_wells().size()));
    if (sched_cfg.n_max < 1)
        throw Error("InvalidConfig", "fabric has no interaction wells");

    std::vector<ScheduleCandidate> candidates =
        schedule_enumerated(result.graph, sched_cfg);
    if (config.fast && !candidates.empty()) {
        int pick = default_candidate(candidates);
        candidates = {candidates[pick]};
    }

    result.candidates.resize(candidates.size());
    struct Ran {
        Placement placement;
        RouteResult route;
        ValidationReport report;
        Qidg graph;
        bool valid = false;
    };
    std::vector<Ran> runs(candidates.size());

    auto run_candidate = [&](size_t k) {
        const ScheduleCandidate& cand = candidates[k];
        CandidateOutcome& outcome = result.candidates[k];
        outcome.alpha = cand.alpha;
        outcome.n_m = cand.n_m;
        outcome.schedule = cand.schedule;
        try {
            Ran& r = runs[k];
            r.placement =
                place_instructions(result.graph, cand.schedule, fabric,
                                   config.placer, config.seed);
            // criticality for the router comes from the realized horizon
            r.graph = result.graph;
            r.graph.levelize(r.placement.schedule.num_levels);
            r.route = dynamic_route(r.graph, r.placement, fabric);
            r.report = validate_stream(r.route.stream, fabric, r.graph);
            r.valid = true;
            outcome.schedule = r.placement.schedule;
            outcome.latency_us = r.report.total_latency_us;
            outcome.static_lower_bound_us =
                static_lower_bound_us(r.graph, r.placement, fabric);
            outcome.ok = r.report.ok;
            if (!r.report.ok) outcome.error = "ValidationFailed";
        } catch (const Error& e) {
            outcome.ok = false;
            outcome.error = e.code();
        }
    };

    int jobs = std::max(1, config.jobs);
    if (jobs == 1 || candidates.size() <= 1) {
        for (size_t k = 0; k < candidates.size(); ++k) run_candidate(k);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        int workers = std::min<int>(jobs, static_cast<int>(candidates.size()));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t k = next.fetch_add(1); k < candidates.size();
                     k = next.fetch_add(1))
                    run_candidate(k);
            });
        for (std::thread& th : pool) th.join();
    }

    // Final pick happens only after routing: best validated latency, ties to
    // the earlier (larger alpha) candidate.
    for (size_t k = 0; k < result.candidates.size(); ++k) {
        const CandidateOutcome& c = result.candidates[k];
        if (!c.ok) continue;
        if (result.chosen < 0 ||
            c.latency_us < result.candidates[result.chosen].latency_us)
            result.chosen = static_cast<int>(k);
    }
    if (result.chosen < 0) {
        for (const CandidateOutcome& c : result.candidates)
            if (!c.error.empty()) throw Error(c.error, "no candidate mapped");
        // empty circuit: synthesize one empty outcome
        if (result.candidates.empty()) {
            CandidateOutcome empty;
            empty.ok = true;
            result.candidates.push_back(empty);
        }
        result.chosen = 0;
        runs.resize(result.candidates.size());
        runs[0].graph = result.graph;
        runs[0].report.ok = true;
    }

    Ran& win = runs[result.chosen];
    result.placement = std::move(win.placement);
    result.route = std::move(win.route);
    result.report = std::move(win.report);
    result.graph = std::move(win.graph);
    return result;
}

} // namespace ionmap
