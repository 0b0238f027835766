// Command-line front end for batch evaluation, single-pair judging, reward
// export, prompt rendering and the editor HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include "cowrite/harness.hpp"
#include "cowrite/service.hpp"

using namespace cowrite;

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Layer parse_layer(const std::string& s) {
    if (s == "L1") return Layer::L1_interaction;
    if (s == "L2") return Layer::L2_surface;
    if (s == "L3") return Layer::L3_semantic;
    throw ConfigError("checklist depth must be L1, L2 or L3");
}

// Settings shared by every subcommand. The config file has optional sections
// "backend", "judge", "completion" and "service".
struct Common {
    std::string config_path;
    std::string mock_path;
    std::string cache_dir;
    std::string model;
    std::string deepest;
    bool fast_path = false;

    nlohmann::json config = nlohmann::json::object();
    std::unique_ptr<Gateway> gateway;

    void add_to(CLI::App& app) {
        app.add_option("--config", config_path, "JSON config file");
        app.add_option("--mock", mock_path, "scripted offline backend (JSON scripts) instead of HTTP");
        app.add_option("--cache-dir", cache_dir, "response cache directory");
        app.add_option("--model", model, "model for every call");
        app.add_option("--deepest", deepest, "deepest checklist layer: L1, L2 or L3");
        app.add_flag("--fast-path", fast_path, "decide mechanically checkable rules without a model call");
    }

    nlohmann::json section(const char* name) const { return config.value(name, nlohmann::json::object()); }

    Gateway& gw() {
        if (gateway) return *gateway;
        if (!config_path.empty()) config = read_json_file(config_path);
        BackendConfig b = backend_config_from_json(section("backend"));
        if (!cache_dir.empty()) b.cache_dir = cache_dir;
        if (!model.empty()) b.model = model;
        std::shared_ptr<Backend> backend;
        if (!mock_path.empty()) {
            backend = mock_from_json(read_json_file(mock_path));
            b.backoff_base_s = 0;
        } else {
            backend = std::make_shared<HttpBackend>(b);
        }
        gateway = std::make_unique<Gateway>(b, backend);
        return *gateway;
    }

    ChecklistConfig checklist() {
        gw();
        const auto j = section("judge");
        ChecklistConfig c;
        c.judge_model = j.value("model", model);
        c.max_parse_retries = j.value("max_parse_retries", c.max_parse_retries);
        c.deepest = parse_layer(deepest.empty() ? j.value("deepest", std::string("L3")) : deepest);
        c.fast_path.enabled = fast_path || j.value("fast_path", false);
        return c;
    }

    BaselineConfig baseline() {
        gw();
        const auto j = section("judge");
        BaselineConfig c;
        c.judge_model = j.value("model", model);
        c.style_threshold = j.value("style_threshold", c.style_threshold);
        c.semantic_threshold = j.value("semantic_threshold", c.semantic_threshold);
        return c;
    }

    KedConfig ked() {
        gw();
        KedConfig c;
        c.model = section("judge").value("model", model);
        return c;
    }
};

EvalQuery pair_query(const std::string& context, const std::string& reference) {
    EvalQuery q;
    q.id = "cli";
    q.domain_tag = "D1";
    q.context = context;
    q.reference = reference;
    return q;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

void write_records_file(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_records(out, records);
}

struct ReportOptions {
    std::string gold, target, column = "score", report, table;
};

void add_report_options(CLI::App& app, ReportOptions& o) {
    app.add_option("--gold", o.gold, "gold labels, one {query_id, accept} per line");
    app.add_option("--target", o.target, "per-query target scores for correlation");
    app.add_option("--target-column", o.column, "field holding the target score");
    app.add_option("--report", o.report, "write the JSON report here");
    app.add_option("--table", o.table, "write the text tables here");
}

void emit_report(MetricReport rep, const ReportOptions& o) {
    const auto text = render_report_text(rep);
    if (!o.report.empty()) write_text(o.report, to_json(rep).dump(2) + "\n");
    if (!o.table.empty()) write_text(o.table, text);
    std::cout << text;
}

AggregateInputs report_inputs(const ReportOptions& o) {
    AggregateInputs in;
    if (!o.gold.empty()) in.gold = load_gold(o.gold);
    if (!o.target.empty()) in.target = load_target(o.target, o.column);
    return in;
}

std::string render_named(const std::string& kind, Layer deepest, const std::optional<std::string>& context,
                         const std::optional<std::string>& reference, const std::optional<std::string>& completion) {
    const bool fill = context || reference || completion;
    const std::string c = context.value_or(""), r = reference.value_or(""), s = completion.value_or("");
    if (kind == "har") {
        if (!fill) return har_template(deepest);
        ChecklistConfig cfg;
        cfg.deepest = deepest;
        return render_har_prompt(pair_query(c, r), s, cfg);
    }
    if (kind == "ked") return fill ? render_ked_prompt(r, s) : std::string(prompts::ked);
    if (kind == "logic" || kind == "style" || kind == "semantic" || kind == "holistic") {
        const auto k = parse_judge_kind(kind);
        return fill ? render_baseline_prompt(k, r, s) : std::string(baseline_template(k));
    }
    if (kind == "completion_l1") return std::string(prompts::completion_l1);
    if (kind == "completion_l2") return std::string(prompts::completion_l2);
    if (kind == "coherence_train")
        return fill ? fill_template(prompts::coherence_train, {{"{context}", c}, {"{predicted}", s}})
                    : std::string(prompts::coherence_train);
    if (kind == "semantic_train")
        return fill ? fill_template(prompts::semantic_train, {{"{reference}", r}, {"{predicted}", s}})
                    : std::string(prompts::semantic_train);
    throw ConfigError("unknown prompt kind " + kind);
}

httplib::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-writing evaluation and session service"};
    app.require_subcommand(1);
    Common common;

    // eval
    auto* eval = app.add_subcommand("eval", "run one paradigm over a query corpus and report");
    std::string queries_path, records_out, paradigm = "L1", baselines_csv;
    bool skip_bad = false, no_ked = false;
    double max_failure_rate = 0.5;
    ReportOptions eval_report;
    common.add_to(*eval);
    eval->add_option("--queries", queries_path, "query corpus (JSONL)")->required();
    eval->add_option("--paradigm", paradigm, "L1 or L2");
    eval->add_option("--records", records_out, "write run records (JSONL) here");
    eval->add_option("--baselines", baselines_csv, "comma-separated baseline judges: logic,style,semantic,holistic");
    eval->add_flag("--skip-bad", skip_bad, "drop invalid query rows instead of aborting");
    eval->add_flag("--no-ked", no_ked, "skip the editing-cost call");
    eval->add_option("--max-failure-rate", max_failure_rate, "abort when more than this share of queries fail");
    add_report_options(*eval, eval_report);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run L1 and L2 over a corpus and report the paired L2 - L1 deltas");
    std::string sim_out = ".";
    std::uint64_t seed = 42;
    std::size_t resamples = 1000;
    common.add_to(*sim);
    sim->add_option("--queries", queries_path, "query corpus (JSONL)")->required();
    sim->add_option("--out-dir", sim_out, "directory for records and reports");
    sim->add_option("--seed", seed, "bootstrap seed");
    sim->add_option("--resamples", resamples, "bootstrap resamples");
    sim->add_flag("--skip-bad", skip_bad, "drop invalid query rows instead of aborting");

    // ked / judge
    std::string context, reference, completion, kind = "har";
    auto* ked = app.add_subcommand("ked", "editing cost for one completion against its reference");
    common.add_to(*ked);
    ked->add_option("--reference", reference)->required();
    ked->add_option("--completion", completion)->required();

    auto* judge = app.add_subcommand("judge", "one verdict from any judge");
    common.add_to(*judge);
    judge->add_option("--kind", kind, "har, logic, style, semantic or holistic");
    judge->add_option("--context", context);
    judge->add_option("--reference", reference)->required();
    judge->add_option("--completion", completion)->required();

    // correlate
    auto* corr = app.add_subcommand("correlate", "aggregate existing records against gold labels and targets");
    std::string records_in, compare_in;
    ReportOptions corr_report;
    corr->add_option("--queries", queries_path)->required();
    corr->add_option("--records", records_in)->required();
    corr->add_option("--compare", compare_in, "second records file; adds paired bootstrap deltas");
    corr->add_option("--seed", seed, "bootstrap seed");
    corr->add_option("--resamples", resamples, "bootstrap resamples");
    add_report_options(*corr, corr_report);

    // rewards
    auto* rewards = app.add_subcommand("rewards", "binary rewards from scored records");
    std::string rewards_out;
    rewards->add_option("--records", records_in)->required();
    rewards->add_option("--out", rewards_out)->required();

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP API for the editor");
    std::string host = "127.0.0.1", data_dir;
    int port = 8080;
    common.add_to(*serve);
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--data-dir", data_dir, "session log directory");

    // render-prompt
    auto* render = app.add_subcommand("render-prompt", "print a prompt template, filled when values are given");
    std::optional<std::string> rc, rr, rs;
    std::string render_kind, render_deepest = "L3";
    render->add_option("--kind", render_kind,
                       "har, ked, logic, style, semantic, holistic, completion_l1, completion_l2, coherence_train, "
                       "semantic_train")
        ->required();
    render->add_option("--deepest", render_deepest, "checklist depth for har");
    render->add_option("--context", rc);
    render->add_option("--reference", rr);
    render->add_option("--completion", rs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*eval || *sim) {
            const auto load = load_queries(queries_path, skip_bad);
            for (const auto& i : load.rejected) std::cerr << "skipped line " << i.line << ": " << i.message << "\n";
            for (const auto& w : load.warnings) std::cerr << "warning: " << w << "\n";
            auto& gw = common.gw();
            BatchConfig cfg;
            cfg.judge = common.checklist();
            cfg.ked = common.ked();
            cfg.baseline = common.baseline();
            cfg.run_ked = !no_ked;
            cfg.max_failure_rate = max_failure_rate;
            const auto comp = common.section("completion");
            cfg.completion_model = comp.value("model", common.model);
            if (comp.contains("temperature")) cfg.completion_temperature = comp.at("temperature").get<double>();
            if (*eval) {
                std::stringstream ss(baselines_csv);
                for (std::string k; std::getline(ss, k, ',');)
                    if (!k.empty()) cfg.baselines.push_back(parse_judge_kind(k));
                cfg.paradigm = parse_paradigm(paradigm);
                const auto records = run_batch(load.queries, cfg, gw);
                if (!records_out.empty()) write_records_file(records_out, records);
                emit_report(aggregate(records, load.queries, report_inputs(eval_report)), eval_report);
            } else {
                std::filesystem::create_directories(sim_out);
                cfg.paradigm = Paradigm::L1;
                const auto l1 = run_batch(load.queries, cfg, gw);
                cfg.paradigm = Paradigm::L2;
                const auto l2 = run_batch(load.queries, cfg, gw);
                const std::filesystem::path dir(sim_out);
                write_records_file((dir / "records_L1.jsonl").string(), l1);
                write_records_file((dir / "records_L2.jsonl").string(), l2);
                ReportOptions o;
                o.report = (dir / "report_L1.json").string();
                emit_report(aggregate(l1, load.queries), o);
                o.report = (dir / "report_L2.json").string();
                auto rep = aggregate(l2, load.queries);
                rep.deltas = compare_runs(l1, l2, resamples, 0.95, seed);
                emit_report(rep, o);
            }
        } else if (*ked) {
            auto r = evaluate_ked(pair_query("", reference), completion, common.gw(), common.ked());
            nlohmann::json out = {{"cost", r.cost ? nlohmann::json(*r.cost) : nlohmann::json(nullptr)},
                                  {"parse_error", r.parse_error},
                                  {"attempts", r.attempts},
                                  {"plan", to_json(r.plan)}};
            std::cout << out.dump(2) << "\n";
            return r.parse_error ? 3 : 0;
        } else if (*judge) {
            const auto k = parse_judge_kind(kind);
            const auto q = pair_query(context, reference);
            Verdict v;
            if (k == JudgeKind::har) {
                if (context.empty()) throw ConfigError("--context is required for the har judge");
                v = judge_har(q, completion, common.checklist(), common.gw());
            } else {
                v = judge_baseline(k, q, completion, common.gw(), common.baseline());
            }
            std::cout << to_json(v).dump(2) << "\n";
            return v.parse_error ? 3 : 0;
        } else if (*corr) {
            const auto load = load_queries(queries_path, true);
            const auto records = read_records(records_in);
            auto rep = aggregate(records, load.queries, report_inputs(corr_report));
            if (!compare_in.empty()) rep.deltas = compare_runs(records, read_records(compare_in), resamples, 0.95, seed);
            emit_report(rep, corr_report);
        } else if (*rewards) {
            export_rewards(read_records(records_in), std::filesystem::path(rewards_out));
        } else if (*serve) {
            auto& gw = common.gw();
            const auto s = common.section("service");
            ServiceConfig cfg;
            cfg.data_dir = data_dir.empty() ? s.value("data_dir", std::string("sessions")) : data_dir;
            if (s.contains("idle")) {
                const auto& i = s.at("idle");
                cfg.idle.base_ms = i.value("base_ms", cfg.idle.base_ms);
                cfg.idle.early_ms = i.value("early_ms", cfg.idle.early_ms);
                cfg.idle.middle_ms = i.value("middle_ms", cfg.idle.middle_ms);
                cfg.idle.late_ms = i.value("late_ms", cfg.idle.late_ms);
            }
            if (s.contains("switch_stage")) cfg.strategy.switch_stage = parse_stage(s.at("switch_stage").get<std::string>());
            if (s.contains("target_length")) cfg.target_length = s.at("target_length").get<std::size_t>();
            cfg.propose.model = common.section("completion").value("model", common.model);
            SessionService svc(cfg, gw);
            httplib::Server server;
            register_routes(server, svc);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::cerr << "listening on " << host << ":" << port << "\n";
            if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
        } else if (*render) {
            std::cout << render_named(render_kind, parse_layer(render_deepest), rc, rr, rs);
        }
    } catch (const BatchAbortedError& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
