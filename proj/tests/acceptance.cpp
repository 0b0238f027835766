// Acceptance run: one PASS/FAIL line per headline criterion, nonzero exit if any fails.
// Mock backend and local files only.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cowrite/harness.hpp"
#include "cowrite/ked.hpp"
#include "cowrite/service.hpp"
#include "cowrite/stats.hpp"
#include "cowrite/text/metrics.hpp"
#include "fast_path_suite.hpp"
#include "test_support.hpp"

using namespace cowrite;
using namespace cowrite::testing_support;

namespace {

struct Check {
    bool ok = true;
    std::string why;
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0) c.expect(secs < budget_s, "took " + std::to_string(secs) + " s");
    std::ostringstream line;
    line << (c.ok ? "PASS " : "FAIL ") << name << " (" << std::fixed;
    line.precision(3);
    line << secs << " s)";
    if (!c.ok) line << ": " << c.why;
    std::cout << line.str() << std::endl;
    failures += !c.ok;
}

std::size_t levenshtein_dp(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j - 1] + (a[i - 1] != b[j - 1]), d[i - 1][j] + 1, d[i][j - 1] + 1});
    return d[a.size()][b.size()];
}

std::vector<std::pair<int, std::string>> rule_lines(const std::string& prompt) {
    std::vector<std::pair<int, std::string>> out;
    static const std::regex line(R"((^|\n)(\d+)\. \*\*([^*]+):\*\*)");
    for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), line); it != std::sregex_iterator(); ++it)
        out.emplace_back(std::stoi((*it)[2]), (*it)[3]);
    return out;
}

std::string fill(std::string t, const std::vector<std::pair<std::string, std::string>>& subs) {
    for (const auto& [k, v] : subs) t = replace_all(t, k, v);
    return t;
}

void prompt_fidelity(Check& c) {
    const std::string ctx = "The experiment used a PVDF", ref = "membrane, transfer tank.", comp = "membrane and a shaker.";
    c.expect(render_har_prompt(query(ctx, ref), comp) ==
                 fill(golden("har"), {{"{context}", ctx}, {"{sentence_A}", ref}, {"{sentence_B}", comp}}),
             "har");
    c.expect(render_ked_prompt(ref, comp) == fill(golden("ked"), {{"{sentence_A}", ref}, {"{sentence_B}", comp}}), "ked");
    const std::pair<JudgeKind, const char*> baselines[] = {
        {JudgeKind::logic, "logic"}, {JudgeKind::style, "style"}, {JudgeKind::semantic, "semantic"},
        {JudgeKind::holistic, "holistic"}};
    for (auto [kind, name] : baselines)
        c.expect(render_baseline_prompt(kind, ref, comp) ==
                     fill(golden(name), {{"{sentence_A}", ref}, {"{sentence_B}", comp}}),
                 name);
    DocumentState doc;
    doc.text = "Intro sentence.";
    c.expect(completion_messages(doc, Strategy::stateless).at(0).content == golden("completion_l1"), "completion_l1");
    c.expect(completion_messages(doc, Strategy::stateful).at(0).content == golden("completion_l2"), "completion_l2");
    for (const char* name : {"har", "ked", "logic", "style", "semantic", "holistic", "completion_l1", "completion_l2"})
        c.expect(sha256_hex(golden(name)) == golden_digest(name), std::string("digest ") + name);
}

void ked_worked_example(Check& c) {
    const auto plan = parse_edit_plan(ked_example_output());
    c.expect(plan.actions.size() == 3, "three actions");
    if (plan.actions.size() == 3) {
        c.expect(plan.actions[0].cost == 1 && plan.actions[1].cost == 3 && plan.actions[2].cost == 2, "costs 1,3,2");
    }
    c.expect(plan.valid && plan.validated_total == 6 && !plan.total_mismatch, "total 6");
}

void metric_oracles(Check& c) {
    std::mt19937 rng(7);
    const std::u32string alphabet = U"abcdé世";
    auto random_u32 = [&] {
        std::u32string s(rng() % 13, U'a');
        for (auto& ch : s) ch = alphabet[rng() % alphabet.size()];
        return s;
    };
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_u32(), b = random_u32();
        c.expect(text::levenshtein(utf8::encode(a), utf8::encode(b)) == levenshtein_dp(a, b), "levenshtein");
    }
    c.expect(std::abs(text::rouge_l("the cat sat", "the cat ran fast") - 4.0 / 7.0) <= 1e-9, "rouge_l");
    const double bleu_hand = std::exp(1.0 - 6.0 / 5.0) *
                             std::exp((std::log(2.0 / 5.0) + std::log(1.0 / 4.0) + std::log(1.0 / 4.0) +
                                       std::log(1.0 / 3.0)) / 4.0);
    c.expect(std::abs(text::bleu("a b c d e", "a b x y z w") - bleu_hand) <= 1e-9, "bleu");
    c.expect(std::abs(text::meteor("the cat sat on the mat", "the cat sat on the mat") - (1.0 - 0.5 / 216.0)) <= 1e-9,
             "meteor identical");
    c.expect(std::abs(text::meteor("world hello", "hello world") - 0.5) <= 1e-9, "meteor swapped");
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng() % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = 0.5 * x[i] + u(rng);
        }
        const double direct = stats::spearman(x, y);
        const double composed = stats::pearson(stats::average_ranks(x), stats::average_ranks(y));
        c.expect(std::abs(direct - composed) <= 1e-9, "spearman");
    }
    std::vector<bool> a, b;
    auto add = [&](int n, bool x, bool y) {
        for (int i = 0; i < n; ++i) {
            a.push_back(x);
            b.push_back(y);
        }
    };
    add(20, true, true);
    add(5, true, false);
    add(10, false, true);
    add(15, false, false);
    c.expect(stats::cohen_kappa(a, b).kappa == 0.4, "kappa");
}

void style_recompute(Check& c) {
    std::mt19937 rng(31);
    for (int t = 0; t < 1000; ++t) {
        const int s[4] = {1 + int(rng() % 10), 1 + int(rng() % 10), 1 + int(rng() % 10), 1 + int(rng() % 10)};
        // hundredths, then half-up to tenths
        const int hundredths = 25 * s[0] + 25 * s[1] + 30 * s[2] + 20 * s[3];
        const double oracle = ((hundredths + 5) / 10) / 10.0;
        c.expect(style_overall({double(s[0]), double(s[1]), double(s[2]), double(s[3])}) == oracle, "style");
    }
}

void fast_path(Check& c) {
    auto mock = std::make_shared<MockBackend>(true);
    Gateway gw(offline_config(), mock);
    ChecklistConfig cfg;
    cfg.fast_path.enabled = true;
    const auto& cases = fast_path_cases();
    c.expect(cases.size() == 30, "30 cases");
    for (const auto& k : cases) {
        const auto v = judge_har(query(k.context, k.reference), k.completion, cfg, gw);
        const std::string tag = "case \"" + k.context + "\"";
        c.expect(v.fast_path, tag + " not short-circuited");
        c.expect(cited_rule(v.triggered_condition) == k.rule, tag + " cites wrong rule");
        c.expect(v.accept == (har_rule(k.rule).action == RuleAction::accept), tag + " wrong decision");
        bool holds = false;
        switch (k.rule) {
            case 1: holds = repetition_oracle(k.context, k.completion); break;
            case 4: holds = overlap_oracle(k.completion, k.reference); break;
            case 5: holds = open_pair_oracle(k.context, k.completion); break;
            case 6: holds = open_fence_oracle(k.context, k.completion); break;
        }
        c.expect(holds, tag + " oracle disagrees");
    }
    c.expect(mock->calls() == 0, "gateway called");
}

BatchConfig toy_config() {
    BatchConfig cfg;
    cfg.clock = [] { return Millis{1000}; };
    return cfg;
}

std::vector<RunRecord> toy_run(const std::vector<EvalQuery>& qs, const nlohmann::json& script) {
    Gateway gw(offline_config(), mock_from_json(script));
    return run_batch(qs, toy_config(), gw);
}

void toy_determinism(Check& c) {
    const auto qs = load_queries(data_path("data/toy_corpus.jsonl")).queries;
    const auto script = toy_mock_json();
    const auto a = toy_run(qs, script), b = toy_run(qs, script);
    c.expect(a == b, "records differ");
    std::ostringstream ja, jb;
    write_records(ja, a);
    write_records(jb, b);
    c.expect(ja.str() == jb.str(), "serialized records differ");
    const auto ra = aggregate(a, qs), rb = aggregate(b, qs);
    c.expect(to_json(ra).dump() == to_json(rb).dump(), "reports differ");
    c.expect(render_report_text(ra) == render_report_text(rb), "text reports differ");
    const auto planted = script.at("planted_accepts").get<std::size_t>();
    c.expect(ra.overall.n == 20 && ra.overall.har_pct == 100.0 * double(planted) / 20.0, "har pct");
}

void ablation(Check& c) {
    const auto q = query("ctx", "ref");
    const std::pair<Layer, std::size_t> cases[] = {
        {Layer::L1_interaction, 7}, {Layer::L2_surface, 13}, {Layer::L3_semantic, 17}};
    for (auto [layer, n] : cases) {
        ChecklistConfig cfg;
        cfg.deepest = layer;
        const auto rules = rule_lines(render_har_prompt(q, "c", cfg));
        c.expect(rules.size() == n, "rule count " + std::to_string(rules.size()));
        if (!rules.empty()) c.expect(rules.back().second == "Comprehensive judgment", "comprehensive not last");
    }
}

void rewards(Check& c) {
    const auto qs = load_queries(data_path("data/toy_corpus.jsonl")).queries;
    const auto recs = toy_run(qs, toy_mock_json());
    std::ostringstream out;
    export_rewards(recs, out);
    std::istringstream lines(out.str());
    std::string line;
    std::size_t i = 0;
    while (std::getline(lines, line) && i < recs.size()) {
        const auto j = nlohmann::json::parse(line);
        const bool accepted = !recs[i].flagged() && recs[i].har.accept;
        c.expect(j.at("query_id") == recs[i].query_id, "order");
        c.expect(j.at("reward").get<int>() == (accepted ? 1 : 0), "reward for " + recs[i].query_id);
        ++i;
    }
    c.expect(i == recs.size(), "row count");
}

void session_replay(Check& c) {
    const auto dir = fresh_dir("acceptance_replay");
    auto mock = std::make_shared<MockBackend>(false);
    mock->set_default(" and then it rained.");
    Gateway gw(offline_config(), mock);
    Millis now = 1000;
    std::function<Millis()> clock = [&now] { return now; };
    ServiceConfig cfg;
    cfg.data_dir = dir.string();
    std::mt19937 rng(2024);
    std::map<std::string, std::pair<DocumentState, Telemetry>> before;
    {
        SessionService svc(cfg, gw, clock);
        for (int s = 0; s < 8; ++s) {
            const Paradigm p = static_cast<Paradigm>(s % 4);
            const auto id = svc.create(p, "Opening line " + std::to_string(s) + ".");
            for (int step = 0; step < 60; ++step) {
                now += 1 + rng() % 900;
                switch (rng() % 5) {
                    case 0: svc.request_suggestion(id, {Millis(rng() % 4000), p == Paradigm::L0, std::nullopt}); break;
                    case 1:
                        if (auto pending = svc.get(id).at("pending"); !pending.is_null()) {
                            const char* kinds[] = {"accept", "modify", "reject"};
                            const std::string k = kinds[rng() % 3];
                            nlohmann::json ev = {{"type", "feedback"}, {"suggestion_id", pending.at("id")}, {"kind", k}};
                            if (k == "modify") ev["final_text"] = " edited " + std::to_string(step);
                            svc.append_event(id, ev);
                        }
                        break;
                    case 2: svc.append_event(id, {{"type", "typed"}, {"text", " w" + std::to_string(step)}}); break;
                    case 3: {
                        const std::size_t len = utf8::decode(svc.state(id).text).size();
                        if (len > 2)
                            svc.append_event(id, {{"type", "delete"}, {"offset", rng() % (len - 1)}, {"length", 1}});
                        break;
                    }
                    case 4: svc.append_event(id, {{"type", "focus"}}); break;
                }
            }
            before[id] = {svc.state(id), svc.telemetry(id)};
        }
    }
    auto offline = std::make_shared<MockBackend>(true);
    Gateway gw2(offline_config(), offline);
    SessionService restored(cfg, gw2, clock);
    c.expect(restored.session_ids().size() == before.size(), "session count");
    for (const auto& [id, snap] : before) {
        c.expect(restored.state(id).text == snap.first.text, "text of " + id);
        c.expect(restored.state(id) == snap.first, "state of " + id);
        c.expect(restored.telemetry(id) == snap.second, "telemetry of " + id);
    }
    c.expect(offline->calls() == 0, "replay called the backend");
    std::filesystem::remove_all(dir);
}

void l3_controller(Check& c) {
    for (Stage sw : {Stage::middle, Stage::late}) {
        const StrategyPolicy sp{sw};
        const IdlePolicy ip;
        int switches = 0;
        Strategy prev = Strategy::stateless;
        Millis prev_idle = ip.early_ms;
        for (int i = 0; i <= 1000; ++i) {
            const double progress = i / 1000.0;
            const StageEstimate e{stage_for_progress(progress), progress, StageBasis::heuristic};
            const auto s = select_strategy(e, sp, Paradigm::L3);
            if (s != prev) {
                ++switches;
                c.expect(s == Strategy::stateful && e.stage == sw, "switch at wrong stage");
            }
            prev = s;
            const Millis idle = *idle_threshold(e, ip, Paradigm::L3);
            c.expect(idle <= prev_idle, "idle threshold increased");
            prev_idle = idle;
        }
        c.expect(switches == 1, "switch count " + std::to_string(switches));
    }
}

}  // namespace

int main() {
    criterion("prompt fidelity", 1.0, prompt_fidelity);
    criterion("edit-cost worked example", 0, ked_worked_example);
    criterion("metric oracles", 10.0, metric_oracles);
    criterion("style recomputation", 0, style_recompute);
    criterion("checklist fast path soundness", 0, fast_path);
    criterion("toy corpus determinism", 5.0, toy_determinism);
    criterion("checklist ablation renders", 0, ablation);
    criterion("reward export", 0, rewards);
    criterion("session replay", 0, session_replay);
    criterion("adaptive controller sweep", 0, l3_controller);
    return failures == 0 ? 0 : 1;
}
