#pragma once

// Batch evaluation: corpus loading, completion plus scoring per query,
// aggregation by split, agreement and correlation against external labels,
// and reward export.

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cowrite/core.hpp"
#include "cowrite/errors.hpp"
#include "cowrite/gateway.hpp"
#include "cowrite/judge.hpp"
#include "cowrite/ked.hpp"
#include "cowrite/session.hpp"
#include "cowrite/stats.hpp"
#include "cowrite/text/metrics.hpp"

namespace cowrite {

// ---------------------------------------------------------------------------
// Loading

struct LineIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct QueryLoad {
    std::vector<EvalQuery> queries;
    std::vector<LineIssue> rejected;
    std::vector<std::string> warnings;
};

inline std::string format_issues(const std::vector<LineIssue>& issues) {
    std::string out;
    for (const auto& i : issues) out += "line " + std::to_string(i.line) + ": " + i.message + "\n";
    return out;
}

/// Reads line-delimited EvalQuery rows in file order. Blank lines are ignored.
/// Any bad row throws a ParseError listing every bad line unless skip_bad.
inline QueryLoad load_queries(std::istream& in, bool skip_bad = false) {
    QueryLoad out;
    std::set<std::string> ids;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto q = query_from_json(nlohmann::json::parse(line));
            if (!ids.insert(q.id).second) throw DomainError("duplicate query id " + q.id);
            out.queries.push_back(std::move(q));
        } catch (const nlohmann::json::exception& e) {
            out.rejected.push_back({n, e.what()});
        } catch (const DomainError& e) {
            out.rejected.push_back({n, e.what()});
        }
    }
    if (!out.rejected.empty() && !skip_bad)
        throw ParseError("invalid query rows:\n" + format_issues(out.rejected), "");
    if (out.queries.empty()) out.warnings.push_back("no queries loaded");
    return out;
}

inline QueryLoad load_queries(const std::filesystem::path& path, bool skip_bad = false) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open query file " + path.string());
    return load_queries(in, skip_bad);
}

namespace detail {

template <class F>
void for_each_json_line(const std::filesystem::path& path, F&& f) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            f(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + " line " + std::to_string(n) + ": " + e.what(), line);
        }
    }
}

}  // namespace detail

/// Gold accept labels, one {query_id, accept} object per line.
inline std::map<std::string, bool> load_gold(const std::filesystem::path& path) {
    std::map<std::string, bool> gold;
    detail::for_each_json_line(path, [&](const nlohmann::json& j) {
        gold[j.at("query_id").get<std::string>()] = j.at("accept").get<bool>();
    });
    return gold;
}

/// Numeric target per query, one {query_id, <column>} object per line.
inline std::map<std::string, double> load_target(const std::filesystem::path& path, const std::string& column) {
    std::map<std::string, double> target;
    detail::for_each_json_line(path, [&](const nlohmann::json& j) {
        target[j.at("query_id").get<std::string>()] = j.at(column).get<double>();
    });
    return target;
}

// ---------------------------------------------------------------------------
// History synthesis for batch L2

inline constexpr std::string_view kHistorySynthesis =
    "L2 history: earlier queries of the same article, in progress order, replayed with their references "
    "treated as accepted suggestions; references not found verbatim in the context are skipped";

/// Document whose text equals `query.context`, with every earlier same-article
/// reference that occurs (in order) inside the context logged as an accepted
/// suggestion and the text around it as user typing.
inline DocumentState synthesize_history(const EvalQuery& query, const std::vector<EvalQuery>& corpus) {
    std::vector<const EvalQuery*> earlier;
    for (const auto& e : corpus)
        if (e.article_id == query.article_id && e.id != query.id && e.progress < query.progress) earlier.push_back(&e);
    std::stable_sort(earlier.begin(), earlier.end(),
                     [](const EvalQuery* a, const EvalQuery* b) { return a->progress < b->progress; });

    struct Hit {
        std::size_t at;
        const EvalQuery* q;
    };
    std::vector<Hit> hits;
    std::size_t cursor = 0;
    for (const auto* e : earlier) {
        const auto at = query.context.find(e->reference, cursor);
        if (at == std::string::npos) continue;
        hits.push_back({at, e});
        cursor = at + e->reference.size();
    }
    if (hits.empty()) return DocumentState::start(query.context, 0);

    DocumentState state = DocumentState::start(query.context.substr(0, hits[0].at), 0);
    Millis t = 0;
    std::size_t pos = hits[0].at;
    for (const auto& h : hits) {
        if (h.at > pos) state = type_text(state, std::string_view(query.context).substr(pos, h.at - pos), ++t);
        const Suggestion s{h.q->id, h.q->reference, Paradigm::L2, "", ++t};
        state = transition(state, s, {FeedbackKind::accept, "", ++t, 0});
        pos = h.at + h.q->reference.size();
    }
    if (pos < query.context.size()) state = type_text(state, std::string_view(query.context).substr(pos), ++t);
    return state;
}

// ---------------------------------------------------------------------------
// Batch run

struct RunRecord {
    std::string query_id;
    Paradigm paradigm = Paradigm::L1;
    std::string completion;
    Verdict har;
    std::optional<long long> ked;
    std::map<std::string, double> baselines;  // metric -> value
    std::vector<std::string> baseline_errors;
    bool parse_error = false;
    bool transport_error = false;
    std::string error;
    Millis started_at = 0;
    Millis finished_at = 0;

    bool flagged() const { return parse_error || transport_error; }
    bool operator==(const RunRecord&) const = default;
};

inline Verdict verdict_from_json(const nlohmann::json& j) {
    Verdict v;
    v.accept = j.at("accept").get<bool>();
    v.triggered_condition = j.value("triggered_condition", "");
    v.reasoning = j.value("reasoning", "");
    v.raw_response = j.value("raw_response", "");
    v.judge = parse_judge_kind(j.value("judge", "har"));
    if (j.contains("scores")) v.scores = j.at("scores").get<std::map<std::string, double>>();
    v.parse_error = j.value("parse_error", false);
    v.fast_path = j.value("fast_path", false);
    v.attempts = j.value("attempts", 0);
    return v;
}

inline nlohmann::json to_json(const RunRecord& r) {
    nlohmann::json j = {{"query_id", r.query_id},
                        {"paradigm", to_string(r.paradigm)},
                        {"completion", r.completion},
                        {"har", to_json(r.har)},
                        {"ked", r.ked ? nlohmann::json(*r.ked) : nlohmann::json(nullptr)},
                        {"baselines", r.baselines},
                        {"baseline_errors", r.baseline_errors},
                        {"parse_error", r.parse_error},
                        {"transport_error", r.transport_error},
                        {"error", r.error},
                        {"started_at", r.started_at},
                        {"finished_at", r.finished_at}};
    return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.query_id = j.at("query_id").get<std::string>();
    r.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
    r.completion = j.value("completion", "");
    r.har = verdict_from_json(j.at("har"));
    if (j.contains("ked") && !j.at("ked").is_null()) r.ked = j.at("ked").get<long long>();
    if (j.contains("baselines")) r.baselines = j.at("baselines").get<std::map<std::string, double>>();
    if (j.contains("baseline_errors")) r.baseline_errors = j.at("baseline_errors").get<std::vector<std::string>>();
    r.parse_error = j.value("parse_error", false);
    r.transport_error = j.value("transport_error", false);
    r.error = j.value("error", "");
    r.started_at = j.value("started_at", Millis{0});
    r.finished_at = j.value("finished_at", Millis{0});
    return r;
}

inline void write_records(std::ostream& out, const std::vector<RunRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<RunRecord> read_records(const std::filesystem::path& path) {
    std::vector<RunRecord> out;
    detail::for_each_json_line(path, [&](const nlohmann::json& j) { out.push_back(run_record_from_json(j)); });
    return out;
}

struct BatchConfig {
    Paradigm paradigm = Paradigm::L1;
    std::string completion_model;  // empty uses the gateway's model
    std::optional<double> completion_temperature;
    ChecklistConfig judge;
    bool run_ked = true;
    KedConfig ked;
    std::vector<JudgeKind> baselines;  // model-judged baselines to run besides HAR
    BaselineConfig baseline;
    bool surface_metrics = true;  // bleu, rouge_l, meteor, ncd, char and word edit distances
    double max_failure_rate = 0.5;
    std::size_t workers = 0;  // 0 uses the gateway's in-flight limit
    std::function<Millis()> clock;  // empty uses wall-clock milliseconds

    void validate() const {
        if (paradigm != Paradigm::L1 && paradigm != Paradigm::L2) throw ConfigError("batch runs support L1 and L2");
        if (!(max_failure_rate >= 0 && max_failure_rate <= 1)) throw ConfigError("max_failure_rate outside [0, 1]");
        for (auto k : baselines)
            if (k == JudgeKind::har) throw ConfigError("har is always run; list only baseline judges");
    }
};

inline Millis wall_clock_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

inline std::map<std::string, double> surface_scores(std::string_view completion, std::string_view reference) {
    return {{"bleu", text::bleu(completion, reference)},
            {"rouge_l", text::rouge_l(completion, reference)},
            {"meteor", text::meteor(completion, reference)},
            {"ncd", text::ncd(completion, reference)},
            {"levenshtein", static_cast<double>(text::levenshtein(completion, reference))},
            {"revision_distance", static_cast<double>(text::revision_distance(completion, reference))}};
}

namespace detail {

inline Verdict conservative_reject(std::string condition) {
    Verdict v;
    v.triggered_condition = std::move(condition);
    return v;
}

inline RunRecord score_query(const EvalQuery& q, const std::vector<EvalQuery>& corpus, const BatchConfig& cfg,
                             Gateway& gw, const std::function<Millis()>& clock) {
    RunRecord r;
    r.query_id = q.id;
    r.paradigm = cfg.paradigm;
    r.started_at = clock();
    try {
        const auto state = cfg.paradigm == Paradigm::L2 ? synthesize_history(q, corpus) : DocumentState::start(q.context, 0);
        const auto strategy = cfg.paradigm == Paradigm::L2 ? Strategy::stateful : Strategy::stateless;
        const RequestParams params{cfg.completion_model.empty() ? gw.config().model : cfg.completion_model,
                                   cfg.completion_temperature.value_or(gw.config().temperature)};
        r.completion = gw.complete(completion_messages(state, strategy), params);

        r.har = judge_har(q, r.completion, cfg.judge, gw);
        if (r.har.parse_error) {
            r.parse_error = true;
            r.error = "judge output unparseable";
        } else if (cfg.run_ked) {
            auto k = evaluate_ked(q, r.completion, gw, cfg.ked);
            if (k.parse_error) {
                r.parse_error = true;
                r.error = "editing-cost output unparseable";
            } else {
                r.ked = k.cost;
            }
        }
        if (cfg.surface_metrics) r.baselines = surface_scores(r.completion, q.reference);
        for (auto kind : cfg.baselines) {
            const std::string name = to_string(kind);
            try {
                auto v = judge_baseline(kind, q, r.completion, gw, cfg.baseline);
                if (v.parse_error) {
                    r.baseline_errors.push_back(name + ": unparseable");
                    continue;
                }
                r.baselines[name + ".accept"] = v.accept ? 1.0 : 0.0;
                for (const auto& [k, val] : v.scores) r.baselines[name + "." + k] = val;
            } catch (const TransportError& e) {
                r.baseline_errors.push_back(name + ": " + e.what());
            }
        }
    } catch (const TransportError& e) {
        r.transport_error = true;
        r.error = e.what();
    }
    if (r.flagged()) {
        r.ked.reset();
        if (r.transport_error) r.har = conservative_reject("transport_error");
    }
    r.finished_at = clock();
    return r;
}

}  // namespace detail

/// Scores every query concurrently and returns records in query order. Transport
/// and parse failures are flagged per record; exceeding max_failure_rate throws
/// BatchAbortedError. Any other error aborts the run.
inline std::vector<RunRecord> run_batch(const std::vector<EvalQuery>& queries, const BatchConfig& cfg, Gateway& gw) {
    cfg.validate();
    const std::function<Millis()> clock = cfg.clock ? cfg.clock : wall_clock_ms;
    std::vector<RunRecord> records(queries.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    const std::size_t workers =
        std::max<std::size_t>(1, std::min(cfg.workers ? cfg.workers : static_cast<std::size_t>(gw.config().max_in_flight),
                                          std::max<std::size_t>(queries.size(), 1)));
    auto work = [&] {
        for (std::size_t i; (i = next++) < queries.size();) {
            try {
                records[i] = detail::score_query(queries[i], queries, cfg, gw, clock);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = queries.size();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    const auto flagged = static_cast<double>(std::count_if(records.begin(), records.end(),
                                                           [](const RunRecord& r) { return r.flagged(); }));
    if (!records.empty() && flagged / static_cast<double>(records.size()) > cfg.max_failure_rate)
        throw BatchAbortedError(std::to_string(static_cast<long long>(flagged)) + " of " +
                                std::to_string(records.size()) + " queries failed, above the configured ceiling");
    return records;
}

// ---------------------------------------------------------------------------
// Aggregation

struct SplitCell {
    std::string split;  // overall, category, domain, position, progress
    std::string key;
    std::size_t n = 0;         // unflagged records
    std::size_t accepted = 0;
    std::size_t ked_n = 0;
    std::optional<double> har_pct;
    std::optional<double> mean_ked;

    bool operator==(const SplitCell&) const = default;
};

struct Agreement {
    std::size_t n = 0;  // unflagged records with a gold label
    std::optional<double> alignment_pct;
    std::optional<stats::Kappa> kappa;
};

struct CorrelationRow {
    std::string metric;
    std::size_t n = 0;
    std::optional<double> pearson;
    std::optional<double> spearman;
};

struct DeltaRow {
    std::string metric;
    stats::DeltaCI ci;
};

struct MetricReport {
    std::string history_note;
    std::size_t total = 0;
    std::size_t flagged = 0;
    SplitCell overall;
    std::vector<SplitCell> by_category;
    std::vector<SplitCell> by_domain;
    std::vector<SplitCell> by_position;  // article position bucket
    std::vector<SplitCell> by_progress;  // progress fraction thirds
    std::optional<Agreement> agreement;
    std::vector<CorrelationRow> correlations;
    std::vector<DeltaRow> deltas;
};

struct AggregateInputs {
    std::optional<std::map<std::string, bool>> gold;
    std::optional<std::map<std::string, double>> target;
};

namespace detail {

struct Tally {
    std::size_t n = 0, accepted = 0, ked_n = 0;
    long long ked_sum = 0;

    void add(const RunRecord& r) {
        ++n;
        accepted += r.har.accept;
        if (r.ked) {
            ++ked_n;
            ked_sum += *r.ked;
        }
    }

    SplitCell cell(std::string split, std::string key) const {
        SplitCell c{std::move(split), std::move(key), n, accepted, ked_n, std::nullopt, std::nullopt};
        if (n) c.har_pct = 100.0 * static_cast<double>(accepted) / static_cast<double>(n);
        if (ked_n) c.mean_ked = static_cast<double>(ked_sum) / static_cast<double>(ked_n);
        return c;
    }
};

inline std::optional<double> metric_value(const RunRecord& r, const std::string& metric) {
    if (metric == "har") return r.har.accept ? 1.0 : 0.0;
    if (metric == "ked") return r.ked ? std::optional<double>(static_cast<double>(*r.ked)) : std::nullopt;
    auto it = r.baselines.find(metric);
    if (it == r.baselines.end()) return std::nullopt;
    return it->second;
}

}  // namespace detail

/// Share (in percent) of unflagged verdicts whose accept equals the gold label;
/// nullopt when every row is flagged.
inline std::optional<double> alignment_rate(const std::vector<Verdict>& verdicts, const std::vector<bool>& gold) {
    if (verdicts.size() != gold.size()) throw LengthMismatchError("verdicts and gold labels differ in length");
    std::size_t n = 0, match = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i].parse_error) continue;
        ++n;
        match += verdicts[i].accept == gold[i];
    }
    if (!n) return std::nullopt;
    return 100.0 * static_cast<double>(match) / static_cast<double>(n);
}

/// Flagged records are excluded from every cell. The result does not depend on
/// record order: correlation inputs are sorted by query id.
inline MetricReport aggregate(const std::vector<RunRecord>& records, const std::vector<EvalQuery>& queries,
                              const AggregateInputs& inputs = {}) {
    std::map<std::string, const EvalQuery*> by_id;
    for (const auto& q : queries) by_id[q.id] = &q;

    MetricReport rep;
    rep.history_note = std::string(kHistorySynthesis);
    rep.total = records.size();
    detail::Tally overall;
    std::map<std::string, detail::Tally> cat, dom, pos, prog;
    std::vector<const RunRecord*> scored;
    for (const auto& r : records) {
        auto it = by_id.find(r.query_id);
        if (it == by_id.end()) throw NotFoundError("record for unknown query " + r.query_id);
        if (r.flagged()) {
            ++rep.flagged;
            continue;
        }
        const EvalQuery& q = *it->second;
        overall.add(r);
        cat[to_string(q.category)].add(r);
        dom[q.domain_tag].add(r);
        pos[to_string(q.position)].add(r);
        prog[to_string(stage_for_progress(q.progress))].add(r);
        scored.push_back(&r);
    }
    std::sort(scored.begin(), scored.end(), [](const RunRecord* a, const RunRecord* b) { return a->query_id < b->query_id; });

    rep.overall = overall.cell("overall", "all");
    for (const char* k : {"scientific", "creative"}) rep.by_category.push_back(cat[k].cell("category", k));
    for (int d = 1; d <= 16; ++d) {
        const std::string key = "D" + std::to_string(d);
        rep.by_domain.push_back(dom[key].cell("domain", key));
    }
    for (const char* k : {"early", "middle", "late"}) {
        rep.by_position.push_back(pos[k].cell("position", k));
        rep.by_progress.push_back(prog[k].cell("progress", k));
    }

    if (inputs.gold) {
        std::vector<bool> judge, gold;
        for (const auto* r : scored) {
            auto g = inputs.gold->find(r->query_id);
            if (g == inputs.gold->end()) continue;
            judge.push_back(r->har.accept);
            gold.push_back(g->second);
        }
        Agreement a;
        a.n = judge.size();
        if (a.n) {
            std::size_t match = 0;
            for (std::size_t i = 0; i < a.n; ++i) match += judge[i] == gold[i];
            a.alignment_pct = 100.0 * static_cast<double>(match) / static_cast<double>(a.n);
            a.kappa = stats::cohen_kappa(judge, gold);
        }
        rep.agreement = a;
    }

    if (inputs.target) {
        std::set<std::string> metrics = {"har", "ked"};
        for (const auto* r : scored)
            for (const auto& [k, v] : r->baselines) metrics.insert(k);
        for (const auto& m : metrics) {
            std::vector<double> xs, ys;
            for (const auto* r : scored) {
                auto t = inputs.target->find(r->query_id);
                auto v = detail::metric_value(*r, m);
                if (t == inputs.target->end() || !v) continue;
                xs.push_back(*v);
                ys.push_back(t->second);
            }
            CorrelationRow row{m, xs.size(), std::nullopt, std::nullopt};
            if (xs.size() >= 2) {
                try {
                    row.pearson = stats::pearson(xs, ys);
                    row.spearman = stats::spearman(xs, ys);
                } catch (const UndefinedCorrelationError&) {
                }
            }
            rep.correlations.push_back(row);
        }
    }
    return rep;
}

/// Paired bootstrap deltas (b - a) on har and ked over queries scored unflagged
/// in both runs.
inline std::vector<DeltaRow> compare_runs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                                          std::size_t resamples = 1000, double level = 0.95, std::uint64_t seed = 42) {
    std::map<std::string, const RunRecord*> in_b;
    for (const auto& r : b)
        if (!r.flagged()) in_b[r.query_id] = &r;
    std::vector<const RunRecord*> left;
    for (const auto& r : a)
        if (!r.flagged() && in_b.count(r.query_id)) left.push_back(&r);
    std::sort(left.begin(), left.end(), [](const RunRecord* x, const RunRecord* y) { return x->query_id < y->query_id; });

    std::vector<DeltaRow> out;
    for (const char* m : {"har", "ked"}) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto* r : left) {
            auto x = detail::metric_value(*r, m), y = detail::metric_value(*in_b[r->query_id], m);
            if (x && y) pairs.emplace_back(*x, *y);
        }
        if (pairs.empty()) continue;
        out.push_back({m, stats::bootstrap_delta_ci(pairs, resamples, level, seed)});
    }
    return out;
}

namespace detail {

inline nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline nlohmann::json cell_json(const SplitCell& c) {
    return {{"split", c.split},        {"key", c.key},     {"n", c.n},
            {"accepted", c.accepted},  {"ked_n", c.ked_n}, {"har_pct", opt(c.har_pct)},
            {"mean_ked", opt(c.mean_ked)}};
}

inline nlohmann::json cells_json(const std::vector<SplitCell>& cells) {
    auto a = nlohmann::json::array();
    for (const auto& c : cells) a.push_back(cell_json(c));
    return a;
}

inline std::string fixed(const std::optional<double>& v, int digits) {
    if (!v) return "-";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << *v;
    return ss.str();
}

}  // namespace detail

inline nlohmann::json to_json(const MetricReport& r) {
    nlohmann::json j = {{"history_synthesis", r.history_note},
                        {"total", r.total},
                        {"flagged", r.flagged},
                        {"overall", detail::cell_json(r.overall)},
                        {"by_category", detail::cells_json(r.by_category)},
                        {"by_domain", detail::cells_json(r.by_domain)},
                        {"by_position", detail::cells_json(r.by_position)},
                        {"by_progress", detail::cells_json(r.by_progress)}};
    if (r.agreement) {
        const auto& a = *r.agreement;
        j["agreement"] = {{"n", a.n},
                          {"alignment_pct", detail::opt(a.alignment_pct)},
                          {"kappa", a.kappa ? nlohmann::json(a.kappa->kappa) : nlohmann::json(nullptr)},
                          {"kappa_degenerate", a.kappa && a.kappa->degenerate}};
    }
    if (!r.correlations.empty()) {
        auto rows = nlohmann::json::array();
        for (const auto& c : r.correlations)
            rows.push_back({{"metric", c.metric},
                            {"n", c.n},
                            {"pearson", detail::opt(c.pearson)},
                            {"spearman", detail::opt(c.spearman)}});
        j["correlations"] = rows;
    }
    if (!r.deltas.empty()) {
        auto rows = nlohmann::json::array();
        for (const auto& d : r.deltas)
            rows.push_back({{"metric", d.metric},
                            {"delta", d.ci.delta},
                            {"lo", d.ci.lo},
                            {"hi", d.ci.hi},
                            {"n", d.ci.n},
                            {"resamples", d.ci.resamples},
                            {"level", d.ci.level},
                            {"seed", d.ci.seed}});
        j["deltas"] = rows;
    }
    return j;
}

/// Aligned-column text rendering of a report.
inline std::string render_report_text(const MetricReport& r) {
    std::ostringstream out;
    out << "# " << r.history_note << "\n";
    out << "records: " << r.total << "  flagged: " << r.flagged << "\n\n";
    out << std::left << std::setw(10) << "split" << std::setw(12) << "key" << std::right << std::setw(6) << "n"
        << std::setw(9) << "HAR%" << std::setw(9) << "KED" << "\n";
    auto row = [&](const SplitCell& c) {
        out << std::left << std::setw(10) << c.split << std::setw(12) << c.key << std::right << std::setw(6) << c.n
            << std::setw(9) << detail::fixed(c.har_pct, 1) << std::setw(9) << detail::fixed(c.mean_ked, 2) << "\n";
    };
    row(r.overall);
    for (const auto* group : {&r.by_category, &r.by_domain, &r.by_position, &r.by_progress})
        for (const auto& c : *group) row(c);
    if (r.agreement) {
        const auto& a = *r.agreement;
        out << "\nagreement  n=" << a.n << "  alignment%=" << detail::fixed(a.alignment_pct, 1) << "  kappa="
            << (a.kappa ? detail::fixed(a.kappa->kappa, 3) : "-") << (a.kappa && a.kappa->degenerate ? " (degenerate)" : "")
            << "\n";
    }
    if (!r.correlations.empty()) {
        out << "\n" << std::left << std::setw(24) << "metric" << std::right << std::setw(6) << "n" << std::setw(10)
            << "pearson" << std::setw(10) << "spearman" << "\n";
        for (const auto& c : r.correlations)
            out << std::left << std::setw(24) << c.metric << std::right << std::setw(6) << c.n << std::setw(10)
                << detail::fixed(c.pearson, 3) << std::setw(10) << detail::fixed(c.spearman, 3) << "\n";
    }
    if (!r.deltas.empty()) {
        out << "\n" << std::left << std::setw(10) << "delta" << std::right << std::setw(10) << "mean" << std::setw(10)
            << "lo" << std::setw(10) << "hi" << "\n";
        for (const auto& d : r.deltas)
            out << std::left << std::setw(10) << d.metric << std::right << std::setw(10) << detail::fixed(d.ci.delta, 4)
                << std::setw(10) << detail::fixed(d.ci.lo, 4) << std::setw(10) << detail::fixed(d.ci.hi, 4) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Rewards

/// One {query_id, completion, reward} line per record; reward is 1 only for an
/// unflagged HAR accept. Flagged rows carry a "flag" field.
inline void export_rewards(const std::vector<RunRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        nlohmann::json j = {{"query_id", r.query_id},
                            {"completion", r.completion},
                            {"reward", (!r.flagged() && r.har.accept) ? 1 : 0}};
        if (r.flagged()) j["flag"] = r.transport_error ? "transport_error" : "parse_error";
        out << j.dump() << '\n';
    }
}

inline void export_rewards(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write rewards to " + path.string());
    export_rewards(records, out);
    if (!out) throw ConfigError("failed writing rewards to " + path.string());
}

}  // namespace cowrite
