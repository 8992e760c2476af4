// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <set>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "oceanqa/rendering.hpp"
#include "oceanqa/serialization.hpp"
#include "oceanqa/text_util.hpp"
#include "oceanqa/transport.hpp"

namespace oceanqa {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxToolCalls = 4;

const char* kSystemPrompt =
    "You answer questions about ocean observations using NOAA data. When a question needs measured or modeled values, "
    "call exactly the functions you need. Report every number exactly as the function result gives it, rounded to two "
    "decimals, with its unit and datum. Do not invent values.";

struct Retrieved {
    std::vector<ScoredChunk> docs;
    std::vector<WebResult> web;
    std::vector<std::string> degraded;
};

std::string citation_kind(CitationKind k) {
    switch (k) {
        case CitationKind::Dataset: return "Dataset";
        case CitationKind::Document: return "Document";
        case CitationKind::Web: return "Web";
    }
    return "Dataset";
}

json encode_plan(const TurnPlan& p) {
    return {{"run_web", p.run_web},
            {"run_docs", p.run_docs},
            {"structured", p.structured ? encode(*p.structured) : json(nullptr)},
            {"deferred", p.deferred}};
}

Retrieved retrieve(const std::string& text, const TurnPlan& p, const OrchestratorDeps& d) {
    std::future<std::vector<ScoredChunk>> docs;
    std::future<std::vector<WebResult>> web;
    if (p.run_docs && d.docs) docs = std::async(std::launch::async, [&] { return d.docs->search(text, d.doc_k); });
    if (p.run_web && d.web) web = std::async(std::launch::async, [&] { return d.web->search(text); });
    Retrieved r;
    if (p.run_docs) {
        if (!d.docs) {
            r.degraded.emplace_back("document search is not configured");
        } else {
            try {
                r.docs = docs.get();
            } catch (const Error& e) {
                r.degraded.push_back(fmt::format("document search unavailable ({})", to_string(e.code())));
            }
        }
    }
    if (p.run_web) {
        if (!d.web) {
            r.degraded.emplace_back("web search is not configured");
        } else {
            try {
                r.web = web.get();
                if (r.web.size() > d.web_k) r.web.resize(d.web_k);
            } catch (const Error& e) {
                r.degraded.push_back(fmt::format("web search unavailable ({})", to_string(e.code())));
            } catch (const std::exception& e) {
                r.degraded.push_back("web search unavailable (Internal)");
            }
        }
    }
    return r;
}

std::vector<Citation> citations_for(const ToolResponse* tr, const Retrieved& r) {
    std::vector<Citation> out;
    auto add = [&](Citation c) {
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    };
    if (tr && tr->others.contains("provenance"))
        for (const auto& p : tr->others["provenance"])
            add({CitationKind::Dataset, p["dataset_id"].get<std::string>(),
                 fmt::format("{}: {}", p["source_name"].get<std::string>(), p["station_or_grid"].get<std::string>())});
    std::set<std::string> seen_docs;
    for (const auto& h : r.docs)
        if (seen_docs.insert(h.chunk.doc_id).second)
            add({CitationKind::Document, fmt::format("{}#{}", h.chunk.doc_id, h.chunk.chunk_index),
                 h.chunk.meta.title.empty() ? h.chunk.doc_id : h.chunk.meta.title});
    for (const auto& w : r.web) add({CitationKind::Web, w.url, w.title});
    return out;
}

std::string sources_line(const std::vector<Citation>& citations) {
    if (citations.empty()) return "";
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < citations.size(); ++i) {
        const auto& c = citations[i];
        std::string name = c.kind == CitationKind::Dataset ? c.identifier : c.title;
        if (c.kind == CitationKind::Web) name = "web: " + name;
        parts.push_back(fmt::format("[{}] {}", i + 1, name));
    }
    return fmt::format("Sources: {}.", fmt::join(parts, "; "));
}

std::string first_sentence(const std::string& text) {
    auto t = trim(text);
    std::string flat;
    for (char c : t) flat += (c == '\n' || c == '\t') ? ' ' : c;
    auto end = flat.find(". ");
    if (end != std::string::npos && end < 300) return flat.substr(0, end + 1);
    return flat.size() > 300 ? flat.substr(0, 297) + "..." : flat;
}

Answer assemble(const TurnPlan& p, const ToolResponse* tr, const Retrieved& r, Mode mode) {
    Answer a;
    a.mode = mode;
    a.citations = citations_for(tr, r);
    if (tr) {
        a.data = tr->json_data;
        a.figures = tr->images;
        for (const auto& pv : tr->others["provenance"]) a.provenance.push_back(decode_provenance(pv));
    }
    json diag = {{"plan", encode_plan(p)}, {"degraded", r.degraded}};
    if (tr) {
        diag["function"] = tr->others.value("function", "");
        if (tr->others.contains("arguments")) diag["arguments"] = tr->others["arguments"];
        if (tr->others.contains("calls")) diag["calls"] = tr->others["calls"];
        if (tr->others.contains("errors")) diag["errors"] = tr->others["errors"];
        diag["unit"] = tr->others["unit"];
        diag["time_span"] = tr->others["time_span"];
    }
    a.diagnostics = std::move(diag);
    std::string text = synthesize(tr, a.citations, r.degraded);
    if (!tr && !r.docs.empty())
        text += fmt::format(" From {}: {}", r.docs.front().chunk.meta.title, first_sentence(r.docs.front().chunk.text));
    a.text = std::move(text);
    return a;
}

[[noreturn]] void rethrow_with_partial(const Error& e, const Answer& partial) {
    json d = e.details().is_object() ? e.details() : json::object();
    d["partial"] = encode(partial);
    throw Error(e.code(), e.what(), d);
}

void collect_numbers(const json& j, std::vector<double>& out) {
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            if (k != "series") collect_numbers(v, out);
    } else if (j.is_array()) {
        for (const auto& v : j) collect_numbers(v, out);
    }
}

void required_values(const json& j, std::vector<std::string>& out, int depth = 0) {
    if (!j.is_object()) return;
    if (j.contains("stat") && j["stat"].is_string()) {
        const auto stat = j["stat"].get<std::string>();
        if (stat == "trend" && j.contains("trend")) {
            out.push_back(format_fixed(j["trend"]["slope_mm_per_year"].get<double>()));
        } else if (stat == "full_series") {
            for (const char* k : {"min", "max"})
                if (j.contains(k) && j[k].is_number()) out.push_back(format_fixed(j[k].get<double>()));
        } else if (j.contains("value") && j["value"].is_number()) {
            out.push_back(format_fixed(j["value"].get<double>()));
        }
    }
    if (depth == 0)
        for (const auto& [k, v] : j.items())
            if (k != "series") required_values(v, out, 1);
}

json for_model(const ToolResponse& tr) {
    json j = encode(tr);
    auto strip = [](json& d) {
        if (d.is_object() && d.contains("series")) {
            d["series_points"] = d["series"]["timestamps"].size();
            d.erase("series");
        }
    };
    strip(j["json_data"]);
    for (auto& [k, v] : j["json_data"].items()) strip(v);
    return j;
}

std::string label_of(const ToolResponse& tr, const std::string& fallback) {
    if (tr.json_data.contains("label") && tr.json_data["label"].is_string()) return tr.json_data["label"].get<std::string>();
    return fallback;
}

}  // namespace

std::string_view to_string(Mode m) noexcept { return m == Mode::ModelBacked ? "ModelBacked" : "Deterministic"; }

std::optional<Mode> mode_from_string(std::string_view s) noexcept {
    const auto l = to_lower(s);
    if (l == "deterministic") return Mode::Deterministic;
    if (l == "modelbacked" || l == "model_backed" || l == "model") return Mode::ModelBacked;
    return std::nullopt;
}

TurnPlan plan(std::string_view user_text, const Gazetteer& gz, Timestamp now) {
    TurnPlan p;
    if (trim(user_text).empty()) {
        p.run_web = p.run_docs = false;
        return p;
    }
    try {
        p.structured = parse_query(user_text, gz, now);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnsupportedIntent)
            p.deferred = true;
        else
            p.parse_error = e;
    }
    return p;
}

json encode(const Answer& a, const std::string& figure_prefix) {
    json figs = json::array();
    for (const auto& f : a.figures)
        figs.push_back({{"hash", f.hash}, {"url", figure_prefix + f.path}, {"alt_text", f.alt_text}, {"kind", std::string(to_string(f.kind))}});
    json cites = json::array();
    for (const auto& c : a.citations) cites.push_back({{"kind", citation_kind(c.kind)}, {"identifier", c.identifier}, {"title", c.title}});
    json prov = json::array();
    for (const auto& p : a.provenance) prov.push_back(encode(p));
    return {{"text", a.text},
            {"figures", figs},
            {"data", a.data},
            {"citations", cites},
            {"provenance", prov},
            {"mode", std::string(to_string(a.mode))},
            {"diagnostics", a.diagnostics}};
}

std::vector<std::string> decimal_literals(std::string_view t) {
    std::vector<std::string> out;
    auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    std::size_t i = 0;
    while (i < t.size()) {
        if (!digit(t[i])) {
            ++i;
            continue;
        }
        const bool glued = i > 0 && (alnum(t[i - 1]) || t[i - 1] == '.');
        std::size_t j = i;
        while (j < t.size() && digit(t[j])) ++j;
        std::size_t k = j;
        if (k + 1 < t.size() && t[k] == '.' && digit(t[k + 1])) {
            ++k;
            while (k < t.size() && digit(t[k])) ++k;
        }
        const bool dotted_tail = k + 1 < t.size() && t[k] == '.' && digit(t[k + 1]);
        if (k > j && !glued && !dotted_tail) {
            std::string lit(t.substr(i, k - i));
            const bool neg = i > 0 && t[i - 1] == '-' && (i < 2 || !alnum(t[i - 2]));
            out.push_back(neg ? "-" + lit : lit);
        }
        i = k;
        while (i < t.size() && (alnum(t[i]) || (t[i] == '.' && i + 1 < t.size() && digit(t[i + 1])))) ++i;
    }
    return out;
}

NumericCheck check_numbers(std::string_view text, const json& data) {
    NumericCheck c;
    std::vector<double> nums;
    collect_numbers(data, nums);
    const auto lits = decimal_literals(text);
    for (const auto& lit : lits) {
        const auto dot = lit.find('.');
        const int places = static_cast<int>(lit.size() - dot - 1);
        const bool hit = std::any_of(nums.begin(), nums.end(), [&](double x) {
            return format_fixed(x, places) == lit || format_fixed(-x, places) == lit;
        });
        if (!hit) c.offending.push_back(lit);
    }
    std::vector<std::string> req;
    required_values(data, req);
    for (const auto& r : req) {
        const auto abs = r.front() == '-' ? r.substr(1) : r;
        const bool found = std::any_of(lits.begin(), lits.end(), [&](const std::string& l) { return l == r || l == abs; });
        if (!found) c.missing.push_back(r);
    }
    c.ok = c.offending.empty() && c.missing.empty();
    return c;
}

std::string synthesize(const ToolResponse* tr, const std::vector<Citation>& citations, const std::vector<std::string>& degraded) {
    std::string out = tr ? tr->text : "No data function matched this question; the sources below are the closest retrieved material.";
    auto src = sources_line(citations);
    if (!src.empty()) out += " " + src;
    for (const auto& d : degraded) out += fmt::format(" Note: {}.", d);
    return out;
}

HttpModelClient::HttpModelClient(ModelConfig cfg, Post post) : cfg_(std::move(cfg)), post_(std::move(post)) {
    if (cfg_.base_url.empty() || cfg_.model.empty())
        throw Error(ErrorCode::ConfigError, "model endpoint needs base_url and model", {{"field", "model"}});
    if (!post_) {
        post_ = [](const std::string& url, const std::string& body, const std::string& key, std::chrono::seconds timeout) {
            auto s = url.find("://");
            auto p = url.find('/', s == std::string::npos ? 0 : s + 3);
            httplib::Client cli(url.substr(0, p));
            cli.set_connection_timeout(std::chrono::seconds{10});
            cli.set_read_timeout(timeout);
            httplib::Headers h;
            if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
            auto res = cli.Post(p == std::string::npos ? "/" : url.substr(p), h, body, "application/json");
            if (!res)
                throw Error(ErrorCode::ModelUnavailable, "model request failed: " + httplib::to_string(res.error()), {{"retryable", true}});
            return std::make_pair(res->status, res->body);
        };
    }
}

json HttpModelClient::complete(const json& request) const {
    auto base = cfg_.base_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    json req = request;
    req["model"] = cfg_.model;
    auto [status, body] = post_(base + "/chat/completions", req.dump(), cfg_.api_key, cfg_.timeout);
    if (status != 200)
        throw Error(ErrorCode::ModelUnavailable, fmt::format("model endpoint returned HTTP {}", status),
                    {{"status", status}, {"retryable", status == 429 || status >= 500}});
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ModelUnavailable, std::string("model response is not JSON: ") + e.what(), {{"retryable", false}});
    }
}

Orchestrator::Orchestrator(OrchestratorDeps deps) : deps_(std::move(deps)) {
    if (!deps_.registry || !deps_.gazetteer)
        throw Error(ErrorCode::ConfigError, "orchestrator needs a registry and gazetteer", {{"field", "registry"}});
    if (!deps_.now) deps_.now = system_now;
}

Answer Orchestrator::run_turn(std::string_view user_text, Mode mode) const {
    const std::string text(user_text);
    auto p = plan(text, *deps_.gazetteer, deps_.now());
    if (trim(text).empty()) {
        Answer a;
        a.mode = mode;
        a.text = "Please ask a question about ocean data, for example: What is the maximum water level in Boston in 2024?";
        a.diagnostics = {{"plan", encode_plan(p)}, {"degraded", json::array()}, {"clarification", true}};
        return a;
    }
    if (p.parse_error) throw *p.parse_error;
    if (mode == Mode::ModelBacked) {
        if (!deps_.model) throw Error(ErrorCode::ModelUnavailable, "ModelBacked mode needs a configured model endpoint", {{"field", "mode"}});
        return model_backed(text, p);
    }
    return deterministic(text, p);
}

Answer Orchestrator::deterministic(const std::string& text, const TurnPlan& p) const {
    auto retrieval = std::async(std::launch::async, [&] { return retrieve(text, p, deps_); });
    std::optional<ToolResponse> tr;
    std::optional<Error> err;
    if (p.structured) {
        try {
            tr = dispatch_structured(*deps_.registry, *p.structured, deps_.figures);
        } catch (const Error& e) {
            err = e;
        } catch (const std::exception& e) {
            err = Error(ErrorCode::Internal, e.what());
        }
    }
    auto r = retrieval.get();
    auto a = assemble(p, tr ? &*tr : nullptr, r, Mode::Deterministic);
    if (err) rethrow_with_partial(*err, a);
    return a;
}

Answer Orchestrator::model_backed(const std::string& text, const TurnPlan& p) const {
    const auto r = retrieve(text, p, deps_);
    auto fallback = [&](const std::string& why, const json& detail) {
        spdlog::warn("model turn fell back to deterministic synthesis: {}", why);
        auto a = deterministic(text, p);
        a.diagnostics["requested_mode"] = "ModelBacked";
        a.diagnostics["model_error"] = detail;
        return a;
    };

    std::string context;
    for (std::size_t i = 0; i < r.docs.size(); ++i)
        context += fmt::format("[doc {}] {}: {}\n", i + 1, r.docs[i].chunk.meta.title, r.docs[i].chunk.text);
    for (std::size_t i = 0; i < r.web.size(); ++i)
        context += fmt::format("[web {}] {} ({}): {}\n", i + 1, r.web[i].title, r.web[i].url, r.web[i].snippet);

    json messages = json::array({{{"role", "system"}, {"content", kSystemPrompt}}});
    if (!context.empty()) messages.push_back({{"role", "system"}, {"content", "Retrieved context:\n" + context}});
    messages.push_back({{"role", "user"}, {"content", text}});
    const json tools = deps_.registry->emit_function_schemas();

    json first;
    try {
        auto resp = deps_.model->complete({{"model", deps_.model->model()}, {"messages", messages}, {"tools", tools},
                                           {"tool_choice", "auto"}, {"temperature", 0}});
        first = resp.at("choices").at(0).at("message");
        if (!first.is_object()) throw Error(ErrorCode::ModelUnavailable, "message is not an object");
    } catch (const Error& e) {
        return fallback(e.what(), e.to_json());
    } catch (const json::exception& e) {
        return fallback(e.what(), {{"code", "ModelUnavailable"}, {"message", std::string("malformed model response: ") + e.what()}});
    }

    const json calls = first.contains("tool_calls") && first["tool_calls"].is_array() ? first["tool_calls"] : json::array();
    if (calls.empty()) {
        const std::string content = first.value("content", json("")).is_string() ? first.value("content", "") : "";
        if (p.structured) {
            auto a = fallback("model emitted no tool call", {{"code", "NoToolCall"}, {"message", "model emitted no tool call; parsed query dispatched"}});
            a.mode = Mode::ModelBacked;
            return a;
        }
        auto a = assemble(p, nullptr, r, Mode::ModelBacked);
        if (!trim(content).empty()) {
            auto src = sources_line(a.citations);
            a.text = src.empty() ? content : content + " " + src;
        }
        return a;
    }

    std::vector<std::pair<std::string, ToolResponse>> results;
    json errors = json::array();
    json tool_messages = json::array();
    for (std::size_t i = 0; i < calls.size() && i < kMaxToolCalls; ++i) {
        const auto& tc = calls[i];
        const std::string id = tc.contains("id") && tc["id"].is_string() ? tc["id"].get<std::string>() : fmt::format("call_{}", i);
        try {
            auto call = FunctionCall::from_json(tc);
            auto tr = deps_.registry->dispatch(call);
            tool_messages.push_back({{"role", "tool"}, {"tool_call_id", id}, {"content", for_model(tr).dump()}});
            results.emplace_back(label_of(tr, call.name), std::move(tr));
        } catch (const Error& e) {
            tool_messages.push_back({{"role", "tool"}, {"tool_call_id", id}, {"content", json{{"error", e.to_json()}}.dump()}});
            errors.push_back(e.to_json());
        }
    }
    if (results.empty()) {
        const auto& e0 = errors[0];
        auto partial = assemble(p, nullptr, r, Mode::ModelBacked);
        const auto code = e0.value("code", "UpstreamFailure");
        ErrorCode ec = ErrorCode::UpstreamFailure;
        for (auto c : {ErrorCode::ArgValidation, ErrorCode::UnknownFunction, ErrorCode::MalformedRequest})
            if (code == to_string(c)) ec = c;
        rethrow_with_partial(Error(ec, e0.value("message", "tool call failed"), e0.value("details", json::object())), partial);
    }

    ToolResponse merged;
    if (results.size() == 1) {
        merged = results[0].second;
    } else {
        json prov = json::array();
        std::vector<std::string> texts;
        for (auto& [label, tr] : results) {
            auto key = label;
            for (int n = 2; merged.json_data.contains(key); ++n) key = fmt::format("{} ({})", label, n);
            merged.json_data[key] = tr.json_data;
            for (const auto& img : tr.images) merged.images.push_back(img);
            for (const auto& pv : tr.others["provenance"]) prov.push_back(pv);
            texts.push_back(tr.text);
        }
        merged.text = fmt::format("{}", fmt::join(texts, " "));
        merged.others = {{"function", "multiple"}, {"unit", results[0].second.others["unit"]},
                         {"time_span", results[0].second.others["time_span"]}, {"provenance", prov}};
    }
    if (!errors.empty()) merged.others["errors"] = errors;

    std::string final_text;
    try {
        json convo = messages;
        json assistant = {{"role", "assistant"}, {"content", first.value("content", json(nullptr))}, {"tool_calls", calls}};
        convo.push_back(assistant);
        for (const auto& m : tool_messages) convo.push_back(m);
        auto resp = deps_.model->complete({{"model", deps_.model->model()}, {"messages", convo}, {"tools", tools},
                                           {"tool_choice", "none"}, {"temperature", 0}});
        const auto& msg = resp.at("choices").at(0).at("message");
        if (msg.contains("content") && msg["content"].is_string()) final_text = msg["content"].get<std::string>();
    } catch (const Error& e) {
        auto a = assemble(p, &merged, r, Mode::ModelBacked);
        a.diagnostics["model_error"] = e.to_json();
        return a;
    } catch (const json::exception& e) {
        auto a = assemble(p, &merged, r, Mode::ModelBacked);
        a.diagnostics["model_error"] = {{"code", "ModelUnavailable"}, {"message", std::string("malformed model response: ") + e.what()}};
        return a;
    }

    auto a = assemble(p, &merged, r, Mode::ModelBacked);
    a.diagnostics["tool_calls"] = calls.size();
    const auto check = check_numbers(final_text, merged.json_data);
    if (trim(final_text).empty() || !check.ok) {
        a.diagnostics["fallback"] = {{"code", std::string(to_string(ErrorCode::SynthesisNumericMismatch))},
                                     {"offending", check.offending},
                                     {"missing", check.missing},
                                     {"model_text", final_text}};
        return a;
    }
    auto src = sources_line(a.citations);
    a.text = src.empty() ? final_text : final_text + " " + src;
    for (const auto& d : r.degraded) a.text += fmt::format(" Note: {}.", d);
    return a;
}

}  // namespace oceanqa
