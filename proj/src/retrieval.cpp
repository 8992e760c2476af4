// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "oceanqa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "oceanqa/error.hpp"
#include "oceanqa/text_util.hpp"

namespace oceanqa {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    h ^= h >> 29;
    h *= 0xBF58476D1CE4E5B9ULL;
    return h ^ (h >> 32);
}

std::vector<std::size_t> codepoint_offsets(const std::string& s) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.size(); ++i)
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
    return out;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

json meta_json(const DocMeta& m) {
    return {{"title", m.title}, {"year", m.year ? json(*m.year) : json(nullptr)}, {"origin", m.origin}};
}

DocMeta meta_from(const json& j) {
    DocMeta m;
    m.title = j.value("title", "");
    if (j.contains("year") && !j["year"].is_null()) m.year = j["year"].get<int>();
    m.origin = j.value("origin", "");
    return m;
}

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Internal, "cannot write " + tmp.string(), {{"path", tmp.string()}});
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<double> HashingEmbedder::embed(const std::string& text) const {
    std::vector<double> v(dim_, 0.0);
    auto add = [&](std::string_view feature, double w) {
        const auto h = fnv1a(feature);
        v[h % dim_] += (h >> 63) ? -w : w;
    };
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    for (std::size_t i = 0; i < words.size(); ++i) {
        add(words[i], 1.0);
        if (i + 1 < words.size()) add(words[i] + " " + words[i + 1], 0.5);
    }
    if (words.empty()) {
        const auto t = normalize_space(text);
        for (std::size_t i = 0; i + 3 <= t.size(); ++i) add("#" + t.substr(i, 3), 1.0);
        if (t.size() < 3 && !t.empty()) add("#" + t, 1.0);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
        if (blank(text)) throw Error(ErrorCode::EmptyDocument, "nothing to embed", {{"field", "text"}});
        v[fnv1a(text) % dim_] = 1.0;  // every feature cancelled out
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::vector<std::size_t> chunk_starts(std::size_t length, const ChunkParams& p) {
    if (p.chunk_size == 0 || p.overlap >= p.chunk_size)
        throw Error(ErrorCode::InvalidValue, "chunk_size must exceed overlap", {{"field", "chunk_size"}, {"chunk_size", p.chunk_size}, {"overlap", p.overlap}});
    if (length <= p.chunk_size) return {0};
    const std::size_t step = p.chunk_size - p.overlap;
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < length; s += step) out.push_back(s);
    return out;
}

std::vector<std::string> chunk_text(const std::string& text, const ChunkParams& p) {
    const auto cps = codepoint_offsets(text);
    std::vector<std::string> out;
    for (auto s : chunk_starts(cps.size(), p)) {
        const auto e = std::min(cps.size(), s + p.chunk_size);
        const auto b0 = s < cps.size() ? cps[s] : text.size();
        const auto b1 = e < cps.size() ? cps[e] : text.size();
        out.push_back(text.substr(b0, b1 - b0));
    }
    return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidValue, "embedding dimensions differ", {{"field", "embedding"}});
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / std::sqrt(na * nb);
}

// ---- store ----

DocStore::DocStore(std::shared_ptr<const Embedder> embedder, std::optional<std::filesystem::path> dir)
    : embedder_(std::move(embedder)), dir_(std::move(dir)), state_(std::make_shared<State>()) {
    if (!embedder_) throw Error(ErrorCode::ConfigError, "document store needs an embedder", {{"field", "embedder"}});
    if (dir_) {
        std::filesystem::create_directories(*dir_);
        load();
    }
}

std::shared_ptr<const DocStore::State> DocStore::snapshot() const {
    std::lock_guard lock(read_mu_);
    return state_;
}

std::size_t DocStore::apply_ingest(State& s, const std::string& doc_id, const std::string& text, const DocMeta& meta, ChunkParams p) const {
    if (doc_id.empty()) throw Error(ErrorCode::InvalidValue, "doc_id must be non-empty", {{"field", "doc_id"}});
    if (blank(text)) throw Error(ErrorCode::EmptyDocument, "document " + doc_id + " has no text", {{"field", "text"}, {"doc_id", doc_id}});
    auto pieces = chunk_text(text, p);
    for (auto it = s.lower_bound({doc_id, 0}); it != s.end() && it->first.first == doc_id;) it = s.erase(it);
    std::size_t n = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (blank(pieces[i])) continue;
        s[{doc_id, n}] = DocChunk{doc_id, n, pieces[i], embedder_->embed(pieces[i]), meta};
        ++n;
    }
    return n;
}

std::size_t DocStore::ingest(const std::string& doc_id, const std::string& text, const DocMeta& meta, ChunkParams p) {
    std::lock_guard wlock(write_mu_);
    auto next = std::make_shared<State>(*snapshot());
    const auto n = apply_ingest(*next, doc_id, text, meta, p);
    if (*next == *snapshot()) return n;
    append_log({{"op", "ingest"}, {"doc_id", doc_id}, {"text", text}, {"meta", meta_json(meta)}, {"chunk_size", p.chunk_size}, {"overlap", p.overlap}});
    std::lock_guard lock(read_mu_);
    state_ = std::move(next);
    return n;
}

bool DocStore::remove(const std::string& doc_id) {
    std::lock_guard wlock(write_mu_);
    auto next = std::make_shared<State>(*snapshot());
    const auto before = next->size();
    for (auto it = next->lower_bound({doc_id, 0}); it != next->end() && it->first.first == doc_id;) it = next->erase(it);
    if (next->size() == before) return false;
    append_log({{"op", "remove"}, {"doc_id", doc_id}});
    std::lock_guard lock(read_mu_);
    state_ = std::move(next);
    return true;
}

std::vector<ScoredChunk> DocStore::search(const std::string& query, std::size_t k) const {
    if (k == 0) throw Error(ErrorCode::InvalidValue, "k must be at least 1", {{"field", "k"}});
    const auto s = snapshot();
    if (s->empty()) throw Error(ErrorCode::EmptyStore, "the document store is empty", {{"field", "store"}});
    const auto q = embedder_->embed(query);
    std::vector<ScoredChunk> all;
    all.reserve(s->size());
    for (const auto& [key, c] : *s) all.push_back({c, cosine(q, c.embedding)});
    const auto n = std::min(k, all.size());
    // map order already gives (doc_id, chunk_index); stable sort keeps it for ties
    std::stable_sort(all.begin(), all.end(), [](const ScoredChunk& a, const ScoredChunk& b) { return a.score > b.score; });
    all.resize(n);
    return all;
}

std::size_t DocStore::size() const { return snapshot()->size(); }

std::vector<DocChunk> DocStore::chunks() const {
    std::vector<DocChunk> out;
    for (const auto& [k, c] : *snapshot()) out.push_back(c);
    return out;
}

void DocStore::append_log(const json& op) {
    if (!dir_) return;
    std::ofstream out(*dir_ / "log.jsonl", std::ios::app | std::ios::binary);
    out << op.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::Internal, "cannot append to document log", {{"path", (*dir_ / "log.jsonl").string()}});
}

void DocStore::compact() {
    if (!dir_) return;
    std::lock_guard wlock(write_mu_);
    const auto s = snapshot();
    json chunks = json::array();
    for (const auto& [k, c] : *s)
        chunks.push_back({{"doc_id", c.doc_id}, {"chunk_index", c.chunk_index}, {"text", c.text}, {"meta", meta_json(c.meta)}, {"embedding", c.embedding}});
    json j = {{"format", "oceanqa-docstore/1"}, {"embedder", embedder_->name()}, {"dimension", embedder_->dimension()}, {"chunks", chunks}};
    write_atomic(*dir_ / "snapshot.json", j.dump() + "\n");
    write_atomic(*dir_ / "log.jsonl", "");
}

void DocStore::load() {
    State s;
    const auto snap = *dir_ / "snapshot.json";
    try {
        if (std::filesystem::exists(snap)) {
            std::ifstream in(snap);
            auto j = json::parse(in);
            if (j.at("format") != "oceanqa-docstore/1") throw Error(ErrorCode::ConfigError, "unknown snapshot format", {{"path", snap.string()}});
            if (j.at("embedder") != embedder_->name() || j.at("dimension") != embedder_->dimension())
                throw Error(ErrorCode::ConfigError, "snapshot was built with a different embedder", {{"path", snap.string()}, {"field", "embedder"}});
            for (const auto& c : j.at("chunks")) {
                DocChunk d{c.at("doc_id"), c.at("chunk_index"), c.at("text"), c.at("embedding").get<std::vector<double>>(), meta_from(c.at("meta"))};
                if (d.embedding.size() != embedder_->dimension())
                    throw Error(ErrorCode::ConfigError, "snapshot embedding has the wrong dimension", {{"path", snap.string()}});
                s[{d.doc_id, d.chunk_index}] = std::move(d);
            }
        }
        std::ifstream log(*dir_ / "log.jsonl");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(log, line)) {
            ++lineno;
            if (blank(line)) continue;
            json op;
            try {
                op = json::parse(line);
            } catch (const json::exception&) {
                // a torn final append is dropped; anything earlier is corruption
                if (log.peek() == std::char_traits<char>::eof()) break;
                throw;
            }
            if (op.at("op") == "ingest") {
                apply_ingest(s, op.at("doc_id"), op.at("text"), meta_from(op.at("meta")), {op.at("chunk_size"), op.at("overlap")});
            } else if (op.at("op") == "remove") {
                const std::string id = op.at("doc_id");
                for (auto it = s.lower_bound({id, 0}); it != s.end() && it->first.first == id;) it = s.erase(it);
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "corrupt document store: " + std::string(e.what()), {{"path", dir_->string()}});
    }
    state_ = std::make_shared<State>(std::move(s));
}

std::size_t DocStore::ingest_directory(const std::filesystem::path& corpus, ChunkParams p) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(corpus))
        if (e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::size_t total = 0;
    for (const auto& f : files) {
        auto side = f;
        side.replace_extension(".json");
        DocMeta meta{f.stem().string(), std::nullopt, ""};
        if (std::filesystem::exists(side)) {
            std::ifstream in(side);
            try {
                meta = meta_from(json::parse(in));
            } catch (const json::exception& e) {
                throw Error(ErrorCode::ConfigError, "bad metadata " + side.string() + ": " + e.what(), {{"path", side.string()}});
            }
        }
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        total += ingest(f.stem().string(), ss.str(), meta, p);
    }
    return total;
}

// ---- web search ----

StubWebSearch::StubWebSearch(std::map<std::string, std::vector<WebResult>> fixtures) {
    for (auto& [q, r] : fixtures) fixtures_[key(q)] = std::move(r);
}

std::string StubWebSearch::key(const std::string& query) {
    std::string t = to_lower(normalize_space(query));
    while (!t.empty() && (t.back() == '?' || t.back() == '.' || t.back() == '!')) t.pop_back();
    return t;
}

StubWebSearch StubWebSearch::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read web fixtures " + path.string(), {{"path", path.string()}});
    try {
        auto j = json::parse(in);
        std::map<std::string, std::vector<WebResult>> fx;
        for (const auto& [q, arr] : j.at("queries").items())
            for (const auto& r : arr) fx[q].push_back({r.at("title"), r.at("url"), r.value("snippet", "")});
        return StubWebSearch(std::move(fx));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "bad web fixtures: " + std::string(e.what()), {{"path", path.string()}});
    }
}

std::vector<WebResult> StubWebSearch::search(const std::string& query) const {
    auto it = fixtures_.find(key(query));
    return it == fixtures_.end() ? std::vector<WebResult>{} : it->second;
}

BraveWebSearch::BraveWebSearch(std::string endpoint, std::string api_key, std::size_t count, Fetch fetch)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), count_(count), fetch_(std::move(fetch)) {
    if (!fetch_) {
        fetch_ = [](const std::string& url, const std::map<std::string, std::string>& headers) {
            auto s = url.find("://");
            auto p = url.find('/', s == std::string::npos ? 0 : s + 3);
            httplib::Client cli(url.substr(0, p));
            cli.set_connection_timeout(std::chrono::seconds{10});
            cli.set_read_timeout(std::chrono::seconds{20});
            httplib::Headers h;
            for (const auto& [k, v] : headers) h.emplace(k, v);
            auto res = cli.Get(p == std::string::npos ? "/" : url.substr(p), h);
            if (!res)
                throw Error(ErrorCode::ProviderUnavailable, "web search request failed: " + httplib::to_string(res.error()),
                            {{"retryable", true}});
            return HttpResponse{res->status, res->body, res->get_header_value("Content-Type")};
        };
    }
}

std::vector<WebResult> BraveWebSearch::search(const std::string& query) const {
    if (api_key_.empty()) throw Error(ErrorCode::ProviderUnavailable, "no web search API key configured", {{"retryable", false}});
    const auto url = fmt::format("{}?q={}&count={}", endpoint_, percent_encode(query), count_);
    auto res = fetch_(url, {{"Accept", "application/json"}, {"X-Subscription-Token", api_key_}});
    if (res.status != 200)
        throw Error(ErrorCode::ProviderUnavailable, fmt::format("web search returned HTTP {}", res.status),
                    {{"status", res.status}, {"retryable", res.status == 429 || res.status >= 500}});
    return parse(res.body);
}

std::vector<WebResult> BraveWebSearch::parse(const std::string& body) {
    auto strip = [](const std::string& s) {
        std::string out;
        bool tag = false;
        for (char c : s) {
            if (c == '<') tag = true;
            else if (c == '>') tag = false;
            else if (!tag) out += c;
        }
        return out;
    };
    std::vector<WebResult> out;
    try {
        auto j = json::parse(body);
        if (!j.contains("web")) return out;
        for (const auto& r : j.at("web").value("results", json::array())) {
            const auto url = r.value("url", "");
            if (url.empty()) continue;
            auto title = strip(r.value("title", ""));
            out.push_back({title.empty() ? url : title, url, strip(r.value("description", ""))});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderUnavailable, "malformed web search payload: " + std::string(e.what()), {{"retryable", false}});
    }
    return out;
}

}  // namespace oceanqa
