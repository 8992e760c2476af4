// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oceanqa/transport.hpp"

namespace oceanqa {

struct DocMeta {
    std::string title;
    std::optional<int> year;
    std::string origin;  // URL or report series
    bool operator==(const DocMeta&) const = default;
};

struct DocChunk {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::string text;
    std::vector<double> embedding;
    DocMeta meta;
    bool operator==(const DocChunk&) const = default;
};

struct ScoredChunk {
    DocChunk chunk;
    double score = 0.0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    /// Unit-normalized. Throws EmptyDocument for text with no content.
    virtual std::vector<double> embed(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

/// Signed feature hashing of lowercase word unigrams and bigrams, with
/// character trigrams as a fallback for text without word characters.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256) : dim_(dimension) {}
    std::size_t dimension() const override { return dim_; }
    std::vector<double> embed(const std::string& text) const override;
    std::string name() const override { return "hashing-v1"; }

private:
    std::size_t dim_;
};

struct ChunkParams {
    std::size_t chunk_size = 400;  // code points
    std::size_t overlap = 100;
};

/// Window starts (in code points) for a text of `length` code points.
std::vector<std::size_t> chunk_starts(std::size_t length, const ChunkParams& p);
std::vector<std::string> chunk_text(const std::string& text, const ChunkParams& p);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// In-memory chunk store with exhaustive cosine search. When opened on a
/// directory it persists as `snapshot.json` plus an append-only `log.jsonl`
/// of ingest/remove operations replayed on load.
class DocStore {
public:
    explicit DocStore(std::shared_ptr<const Embedder> embedder, std::optional<std::filesystem::path> dir = std::nullopt);

    std::size_t ingest(const std::string& doc_id, const std::string& text, const DocMeta& meta, ChunkParams p = {});
    bool remove(const std::string& doc_id);
    /// Top-k by cosine, ties by (doc_id, chunk_index). Throws EmptyStore.
    std::vector<ScoredChunk> search(const std::string& query, std::size_t k = 4) const;

    std::size_t size() const;
    std::vector<DocChunk> chunks() const;  // sorted by (doc_id, chunk_index)
    /// Writes a snapshot and truncates the log.
    void compact();
    const Embedder& embedder() const noexcept { return *embedder_; }

    /// Ingests every `*.txt` with a sibling `*.json` metadata file.
    std::size_t ingest_directory(const std::filesystem::path& corpus, ChunkParams p = {});

private:
    using State = std::map<std::pair<std::string, std::size_t>, DocChunk>;
    std::shared_ptr<const State> snapshot() const;
    std::size_t apply_ingest(State& s, const std::string& doc_id, const std::string& text, const DocMeta& meta, ChunkParams p) const;
    void append_log(const nlohmann::json& op);
    void load();

    std::shared_ptr<const Embedder> embedder_;
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex read_mu_;
    std::mutex write_mu_;
    std::shared_ptr<const State> state_;
};

struct WebResult {
    std::string title;
    std::string url;
    std::string snippet;
    bool operator==(const WebResult&) const = default;
};

class WebSearch {
public:
    virtual ~WebSearch() = default;
    /// Throws ProviderUnavailable.
    virtual std::vector<WebResult> search(const std::string& query) const = 0;
    virtual std::string name() const = 0;
};

/// Fixture results keyed by normalized query text; unknown queries give none.
class StubWebSearch final : public WebSearch {
public:
    explicit StubWebSearch(std::map<std::string, std::vector<WebResult>> fixtures);
    static StubWebSearch load(const std::filesystem::path& path);
    std::vector<WebResult> search(const std::string& query) const override;
    std::string name() const override { return "stub"; }

    static std::string key(const std::string& query);

private:
    std::map<std::string, std::vector<WebResult>> fixtures_;
};

/// Brave Search web endpoint adapter.
class BraveWebSearch final : public WebSearch {
public:
    using Fetch = std::function<HttpResponse(const std::string& url, const std::map<std::string, std::string>& headers)>;

    BraveWebSearch(std::string endpoint, std::string api_key, std::size_t count = 5, Fetch fetch = {});
    std::vector<WebResult> search(const std::string& query) const override;
    std::string name() const override { return "brave"; }

    /// Results lacking a URL are dropped. Throws ProviderUnavailable on a
    /// malformed payload.
    static std::vector<WebResult> parse(const std::string& body);

private:
    std::string endpoint_;
    std::string api_key_;
    std::size_t count_;
    Fetch fetch_;
};

}  // namespace oceanqa
