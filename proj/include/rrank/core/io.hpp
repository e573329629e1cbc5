#pragma once

#include <string>
#include <vector>

#include "rrank/core/types.hpp"

namespace rrank {

// All formats are UTF-8, LF line endings. Serializers emit the canonical form;
// loading a canonical file and re-serializing reproduces it byte for byte.

// Queries TSV: one `qid<TAB>text` per line, all Role::Original.
QuerySet load_queries(const std::string& path);
std::string serialize_queries(const QuerySet& queries);
void save_queries(const QuerySet& queries, const std::string& path);

// TREC qrels: `qid 0 docid grade`. Grades validated against num_levels;
// duplicate (qid, docid) entries follow last-write-wins and are counted in
// Qrels::duplicate_warnings.
Qrels load_qrels(const std::string& path, int num_levels);
std::string serialize_qrels(const Qrels& qrels);
void save_qrels(const Qrels& qrels, const std::string& path);

// TREC 6-column run: `qid Q0 docid rank score tag`. Scores use the shortest
// round-trip decimal form. Loading canonicalizes ordering.
RankedRun load_run(const std::string& path);
std::string serialize_run(const RankedRun& run);
void save_run(const RankedRun& run, const std::string& path);

// Rewrites JSONL, one RewriteRecord per line.
std::vector<RewriteRecord> load_rewrites(const std::string& path);
std::string serialize_rewrites(const std::vector<RewriteRecord>& records);
void save_rewrites(const std::vector<RewriteRecord>& records, const std::string& path);

// Embeddings JSONL: {"qid","role","docid","vec":[...]} per line.
EmbeddingSet load_embeddings(const std::string& path);
std::string serialize_embeddings(const EmbeddingSet& embeddings);
void save_embeddings(const EmbeddingSet& embeddings, const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace rrank
