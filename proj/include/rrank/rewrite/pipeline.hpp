#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rrank/core/types.hpp"
#include "rrank/rewrite/backend.hpp"
#include "rrank/rewrite/prompts.hpp"

namespace rrank {

struct CheckScores {
    int s0 = 0;  // semantic fidelity
    int s1 = 0;  // persona conformity
};

struct JudgeScores {
    int semantic = 0;  // 0..5
    int persona = 0;   // 0..5
};

struct PipelineConfig {
    int max_iters = 5;       // generate+check rounds per (query, role)
    int retry_budget = 3;    // attempts for empty intents / unparseable checks
    bool strict = false;     // accept only exact matches (both scores == 1)
    double temperature = 0.0;
    int max_tokens = 256;
    int jobs = 1;            // concurrent (query, role) pipelines
};

// One backend exchange, kept for the audit transcript.
struct TranscriptEntry {
    std::string qid;
    Role role = Role::Original;
    std::string template_id;  // "a".."f" or "judge"
    int attempt = 1;
    std::string prompt;
    std::string response;
    std::string backend_tag;
};

std::string serialize_transcript(const std::vector<TranscriptEntry>& entries);
void save_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path);

// First `count` integer tokens within [lo, hi], reading order; integers
// outside the range are skipped. Throws ParseError when fewer exist.
std::vector<int> parse_scores(const std::string& text, int lo, int hi, int count);

// Intent extraction via template (a). Retries empty replies up to the retry
// budget; throws BackendError carrying the qid when exhausted.
std::string extract_intent(const Query& q, Backend& backend, const PipelineConfig& config,
                           std::vector<TranscriptEntry>* transcript = nullptr);

// One generation call with the selected template (b, d, e or f).
std::string persona_rewrite(const std::string& intent, const Query& q, Role role,
                            Backend& backend, TemplateId template_id,
                            const PipelineConfig& config,
                            const std::string& previous_candidate = "",
                            std::vector<TranscriptEntry>* transcript = nullptr);

// One check call with template (c); throws ParseError when the reply does not
// contain two integers in {-1,0,1}.
CheckScores check_query(const Query& original, const std::string& candidate, Role role,
                        Backend& backend, const PipelineConfig& config,
                        std::vector<TranscriptEntry>* transcript = nullptr, int attempt = 1);

// 0-5 quality judgment of a finished rewrite (reporting only).
JudgeScores judge_quality(const Query& original, const std::string& rewritten, Role role,
                          Backend& backend, const PipelineConfig& config,
                          std::vector<TranscriptEntry>* transcript = nullptr);

struct RewriteRunResult {
    std::vector<RewriteRecord> records;        // sorted by (qid, role index)
    std::vector<TranscriptEntry> transcript;   // same canonical order
};

// Full iterative pipeline over every (query, role) combination: intent once
// per query, then generate / check / branch-regenerate until both scores pass
// or the iteration budget runs out (FallbackOriginal). Roles must exclude
// Original. Runs up to config.jobs pipelines concurrently; output order is
// canonical regardless.
RewriteRunResult rewrite_all(const QuerySet& queries, const std::vector<Role>& roles,
                             Backend& backend, const PipelineConfig& config);

}  // namespace rrank
