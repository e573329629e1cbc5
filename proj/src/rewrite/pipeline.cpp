#include "rrank/rewrite/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "rrank/errors.hpp"

namespace rrank {

namespace {

using ordered_json = nlohmann::ordered_json;

void append_entry(std::vector<TranscriptEntry>* transcript, TranscriptEntry entry) {
    if (transcript) transcript->push_back(std::move(entry));
}

BackendRequest make_request(const std::string& prompt, const PipelineConfig& config) {
    BackendRequest req;
    req.prompt = prompt;
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    return req;
}

std::string trimmed(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string serialize_transcript(const std::vector<TranscriptEntry>& entries) {
    std::string out;
    int seq = 0;
    for (const auto& e : entries) {
        ordered_json j;
        j["seq"] = seq++;
        j["qid"] = e.qid;
        j["role"] = role_name(e.role);
        j["template"] = e.template_id;
        j["attempt"] = e.attempt;
        j["prompt"] = e.prompt;
        j["response"] = e.response;
        j["backend"] = e.backend_tag;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_transcript(const std::vector<TranscriptEntry>& entries, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write transcript: " + path);
    }
    out << serialize_transcript(entries);
}

std::vector<int> parse_scores(const std::string& text, int lo, int hi, int count) {
    std::vector<int> found;
    std::size_t i = 0;
    while (i < text.size() && static_cast<int>(found.size()) < count) {
        bool negative = false;
        std::size_t j = i;
        if (text[j] == '-' && j + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
            negative = true;
            ++j;
        }
        if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
            long value = 0;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                value = value * 10 + (text[j] - '0');
                if (value > 1000000) value = 1000000;  // cap; only small scores matter
                ++j;
            }
            if (negative) value = -value;
            if (value >= lo && value <= hi) {
                found.push_back(static_cast<int>(value));
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (static_cast<int>(found.size()) < count) {
        throw ParseError("expected " + std::to_string(count) + " integer scores in [" +
                         std::to_string(lo) + "," + std::to_string(hi) + "], found " +
                         std::to_string(found.size()) + " in: '" + text + "'");
    }
    return found;
}

std::string extract_intent(const Query& q, Backend& backend, const PipelineConfig& config,
                           std::vector<TranscriptEntry>* transcript) {
    if (q.role != Role::Original) {
        throw DataError("extract_intent expects an original query, got role " + role_name(q.role));
    }
    PromptContext ctx;
    ctx.query = q.text;
    const std::string prompt = render_prompt(TemplateId::A_intent, ctx);
    for (int attempt = 1; attempt <= config.retry_budget; ++attempt) {
        BackendResponse res;
        try {
            res = backend.complete(make_request(prompt, config));
        } catch (const BackendError& e) {
            throw BackendError("intent extraction failed for qid '" + q.qid + "': " + e.what());
        }
        append_entry(transcript, {q.qid, Role::Original, "a", attempt, prompt, res.text,
                                  res.backend_tag});
        const std::string intent = trimmed(res.text);
        if (!intent.empty()) return intent;
    }
    throw BackendError("empty intent after " + std::to_string(config.retry_budget) +
                       " attempts for qid '" + q.qid + "'");
}

std::string persona_rewrite(const std::string& intent, const Query& q, Role role,
                            Backend& backend, TemplateId template_id,
                            const PipelineConfig& config, const std::string& previous_candidate,
                            std::vector<TranscriptEntry>* transcript) {
    if (role == Role::Original) {
        throw DataError("persona_rewrite does not apply to the original role");
    }
    if (template_id == TemplateId::A_intent || template_id == TemplateId::C_check) {
        throw DataError("persona_rewrite requires a generation template (b, d, e or f)");
    }
    PromptContext ctx;
    ctx.query = q.text;
    ctx.agent = role_noun(role);
    ctx.intent = intent;
    ctx.rewriting_query = previous_candidate;
    const std::string prompt = render_prompt(template_id, ctx);
    const BackendResponse res = backend.complete(make_request(prompt, config));
    append_entry(transcript, {q.qid, role, template_id_name(template_id), 1, prompt, res.text,
                              res.backend_tag});
    return trimmed(res.text);
}

CheckScores check_query(const Query& original, const std::string& candidate, Role role,
                        Backend& backend, const PipelineConfig& config,
                        std::vector<TranscriptEntry>* transcript, int attempt) {
    if (candidate.empty()) {
        throw DataError("check_query requires a non-empty candidate");
    }
    PromptContext ctx;
    ctx.query = original.text;
    ctx.rewriting_query = candidate;
    ctx.agent = role_noun(role);
    const std::string prompt = render_prompt(TemplateId::C_check, ctx);
    const BackendResponse res = backend.complete(make_request(prompt, config));
    append_entry(transcript, {original.qid, role, "c", attempt, prompt, res.text,
                              res.backend_tag});
    const auto scores = parse_scores(res.text, -1, 1, 2);
    return CheckScores{scores[0], scores[1]};
}

namespace {

const std::string kJudgePrompt =
    "The original query is: {query}. The rewritten query is: {rewriting query}. "
    "Rate the rewritten query on two metrics: 1. Semantic fidelity to the original query. "
    "2. Alignment with the persona of {agent}. "
    "Rate each metric on a 0 to 5 scale, with 0 being the poorest and 5 being the best. "
    "Answer with the two integer scores.";

}  // namespace

JudgeScores judge_quality(const Query& original, const std::string& rewritten, Role role,
                          Backend& backend, const PipelineConfig& config,
                          std::vector<TranscriptEntry>* transcript) {
    if (rewritten.empty()) {
        throw DataError("judge_quality requires a non-empty rewrite");
    }
    std::string prompt = kJudgePrompt;
    auto replace = [&prompt](const std::string& ph, const std::string& value) {
        std::size_t pos;
        while ((pos = prompt.find(ph)) != std::string::npos) {
            prompt.replace(pos, ph.size(), value);
        }
    };
    replace("{query}", original.text);
    replace("{rewriting query}", rewritten);
    replace("{agent}", role_noun(role));
    const BackendResponse res = backend.complete(make_request(prompt, config));
    append_entry(transcript, {original.qid, role, "judge", 1, prompt, res.text, res.backend_tag});
    const auto scores = parse_scores(res.text, 0, 5, 2);
    return JudgeScores{scores[0], scores[1]};
}

namespace {

// Check with ParseError retries: each retry re-dispatches the same prompt and
// burns one attempt of the budget.
CheckScores checked_scores(const Query& q, const std::string& candidate, Role role,
                           Backend& backend, const PipelineConfig& config,
                           std::vector<TranscriptEntry>* transcript) {
    for (int attempt = 1;; ++attempt) {
        try {
            return check_query(q, candidate, role, backend, config, transcript, attempt);
        } catch (const ParseError&) {
            if (attempt >= config.retry_budget) throw;
        }
    }
}

// Generation with empty-reply retries, mirroring the intent rule.
std::string generated_candidate(const std::string& intent, const Query& q, Role role,
                                Backend& backend, TemplateId template_id,
                                const PipelineConfig& config, const std::string& previous,
                                std::vector<TranscriptEntry>* transcript) {
    for (int attempt = 1; attempt <= config.retry_budget; ++attempt) {
        const std::string candidate =
            persona_rewrite(intent, q, role, backend, template_id, config, previous, transcript);
        if (!candidate.empty()) return candidate;
    }
    throw BackendError("empty rewrite after " + std::to_string(config.retry_budget) +
                       " attempts for qid '" + q.qid + "' role " + role_name(role));
}

struct PipelineTask {
    std::size_t query_idx;
    Role role;
};

RewriteRecord run_one(const Query& q, Role role, const std::string& intent, Backend& backend,
                      const PipelineConfig& config, std::vector<TranscriptEntry>& transcript) {
    const int threshold = config.strict ? 1 : 0;

    RewriteRecord rec;
    rec.qid = q.qid;
    rec.role = role;
    rec.original_text = q.text;
    rec.intent_summary = intent;

    std::string candidate = generated_candidate(intent, q, role, backend, TemplateId::B_rewrite,
                                                config, "", &transcript);
    CheckScores scores = checked_scores(q, candidate, role, backend, config, &transcript);
    int iterations = 1;

    while ((scores.s0 < threshold || scores.s1 < threshold) && iterations < config.max_iters) {
        TemplateId fix;
        if (scores.s0 < threshold && scores.s1 >= threshold) {
            fix = TemplateId::D_fix_semantic;
        } else if (scores.s1 < threshold && scores.s0 >= threshold) {
            fix = TemplateId::E_fix_persona;
        } else {
            fix = TemplateId::F_fix_both;
        }
        candidate = generated_candidate(intent, q, role, backend, fix, config, candidate,
                                        &transcript);
        scores = checked_scores(q, candidate, role, backend, config, &transcript);
        ++iterations;
    }

    rec.iterations = iterations;
    rec.s0 = scores.s0;
    rec.s1 = scores.s1;
    if (scores.s0 >= threshold && scores.s1 >= threshold) {
        rec.status = RewriteStatus::Accepted;
        rec.rewritten_text = candidate;
    } else {
        rec.status = RewriteStatus::FallbackOriginal;
        rec.rewritten_text = q.text;
    }
    return rec;
}

}  // namespace

RewriteRunResult rewrite_all(const QuerySet& queries, const std::vector<Role>& roles,
                             Backend& backend, const PipelineConfig& config) {
    if (config.max_iters < 1) {
        throw UsageError("max_iters must be at least 1");
    }
    for (Role r : roles) {
        if (r == Role::Original) {
            throw UsageError("rewrite roles must exclude the original role");
        }
    }

    // Queries in canonical order (by qid), intents computed once per query.
    std::vector<std::size_t> query_order(queries.size());
    for (std::size_t i = 0; i < query_order.size(); ++i) query_order[i] = i;
    std::sort(query_order.begin(), query_order.end(), [&](std::size_t a, std::size_t b) {
        return queries.items()[a].qid < queries.items()[b].qid;
    });

    std::vector<Role> role_order = roles;
    std::sort(role_order.begin(), role_order.end(),
              [](Role a, Role b) { return role_index(a) < role_index(b); });

    struct Slot {
        RewriteRecord record;
        std::vector<TranscriptEntry> transcript;
    };
    std::vector<std::string> intents(queries.size());
    std::vector<std::vector<TranscriptEntry>> intent_transcripts(queries.size());
    std::vector<Slot> slots(query_order.size() * role_order.size());

    // Phase 1: intents (parallel over queries).
    {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t pos = next.fetch_add(1);
                if (pos >= query_order.size()) return;
                const std::size_t qi = query_order[pos];
                try {
                    intents[qi] = extract_intent(queries.items()[qi], backend, config,
                                                 &intent_transcripts[qi]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        const int jobs = std::max(1, config.jobs);
        std::vector<std::thread> threads;
        for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Phase 2: (query, role) pipelines, buffered into canonical slots.
    {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t pos = next.fetch_add(1);
                if (pos >= slots.size()) return;
                const std::size_t qi = query_order[pos / role_order.size()];
                const Role role = role_order[pos % role_order.size()];
                try {
                    slots[pos].record = run_one(queries.items()[qi], role, intents[qi], backend,
                                                config, slots[pos].transcript);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        const int jobs = std::max(1, config.jobs);
        std::vector<std::thread> threads;
        for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    RewriteRunResult result;
    for (std::size_t pos = 0; pos < query_order.size(); ++pos) {
        const std::size_t qi = query_order[pos];
        result.transcript.insert(result.transcript.end(), intent_transcripts[qi].begin(),
                                 intent_transcripts[qi].end());
        for (std::size_t r = 0; r < role_order.size(); ++r) {
            auto& slot = slots[pos * role_order.size() + r];
            result.transcript.insert(result.transcript.end(), slot.transcript.begin(),
                                     slot.transcript.end());
            result.records.push_back(std::move(slot.record));
        }
    }
    return result;
}

}  // namespace rrank
